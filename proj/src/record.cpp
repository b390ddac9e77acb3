#include "radeval/record.hpp"

#include "radeval/toolcard.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace radeval {

namespace {

using json = nlohmann::ordered_json;

const char* kRecordTemplate =
    R"(You are an experienced clinical radiologist. Your task is to generate a detailed
medical case based on a hypothetical 256x256 medical image. I will provide you with
the Anatomy and Modality of the image, as well as an overall Disease. Using this
information, you should create a comprehensive case report including patient
information, specific anomalies, biomarkers, indicators, a radiology report, and
treatment recommendations.

Please structure your response using the following template:

<Case>
    <Information>
        <Age> [Number without units] </Age>
        <Sex> [Male / Female] </Sex>
        <Height> [Number in cm] </Height>
        <Weight> [Number in kg] </Weight>
        <History> [Brief descriptive text] </History>
        <Complaint> [Brief descriptive text] </Complaint>
    </Information>
    <Anatomy> [Head and Neck / Chest / Breast / Abdomen and Pelvis / Limb / Spine]
    </Anatomy>
    <Modality> [CT / MRI / X-ray / Ultrasound / Mammography] </Modality>
    <Anomaly>
        <Part> [Specific location of anomaly (e.g., right upper lobe of lung)] </Part>
        <Symptom> [Type of anomaly (e.g., nodule)] </Symptom>
    </Anomaly>
    <Disease> [Corresponding disease name] </Disease>
    <OrganBiomarker>
        <OrganObject> [A specific organ serving as biomarker] </OrganObject>
        <OrganDim> [number / length / size / volume / angle / density / intensity /
        texture] </OrganDim>
        <OrganQuant> [Specific quantitative value] </OrganQuant>
    </OrganBiomarker>
    <AnomalyBiomarker>
        <AnomalyObject> [The same Anomaly described in the Anomaly Symptom serving
        as biomarker] </AnomalyObject>
        <AnomalyDim> [number / length / size / volume / angle / density / intensity /
        texture] </AnomalyDim>
        <AnomalyQuant> [Specific quantitative value] </AnomalyQuant>
    </AnomalyBiomarker>
    <Indicator>
        <Name> [Name of the indicator (e.g., Lung Cancer TNM Staging Score)] </Name>
        <Value> [Specific value or grade (e.g., cT2aN0M0 (Stage IB))] </Value>
    </Indicator>
    <Report>
        <Finding> [Findings section in the style of a MIMIC-CXR report] </Finding>
        <Impression> [Impression section in the style of a MIMIC-CXR report]
        </Impression>
    </Report>
    <Treatment> [A paragraph including diagnostic procedures, medication
    recommendations, and follow-up suggestions] </Treatment>
</Case>

Guidelines for generating the case report:

Information: Provide realistic patient demographics, medical history, and chief
complaint.
Anomaly: Describe a specific anomaly consistent with the given anatomy, modality,
and disease.
Biomarkers: Choose a relevant organ biomarker and the anomaly biomarker mentioned
before that can be observed in the image and provide plausible quantitative value.
Indicator: Calculate an appropriate indicator based on the patient information and
biomarker value. Provide a specific, medically accurate score or grade.
Report: Generate a concise radiological report in the style of MIMIC-CXR, with
separate Findings and Impression sections.
Treatment: Offer a comprehensive treatment plan including diagnostic procedures,
medication recommendations, and follow-up care.
Ensure that all parts of the case are medically accurate and consistent with each
other. Use your expertise as a radiologist to provide realistic and detailed
information throughout the case.

Given the following parameters:
- Anatomy: {ANATOMY}
- Imaging Modality: {MODALITY}
- Disease: {DISEASE}
Please generate this patient record.)";

const char* kQaTemplate =
    R"(Assume a clinical medical imaging scenario where you, as the Agent core, play the role
of a doctor. Given a patient's radiological image, you want to complete different tasks
by calling various tools. There are ten tools in total (numbered 0 to 9):

TOOLKIT
0. |Modality Classifier|
    Property: A classification model
    Ability: Determine the modality of the Image.
    Input: [Image]
    Output: [Modality]

1. |Anatomy Classifier|
    Property: A classification model,
    Ability: Determine the anatomy of the Image.
    Input: [Image]
    Output: [Anatomy]

2. |Organ Segmentation Model|
    Property: A segmentation model
    Ability: Given the modality and anatomy, segment all organs in the Image
    (can not segment any lesion or abnormality).
    Input: [Image] & [Modality] & [Anatomy]
    Output: [Organ Mask] & [Organ Label]

3. |Anomaly Detection Model|
    Property: A detection model
    Ability: Given the modality and anatomy, determine the location and type of
    abnormality.
    Input: [Image] & [Modality] & [Anatomy]
    Output: [Anomaly Mask] & [Anomaly Label]

4. |Disease Diagnosis Model|
    Property: A classification model
    Ability: Given the modality and anatomy, diagnose diseases directly from the input
    image.
    Input: [Image] & [Modality] & [Anatomy]
    Output: [Diseases]

5. |Disease Inference Model|
    Property: A Inference model
    Ability: Infer disease based on organ segmentation and anomaly detection results.
    Input: [Image] & [Organ Mask] & [Organ Label] & [Anomaly Mask] & [Anomaly Label]
    Output: [Diseases]

6. |Biomarker Quantification Model|
    Property: A quantification model
    Ability: Given the organ region or anomaly region and the biomarker of interest,
    estimate its property. The biomarker can be either organ or anomaly. The dimension
    can be one of the number, length, size, volume, angle, density, intensity or
    texture of the organ or anomaly.
    Input: [Image] & [Object] & [Dim] & [Biomarker Mask] & [Biomarker Label]
    Output: [Quant]

7. |Indicator Evaluation Model|
    Property: A calculation model
    Ability: Use prior patient information and several biomarkers values to calculate
    the indicator, the indicator can be a score or a grading.
    Input: [Priors] & [Indicator] & [Biomarkers] & [Quants]
    Output: [Value]

8. |Report Generation Model|
    Property: A multimodal model
    Ability: Generate a medical report by integrating results processed by former tools.
    Input: [Image] & [Modality] & [Anatomy]
    Optional Input: ([Organ Mask] & [Organ Label]), ([Anomaly Mask] & [Anomaly Label]),
    [Diseases], ([Object] & [Dim] & [Quant]), ([Indicators] & [Values])
    Output: [Report]

9. |Treatment Recommendation Model|
    Property: a language model
    Ability: Recommend personalized treatment plans based on all results processed by
    former tools and the patient's information.
    Input: [Image] & [Priors] & [Modality] & [Anatomy] & [Diseases]
    Optional Input: ([Organ Mask] & [Organ Label]),([Anomaly Mask] & [Anomaly Label]),
    ([Object] & [Dim] & [Quant]), ([Indicators] & [Values])
    Output: [Treatment]

There are 11 different tasks and the chain of tools each task hopes to break down into:

(1) Basic Image Analysis and Organ Segmentation
    ToolUse: 012
    Description: Perform basic image analysis and segment organs within the medical
    image.

(2) Basic Image Analysis and Anomaly Detection
    ToolUse: 013
    Description: Perform basic image analysis and detect anomalies within the medical
    image.

(3) Image-based Direct Disease Diagnosis
    ToolUse: 014
    Description: Diagnose disease directly from the medical image without intermediate
    steps.

(4) Organ segmentation and anomaly localization
    ToolUse: 0123
    Description: Segment organs and locate anomalies within the medical image.

(5) Anomaly-based Disease Diagnosis
    ToolUse: 01235
    Description: Diagnose disease based on disease inference by finding abnormalities
    and the organ in which they occur.

(6) Organ Biomarker Quantification
    ToolUse: 0126
    Description: Quantify specific biomarkers related to organs in the medical image.

(7) Anomaly Biomarker Quantification
    ToolUse: 0136
    Description: Quantify specific biomarkers related to anomalies in the medical image.

(8) Disease and Anomaly Based Report Generation
    ToolUse: 01348
    Description: Generate a medical report based on detected diseases and anomalies.

(9) Disease and Biomarker Based Report Generation
    ToolUse: 0123568
    Description: Generate a comprehensive report incorporating anomaly detection,
    disease diagnosis and biomarker quantification.

(10) Comprehensive Evaluation Report Generation
    ToolUse: 01235678
    Description: Generate a detailed evaluation report including all aspects of the
    medical image analysis.

(11) Comprehensive Report Generation and Treatment Recommendations
    ToolUse: 012356789
    Description: Generate a comprehensive report including all analysis results and
    treatment recommendations.

Please generate 11 mutually independent question-answer pairs corresponding to tasks
above, based on the different task natures and the content of the case. Specifically,
strictly avoid including information
in the questions that should be determined by the tools (such as imaging modality,
specific anatomy, or precise abnormality types).
Pay attention: create task-specific question-answer pairs that highlight the unique
tool usage patterns for different tasks. The questions should be:

1. Naturally aligned with the task description
2. Representative of real-world scenarios for that task type
3. Questions must not reveal information about modality or anatomy that should be
determined by Tools 0 and 1 or other tools. The questions should be phrased in a way
that necessitates the use of these basic identification tools.

Provide answers in the most concise free-text form possible. If visual results such as
masks are involved, please embed them in the text in the form of [Organ Mask] or
[Anomaly Mask]. (eg. The organ segmentation result is shown as [Organ Mask].) The 11
generated question-answer pairs should follow this template:

<Q1> ... </Q1>
<A1> ... </A1>
<Q2> ... </Q2>
<A2> ... </A2>
...
<Q11> ... </Q11>
<A11> ... </A11>

The answer only needs to provide a simple final result based on the information already
available in the Case, without showing the thought process. I will now provide you with
a Case containing all the information.

The patient record is {Patient Record}, please generate the corresponding QA pairs.)";

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key)) throw MissingField(key);
  const auto& v = j.at(key);
  std::string s;
  if (v.is_string()) s = v.get<std::string>();
  else if (v.is_number_integer()) s = std::to_string(v.get<long long>());
  else if (v.is_number()) s = std::to_string(v.get<double>());
  else throw MissingField(key);
  if (s.empty()) throw MissingField(key);
  return s;
}

int parse_positive_int(const std::string& s, const char* field) {
  try {
    size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size() || v <= 0) throw MalformedNumeric(field);
    return v;
  } catch (const MalformedNumeric&) {
    throw;
  } catch (...) {
    throw MalformedNumeric(field);
  }
}

// Non-integer inputs are rounded half-up; the corpus stores integer strings.
int parse_rounded_int(const std::string& s, const char* field) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || v <= 0) throw MalformedNumeric(field);
    return static_cast<int>(std::floor(v + 0.5));
  } catch (const MalformedNumeric&) {
    throw;
  } catch (...) {
    throw MalformedNumeric(field);
  }
}

void check_dim(const std::string& dim, const char* field) {
  const auto& dims = biomarker_dims();
  if (std::find(dims.begin(), dims.end(), dim) == dims.end())
    throw Error(std::string("illegal biomarker dim in ") + field + ": " + dim);
}

std::string replace_all(std::string text, const std::string& slot,
                        const std::string& value) {
  size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

const std::vector<std::string>& biomarker_dims() {
  static const std::vector<std::string> dims = {
      "number", "length", "size", "volume", "angle", "density", "intensity", "texture"};
  return dims;
}

std::string PatientRecord::record_id() const {
  std::string raw = std::string(to_string(anatomy)) + " " +
                    std::string(to_string(modality)) + " " + disease;
  std::string id;
  bool dash = true;
  for (char c : raw) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      id.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      dash = false;
    } else if (!dash) {
      id.push_back('-');
      dash = true;
    }
  }
  while (!id.empty() && id.back() == '-') id.pop_back();
  return id;
}

std::string PatientRecord::ground_truth(InfoKey key) const {
  switch (key) {
    case InfoKey::Image: return "PLACEHOLDER_IMAGE";
    case InfoKey::Information: return "PLACEHOLDER_INFORMATION";
    case InfoKey::Anatomy: return std::string(to_string(anatomy));
    case InfoKey::Modality: return std::string(to_string(modality));
    case InfoKey::Disease: return disease;
    case InfoKey::OrganObject: return organ_biomarker.object;
    case InfoKey::OrganDim: return organ_biomarker.dim;
    case InfoKey::OrganQuant: return organ_biomarker.quant;
    case InfoKey::AnomalyObject: return anomaly_biomarker.object;
    case InfoKey::AnomalyDim: return anomaly_biomarker.dim;
    case InfoKey::AnomalyQuant: return anomaly_biomarker.quant;
    case InfoKey::IndicatorName: return indicator_name;
    case InfoKey::IndicatorValue: return indicator_value;
    case InfoKey::Report: return report_finding + " " + report_impression;
    case InfoKey::Treatment: return treatment;
    case InfoKey::OrganMask: return "PLACEHOLDER_$OrganMask$";
    case InfoKey::AnomalyMask: return "PLACEHOLDER_$AnomalyMask$";
  }
  return "";
}

std::optional<std::string> PatientRecord::needed_label(ToolCategory category,
                                                       Variant variant) const {
  switch (label_kind_for(category)) {
    case LabelKind::Organs: return organ_biomarker.object;
    case LabelKind::Anomalies: return anomaly_biomarker.object;
    case LabelKind::Diseases: return disease;
    case LabelKind::Biomarkers:
      return variant == Variant::Anomaly ? anomaly_biomarker.dim : organ_biomarker.dim;
    case LabelKind::Indicators: return indicator_name;
    case LabelKind::None: return std::nullopt;
  }
  return std::nullopt;
}

std::string PatientRecord::info_text() const {
  json j;
  j["Age"] = std::to_string(info.age);
  j["Sex"] = info.sex;
  j["Height"] = std::to_string(info.height_cm);
  j["Weight"] = std::to_string(info.weight_kg);
  j["History"] = info.history;
  j["Complaint"] = info.complaint;
  return j.dump(4);
}

PatientRecord parse_patient_record(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("record is not valid JSON: ") + e.what());
  }
  PatientRecord r;
  if (!j.contains("Information")) throw MissingField("Information");
  const auto& info = j.at("Information");
  r.info.age = parse_positive_int(require_string(info, "Age"), "Age");
  r.info.sex = require_string(info, "Sex");
  if (r.info.sex != "Male" && r.info.sex != "Female")
    throw Error("illegal Sex value: " + r.info.sex);
  r.info.height_cm = parse_rounded_int(require_string(info, "Height"), "Height");
  r.info.weight_kg = parse_rounded_int(require_string(info, "Weight"), "Weight");
  r.info.history = require_string(info, "History");
  r.info.complaint = require_string(info, "Complaint");

  const std::string anatomy_text = require_string(j, "Anatomy");
  const std::string modality_text = require_string(j, "Modality");
  const auto anatomy = parse_anatomy(anatomy_text);
  const auto modality = parse_modality(modality_text);
  if (!anatomy || !modality || !combination_allowed(*anatomy, *modality))
    throw IllegalCombination(anatomy_text, modality_text);
  r.anatomy = *anatomy;
  r.modality = *modality;

  if (!j.contains("Anomaly")) throw MissingField("Anomaly");
  r.anomaly_part = require_string(j.at("Anomaly"), "Part");
  r.anomaly_symptom = require_string(j.at("Anomaly"), "Symptom");
  r.disease = require_string(j, "Disease");

  if (!j.contains("OrganBiomarker")) throw MissingField("OrganBiomarker");
  const auto& ob = j.at("OrganBiomarker");
  r.organ_biomarker = {require_string(ob, "OrganObject"),
                       require_string(ob, "OrganDim"),
                       require_string(ob, "OrganQuant")};
  check_dim(r.organ_biomarker.dim, "OrganDim");

  if (!j.contains("AnomalyBiomarker")) throw MissingField("AnomalyBiomarker");
  const auto& ab = j.at("AnomalyBiomarker");
  r.anomaly_biomarker = {require_string(ab, "AnomalyObject"),
                         require_string(ab, "AnomalyDim"),
                         require_string(ab, "AnomalyQuant")};
  check_dim(r.anomaly_biomarker.dim, "AnomalyDim");

  if (!j.contains("Indicator")) throw MissingField("Indicator");
  r.indicator_name = require_string(j.at("Indicator"), "Name");
  r.indicator_value = require_string(j.at("Indicator"), "Value");

  if (!j.contains("Report")) throw MissingField("Report");
  r.report_finding = require_string(j.at("Report"), "Finding");
  r.report_impression = require_string(j.at("Report"), "Impression");
  r.treatment = require_string(j, "Treatment");
  return r;
}

std::string serialize_patient_record(const PatientRecord& r, int indent) {
  json j;
  j["Information"] = {{"Age", std::to_string(r.info.age)},
                      {"Sex", r.info.sex},
                      {"Height", std::to_string(r.info.height_cm)},
                      {"Weight", std::to_string(r.info.weight_kg)},
                      {"History", r.info.history},
                      {"Complaint", r.info.complaint}};
  j["Anatomy"] = std::string(to_string(r.anatomy));
  j["Modality"] = std::string(to_string(r.modality));
  j["Anomaly"] = {{"Part", r.anomaly_part}, {"Symptom", r.anomaly_symptom}};
  j["Disease"] = r.disease;
  j["OrganBiomarker"] = {{"OrganObject", r.organ_biomarker.object},
                         {"OrganDim", r.organ_biomarker.dim},
                         {"OrganQuant", r.organ_biomarker.quant}};
  j["AnomalyBiomarker"] = {{"AnomalyObject", r.anomaly_biomarker.object},
                           {"AnomalyDim", r.anomaly_biomarker.dim},
                           {"AnomalyQuant", r.anomaly_biomarker.quant}};
  j["Indicator"] = {{"Name", r.indicator_name}, {"Value", r.indicator_value}};
  j["Report"] = {{"Finding", r.report_finding}, {"Impression", r.report_impression}};
  j["Treatment"] = r.treatment;
  return j.dump(indent);
}

std::vector<QAPair> parse_qa_text(const std::string& text,
                                  const std::string& record_id) {
  auto extract = [&](char kind, int k) -> std::string {
    const std::string open = std::string("<") + kind + std::to_string(k) + ">";
    const std::string close = std::string("</") + kind + std::to_string(k) + ">";
    const size_t first = text.find(open);
    if (first == std::string::npos) throw MissingTag(k);
    if (text.find(open, first + open.size()) != std::string::npos)
      throw DuplicateTag(k);
    const size_t end = text.find(close, first + open.size());
    if (end == std::string::npos) throw UnbalancedTag(k);
    std::string body = text.substr(first + open.size(), end - first - open.size());
    const auto a = body.find_first_not_of(" \t\r\n");
    const auto b = body.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? std::string() : body.substr(a, b - a + 1);
  };
  std::vector<QAPair> pairs;
  pairs.reserve(11);
  for (int k = 1; k <= 11; ++k) {
    QAPair p;
    p.task = *task_from_number(k);
    p.question = extract('Q', k);
    p.answer = extract('A', k);
    p.record_id = record_id;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

bool question_leaks_scope(const std::string& question) {
  std::string lower;
  lower.reserve(question.size());
  for (char c : question)
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const char* phrase : {"head and neck", "abdomen and pelvis", "x-ray", "xray"})
    if (lower.find(phrase) != std::string::npos) return true;
  // Single-word names are matched as whole tokens so "direct" does not hit "ct".
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : lower) {
    if (std::isalnum(static_cast<unsigned char>(c))) cur.push_back(c);
    else if (!cur.empty()) { tokens.push_back(cur); cur.clear(); }
  }
  if (!cur.empty()) tokens.push_back(cur);
  for (const auto& t : tokens)
    for (const char* word : {"chest", "breast", "limb", "spine", "ct", "mri",
                             "ultrasound", "mammography", "mammogram", "radiograph"})
      if (t == word) return true;
  return false;
}

std::string render_generation_prompt(GenerationKind kind,
                                     const RecordPromptContext& ctx) {
  if (kind != GenerationKind::Record)
    throw Error("UnknownKind: qa prompt needs a full patient record");
  if (ctx.anatomy.empty() || ctx.modality.empty() || ctx.disease.empty())
    throw Error("incomplete record prompt context");
  std::string text = kRecordTemplate;
  text = replace_all(text, "{ANATOMY}", ctx.anatomy);
  text = replace_all(text, "{MODALITY}", ctx.modality);
  text = replace_all(text, "{DISEASE}", ctx.disease);
  return text;
}

std::string render_generation_prompt(GenerationKind kind, const PatientRecord& record) {
  if (kind == GenerationKind::Record)
    return render_generation_prompt(
        kind, RecordPromptContext{std::string(to_string(record.anatomy)),
                                  std::string(to_string(record.modality)),
                                  record.disease});
  if (kind != GenerationKind::QA) throw Error("UnknownKind");
  return replace_all(kQaTemplate, "{Patient Record}",
                     serialize_patient_record(record));
}

std::vector<DiseaseRow> parse_disease_csv(const std::string& text) {
  std::vector<DiseaseRow> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t c1 = line.find(',');
    const size_t c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw Error("malformed disease csv line: " + line);
    const std::string a = line.substr(0, c1);
    const std::string m = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string d = line.substr(c2 + 1);
    if (a == "anatomy") continue;  // header
    const auto anatomy = parse_anatomy(a);
    const auto modality = parse_modality(m);
    if (!anatomy || !modality) throw Error("unknown anatomy/modality in csv: " + line);
    rows.push_back({*anatomy, *modality, d});
  }
  return rows;
}

}  // namespace radeval
