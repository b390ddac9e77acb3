#include "radeval/types.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

namespace radeval {

std::string_view to_string(Anatomy a) {
  switch (a) {
    case Anatomy::HeadAndNeck: return "Head and Neck";
    case Anatomy::Chest: return "Chest";
    case Anatomy::Breast: return "Breast";
    case Anatomy::AbdomenAndPelvis: return "Abdomen and Pelvis";
    case Anatomy::Limb: return "Limb";
    case Anatomy::Spine: return "Spine";
  }
  return "";
}

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::XRay: return "X-ray";
    case Modality::CT: return "CT";
    case Modality::MRI: return "MRI";
    case Modality::Ultrasound: return "Ultrasound";
    case Modality::Mammography: return "Mammography";
  }
  return "";
}

namespace {

std::string lowered(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool last_space = true;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!last_space) out.push_back(' ');
      last_space = true;
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      last_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

std::optional<Anatomy> parse_anatomy(std::string_view text) {
  const std::string t = lowered(text);
  for (Anatomy a : kAllAnatomies)
    if (t == lowered(to_string(a))) return a;
  return std::nullopt;
}

std::optional<Modality> parse_modality(std::string_view text) {
  const std::string t = lowered(text);
  for (Modality m : kAllModalities)
    if (t == lowered(to_string(m))) return m;
  if (t == "xray" || t == "x ray") return Modality::XRay;
  return std::nullopt;
}

const std::vector<std::pair<Anatomy, Modality>>& allowed_combinations() {
  static const std::vector<std::pair<Anatomy, Modality>> combos = [] {
    std::vector<std::pair<Anatomy, Modality>> v;
    const std::array<Modality, 4> common = {Modality::XRay, Modality::CT,
                                            Modality::MRI, Modality::Ultrasound};
    for (Anatomy a : {Anatomy::HeadAndNeck, Anatomy::Chest, Anatomy::Limb,
                      Anatomy::AbdomenAndPelvis})
      for (Modality m : common) v.emplace_back(a, m);
    for (Modality m : {Modality::XRay, Modality::CT, Modality::MRI})
      v.emplace_back(Anatomy::Spine, m);
    for (Modality m : {Modality::Mammography, Modality::MRI, Modality::Ultrasound})
      v.emplace_back(Anatomy::Breast, m);
    return v;
  }();
  return combos;
}

bool combination_allowed(Anatomy a, Modality m) {
  const auto& combos = allowed_combinations();
  return std::find(combos.begin(), combos.end(), std::make_pair(a, m)) !=
         combos.end();
}

std::string_view to_string(InfoKey k) {
  switch (k) {
    case InfoKey::Image: return "$Image$";
    case InfoKey::Information: return "$Information$";
    case InfoKey::Anatomy: return "$Anatomy$";
    case InfoKey::Modality: return "$Modality$";
    case InfoKey::Disease: return "$Disease$";
    case InfoKey::OrganObject: return "$OrganObject$";
    case InfoKey::OrganDim: return "$OrganDim$";
    case InfoKey::OrganQuant: return "$OrganQuant$";
    case InfoKey::AnomalyObject: return "$AnomalyObject$";
    case InfoKey::AnomalyDim: return "$AnomalyDim$";
    case InfoKey::AnomalyQuant: return "$AnomalyQuant$";
    case InfoKey::IndicatorName: return "$IndicatorName$";
    case InfoKey::IndicatorValue: return "$IndicatorValue$";
    case InfoKey::Report: return "$Report$";
    case InfoKey::Treatment: return "$Treatment$";
    case InfoKey::OrganMask: return "$OrganMask$";
    case InfoKey::AnomalyMask: return "$AnomalyMask$";
  }
  return "";
}

std::optional<InfoKey> parse_info_key(std::string_view text) {
  for (int i = 0; i < kInfoKeyCount; ++i) {
    const auto k = static_cast<InfoKey>(i);
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string_view to_string(ToolCategory c) {
  switch (c) {
    case ToolCategory::AnatomyClassifier: return "Anatomy Classifier";
    case ToolCategory::ModalityClassifier: return "Modality Classifier";
    case ToolCategory::OrganSegmentor: return "Organ Segmentor";
    case ToolCategory::AnomalyDetector: return "Anomaly Detector";
    case ToolCategory::ImagingDiagnoser: return "Imaging Diagnoser";
    case ToolCategory::GroundedDiagnoser: return "Grounded Diagnoser";
    case ToolCategory::BiomarkerQuantifier: return "Biomarker Quantifier";
    case ToolCategory::IndicatorEvaluator: return "Indicator Evaluator";
    case ToolCategory::ReportGenerator: return "Report Generator";
    case ToolCategory::TreatmentPlanner: return "Treatment Planner";
  }
  return "";
}

std::string_view abbrev(ToolCategory c) {
  switch (c) {
    case ToolCategory::AnatomyClassifier: return "AC";
    case ToolCategory::ModalityClassifier: return "MC";
    case ToolCategory::OrganSegmentor: return "OS";
    case ToolCategory::AnomalyDetector: return "AD";
    case ToolCategory::ImagingDiagnoser: return "ID";
    case ToolCategory::GroundedDiagnoser: return "GD";
    case ToolCategory::BiomarkerQuantifier: return "BQ";
    case ToolCategory::IndicatorEvaluator: return "IE";
    case ToolCategory::ReportGenerator: return "RG";
    case ToolCategory::TreatmentPlanner: return "TP";
  }
  return "";
}

std::optional<ResolvedCategory> resolve_category(std::string_view alias) {
  // Every category string appearing in the supplementary prompts, the TOOLKIT
  // listing, the task-chain prose and the case studies resolves here.
  static const std::unordered_map<std::string, ResolvedCategory> table = [] {
    std::unordered_map<std::string, ResolvedCategory> t;
    auto add = [&](std::string_view name, ToolCategory c,
                   Variant v = Variant::None) {
      t.emplace(lowered(name), ResolvedCategory{c, v});
    };
    using TC = ToolCategory;
    add("Anatomy Classifier", TC::AnatomyClassifier);
    add("Anatomy Classification Tool", TC::AnatomyClassifier);
    add("Anatomy Classification", TC::AnatomyClassifier);
    add("AC", TC::AnatomyClassifier);
    add("Modality Classifier", TC::ModalityClassifier);
    add("Modality Classification Tool", TC::ModalityClassifier);
    add("Modality Classification", TC::ModalityClassifier);
    add("MC", TC::ModalityClassifier);
    add("Organ Segmentor", TC::OrganSegmentor);
    add("Organ Segmentation Tool", TC::OrganSegmentor);
    add("Organ Segmentation Model", TC::OrganSegmentor);
    add("Organ Segmentation", TC::OrganSegmentor);
    add("OS", TC::OrganSegmentor);
    add("Anomaly Detector", TC::AnomalyDetector);
    add("Anomaly Detection Tool", TC::AnomalyDetector);
    add("Anomaly Detection Model", TC::AnomalyDetector);
    add("Anomaly Detection", TC::AnomalyDetector);
    add("AD", TC::AnomalyDetector);
    add("Imaging Diagnoser", TC::ImagingDiagnoser);
    add("Disease Diagnoser", TC::ImagingDiagnoser);
    add("Disease Diagnosis Tool", TC::ImagingDiagnoser);
    add("Disease Diagnosis Model", TC::ImagingDiagnoser);
    add("Disease Diagnosis", TC::ImagingDiagnoser);
    add("ID", TC::ImagingDiagnoser);
    add("Grounded Diagnoser", TC::GroundedDiagnoser);
    add("Synthetic Diagnoser", TC::GroundedDiagnoser);
    add("Synthetic Dignoser", TC::GroundedDiagnoser);
    add("Disease Inference Tool", TC::GroundedDiagnoser);
    add("Disease Inference Model", TC::GroundedDiagnoser);
    add("Disease Inference", TC::GroundedDiagnoser);
    add("Disease Inferencer", TC::GroundedDiagnoser);
    add("GD", TC::GroundedDiagnoser);
    add("SD", TC::GroundedDiagnoser);
    add("Biomarker Quantifier", TC::BiomarkerQuantifier);
    add("Biomarker Quantification Tool", TC::BiomarkerQuantifier);
    add("Biomarker Quantification Model", TC::BiomarkerQuantifier);
    add("Biomarker Quantification", TC::BiomarkerQuantifier);
    add("BQ", TC::BiomarkerQuantifier);
    add("Organ Biomarker Quantifier", TC::BiomarkerQuantifier, Variant::Organ);
    add("Organ Biomarker Quantification Tool", TC::BiomarkerQuantifier, Variant::Organ);
    add("Organ Biomarker Quantification", TC::BiomarkerQuantifier, Variant::Organ);
    add("Anomaly Biomarker Quantifier", TC::BiomarkerQuantifier, Variant::Anomaly);
    add("Anomaly Biomarker Quantification Tool", TC::BiomarkerQuantifier, Variant::Anomaly);
    add("Anomaly Biomarker Quantification", TC::BiomarkerQuantifier, Variant::Anomaly);
    add("Anomaly Quantification", TC::BiomarkerQuantifier, Variant::Anomaly);
    add("Indicator Evaluator", TC::IndicatorEvaluator);
    add("Indicator Calculator", TC::IndicatorEvaluator);
    add("Indicator Evaluation Tool", TC::IndicatorEvaluator);
    add("Indicator Evaluation Model", TC::IndicatorEvaluator);
    add("Indicator Evaluation", TC::IndicatorEvaluator);
    add("IE", TC::IndicatorEvaluator);
    add("IC", TC::IndicatorEvaluator);
    add("Report Generator", TC::ReportGenerator);
    add("Report Generation Tool", TC::ReportGenerator);
    add("Report Generation Model", TC::ReportGenerator);
    add("Report Generation", TC::ReportGenerator);
    add("RG", TC::ReportGenerator);
    add("Treatment Planner", TC::TreatmentPlanner);
    add("Treatment Recommender", TC::TreatmentPlanner);
    add("Treatment Recommendation Tool", TC::TreatmentPlanner);
    add("Treatment Recommendation Model", TC::TreatmentPlanner);
    add("Treatment Recommendation", TC::TreatmentPlanner);
    add("Treatment Planning", TC::TreatmentPlanner);
    add("TP", TC::TreatmentPlanner);
    add("TR", TC::TreatmentPlanner);
    return t;
  }();
  const auto it = table.find(lowered(alias));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string prompt_tool_name(ToolCategory c, Variant v) {
  switch (c) {
    case ToolCategory::AnatomyClassifier: return "Anatomy Classification Tool";
    case ToolCategory::ModalityClassifier: return "Modality Classification Tool";
    case ToolCategory::OrganSegmentor: return "Organ Segmentation Tool";
    case ToolCategory::AnomalyDetector: return "Anomaly Detection Tool";
    case ToolCategory::ImagingDiagnoser: return "Disease Diagnosis Tool";
    case ToolCategory::GroundedDiagnoser: return "Disease Inference Tool";
    case ToolCategory::BiomarkerQuantifier:
      if (v == Variant::Organ) return "Organ Biomarker Quantification Tool";
      if (v == Variant::Anomaly) return "Anomaly Biomarker Quantification Tool";
      return "Biomarker Quantification Tool";
    case ToolCategory::IndicatorEvaluator: return "Indicator Evaluation Tool";
    case ToolCategory::ReportGenerator: return "Report Generation Tool";
    case ToolCategory::TreatmentPlanner: return "Treatment Recommendation Tool";
  }
  return "";
}

uint64_t fnv1a64(std::string_view text, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace radeval
