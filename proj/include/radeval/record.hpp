#pragma once

#include <string>
#include <vector>

#include "radeval/tasks.hpp"
#include "radeval/types.hpp"

namespace radeval {

struct PatientInfo {
  int age = 0;         // years
  std::string sex;     // "Male" / "Female"
  int height_cm = 0;
  int weight_kg = 0;
  std::string history;
  std::string complaint;

  bool operator==(const PatientInfo&) const = default;
};

struct Biomarker {
  std::string object;  // organ or anomaly serving as biomarker
  std::string dim;     // one of the 8 dimension names
  std::string quant;   // free text with units

  bool operator==(const Biomarker&) const = default;
};

/// One radiology-centric synthetic case.
struct PatientRecord {
  PatientInfo info;
  Anatomy anatomy = Anatomy::Chest;
  Modality modality = Modality::XRay;
  std::string anomaly_part;
  std::string anomaly_symptom;
  std::string disease;
  Biomarker organ_biomarker;
  Biomarker anomaly_biomarker;
  std::string indicator_name;
  std::string indicator_value;
  std::string report_finding;
  std::string report_impression;
  std::string treatment;

  bool operator==(const PatientRecord&) const = default;

  /// Stable identifier derived from (anatomy, modality, disease).
  std::string record_id() const;

  /// Ground-truth bank value for an information key ("Head and Neck",
  /// "PLACEHOLDER_$OrganMask$", ...).
  std::string ground_truth(InfoKey key) const;

  /// The capability label a tool of this category must support to serve this
  /// record (diseases for diagnosers, dims for quantifiers, ...). Empty for
  /// categories without a label domain.
  std::optional<std::string> needed_label(ToolCategory category,
                                          Variant variant) const;

  /// Compact one-line demographics text embedded into session prompts.
  std::string info_text() const;
};

/// The 8 biomarker dimension names accepted by the record format.
const std::vector<std::string>& biomarker_dims();

struct MissingField : Error {
  explicit MissingField(const std::string& name)
      : Error("MissingField: " + name), field(name) {}
  std::string field;
};

struct IllegalCombination : Error {
  IllegalCombination(const std::string& anatomy, const std::string& modality)
      : Error("IllegalCombination: " + anatomy + " / " + modality) {}
};

struct MalformedNumeric : Error {
  explicit MalformedNumeric(const std::string& name)
      : Error("MalformedNumeric: " + name), field(name) {}
  std::string field;
};

/// Parses one record in the released corpus format (JSON object with the
/// supplementary example's key names). Enforces all record invariants.
PatientRecord parse_patient_record(const std::string& text);

/// Inverse of parse_patient_record; parse(serialize(r)) == r.
std::string serialize_patient_record(const PatientRecord& record, int indent = 4);

// ---------------------------------------------------------------------------
// QA pairs
// ---------------------------------------------------------------------------

struct QAPair {
  TaskType task = TaskType::OrganSegmentation;
  std::string question;
  std::string answer;  // may embed placeholders such as "[Organ Mask]"
  std::string record_id;
};

struct MissingTag : Error {
  explicit MissingTag(int k) : Error("MissingTag: " + std::to_string(k)), tag(k) {}
  int tag;
};
struct UnbalancedTag : Error {
  explicit UnbalancedTag(int k) : Error("UnbalancedTag: " + std::to_string(k)), tag(k) {}
  int tag;
};
struct DuplicateTag : Error {
  explicit DuplicateTag(int k) : Error("DuplicateTag: " + std::to_string(k)), tag(k) {}
  int tag;
};

/// Parses a raw <Qk>/<Ak> tagged block into 11 pairs in task order.
std::vector<QAPair> parse_qa_text(const std::string& text,
                                  const std::string& record_id = "");

/// Best-effort anatomy/modality leakage check on a question text.
bool question_leaks_scope(const std::string& question);

// ---------------------------------------------------------------------------
// Generation prompt emitters
// ---------------------------------------------------------------------------

enum class GenerationKind { Record, QA };

struct RecordPromptContext {
  std::string anatomy;
  std::string modality;
  std::string disease;
};

/// Byte-exact instantiation of the supplementary generation templates.
std::string render_generation_prompt(GenerationKind kind,
                                     const RecordPromptContext& ctx);
std::string render_generation_prompt(GenerationKind kind, const PatientRecord& record);

// ---------------------------------------------------------------------------
// Disease list
// ---------------------------------------------------------------------------

struct DiseaseRow {
  Anatomy anatomy;
  Modality modality;
  std::string disease;
};

/// One row per anatomy-modality-disease; header line "anatomy,modality,disease".
std::vector<DiseaseRow> parse_disease_csv(const std::string& text);

}  // namespace radeval
