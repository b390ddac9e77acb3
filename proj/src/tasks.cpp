#include "radeval/tasks.hpp"

#include <algorithm>

namespace radeval {

std::string_view task_name(TaskType t) {
  switch (t) {
    case TaskType::OrganSegmentation: return "Organ segmentation";
    case TaskType::AnomalyDetection: return "Anomaly detection";
    case TaskType::StandardDiagnosis: return "Standard end-to-end diagnosis";
    case TaskType::JointGrounding: return "Organ and anomaly joint grounding";
    case TaskType::DiagnosisWithGrounding: return "Diagnosis with grounding clues";
    case TaskType::OrganBiomarker: return "Organ-wise biomarker calculation";
    case TaskType::AnomalyBiomarker: return "Anomaly-wise biomarker calculation";
    case TaskType::ReportGeneration: return "Common report generation";
    case TaskType::BiomarkerReport:
      return "Report generation focusing on specific biomarkers";
    case TaskType::BiomarkerIndicatorReport:
      return "Report generation focusing on specific biomarkers and indicators";
    case TaskType::TreatmentPlanning: return "Treatment planning";
  }
  return "";
}

std::optional<TaskType> task_from_number(int n) {
  if (n < 1 || n > 11) return std::nullopt;
  return static_cast<TaskType>(n);
}

std::string_view to_string(Complexity c) {
  switch (c) {
    case Complexity::Simple: return "Simple";
    case Complexity::Moderate: return "Moderate";
    case Complexity::Complex: return "Complex";
  }
  return "";
}

Complexity complexity_for_length(int n) {
  if (n < 4) return Complexity::Simple;
  if (n < 6) return Complexity::Moderate;
  return Complexity::Complex;
}

int TaskSpec::linearized_length() const {
  int n = 0;
  for (const auto& step : gt_chain) n += static_cast<int>(step.size());
  return n;
}

std::vector<ChainUnit> TaskSpec::canonical_linearization() const {
  std::vector<ChainUnit> out;
  for (const auto& step : gt_chain)
    for (const auto& unit : step) out.push_back(unit);
  return out;
}

std::vector<std::vector<ChainUnit>> TaskSpec::linearizations() const {
  std::vector<std::vector<ChainUnit>> acc = {{}};
  for (const auto& step : gt_chain) {
    std::vector<std::vector<ChainUnit>> next;
    // Parallel groups hold at most two units; both orders are valid.
    std::vector<std::vector<ChainUnit>> orders = {step};
    if (step.size() == 2) orders.push_back({step[1], step[0]});
    for (const auto& prefix : acc)
      for (const auto& order : orders) {
        auto seq = prefix;
        seq.insert(seq.end(), order.begin(), order.end());
        next.push_back(std::move(seq));
      }
    acc = std::move(next);
  }
  return acc;
}

std::vector<std::vector<ToolCategory>> TaskSpec::category_linearizations() const {
  std::vector<std::vector<ToolCategory>> out;
  for (const auto& lin : linearizations()) {
    auto cats = categories_of(lin);
    if (std::find(out.begin(), out.end(), cats) == out.end())
      out.push_back(std::move(cats));
  }
  return out;
}

std::vector<ToolCategory> categories_of(const std::vector<ChainUnit>& units) {
  std::vector<ToolCategory> out;
  out.reserve(units.size());
  for (const auto& u : units) out.push_back(u.category);
  return out;
}

namespace {

using TC = ToolCategory;

ChainUnit u(TC c, Variant v = Variant::None) { return ChainUnit{c, v}; }

TaskSpec make_spec(TaskType task, std::vector<ChainStep> chain, TC terminal,
                   InfoKey milestone) {
  TaskSpec s;
  s.task = task;
  s.gt_chain = std::move(chain);
  s.terminal_category = terminal;
  s.milestone_key = milestone;
  s.complexity = complexity_for_length(s.linearized_length());
  return s;
}

const std::array<TaskSpec, 11>& spec_table() {
  static const std::array<TaskSpec, 11> table = {
      make_spec(TaskType::OrganSegmentation,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::OrganSegmentor)}},
                TC::OrganSegmentor, InfoKey::OrganMask),
      make_spec(TaskType::AnomalyDetection,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::AnomalyDetector)}},
                TC::AnomalyDetector, InfoKey::AnomalyMask),
      make_spec(TaskType::StandardDiagnosis,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::ImagingDiagnoser)}},
                TC::ImagingDiagnoser, InfoKey::Disease),
      make_spec(TaskType::JointGrounding,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::OrganSegmentor), u(TC::AnomalyDetector)}},
                TC::AnomalyDetector, InfoKey::OrganMask),
      make_spec(TaskType::DiagnosisWithGrounding,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::OrganSegmentor), u(TC::AnomalyDetector)},
                 {u(TC::GroundedDiagnoser)}},
                TC::GroundedDiagnoser, InfoKey::Disease),
      make_spec(TaskType::OrganBiomarker,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::OrganSegmentor)},
                 {u(TC::BiomarkerQuantifier, Variant::Organ)}},
                TC::BiomarkerQuantifier, InfoKey::OrganQuant),
      make_spec(TaskType::AnomalyBiomarker,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::AnomalyDetector)},
                 {u(TC::BiomarkerQuantifier, Variant::Anomaly)}},
                TC::BiomarkerQuantifier, InfoKey::AnomalyMask),
      make_spec(TaskType::ReportGeneration,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::AnomalyDetector)}, {u(TC::ImagingDiagnoser)},
                 {u(TC::ReportGenerator)}},
                TC::ReportGenerator, InfoKey::Disease),
      make_spec(TaskType::BiomarkerReport,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::OrganSegmentor), u(TC::AnomalyDetector)},
                 {u(TC::BiomarkerQuantifier, Variant::Organ),
                  u(TC::BiomarkerQuantifier, Variant::Anomaly)},
                 {u(TC::ReportGenerator)}},
                TC::ReportGenerator, InfoKey::Disease),
      make_spec(TaskType::BiomarkerIndicatorReport,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::OrganSegmentor), u(TC::AnomalyDetector)},
                 {u(TC::ImagingDiagnoser)},
                 {u(TC::BiomarkerQuantifier, Variant::Organ),
                  u(TC::BiomarkerQuantifier, Variant::Anomaly)},
                 {u(TC::IndicatorEvaluator)}, {u(TC::ReportGenerator)}},
                TC::ReportGenerator, InfoKey::Disease),
      make_spec(TaskType::TreatmentPlanning,
                {{u(TC::AnatomyClassifier)}, {u(TC::ModalityClassifier)},
                 {u(TC::OrganSegmentor), u(TC::AnomalyDetector)},
                 {u(TC::ImagingDiagnoser)},
                 {u(TC::BiomarkerQuantifier, Variant::Organ),
                  u(TC::BiomarkerQuantifier, Variant::Anomaly)},
                 {u(TC::IndicatorEvaluator)}, {u(TC::ReportGenerator)},
                 {u(TC::TreatmentPlanner)}},
                TC::TreatmentPlanner, InfoKey::Report),
  };
  return table;
}

}  // namespace

const TaskSpec& ground_truth_spec(TaskType task) {
  return spec_table()[static_cast<size_t>(task_number(task) - 1)];
}

}  // namespace radeval
