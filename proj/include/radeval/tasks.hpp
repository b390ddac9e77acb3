#pragma once

#include <vector>

#include "radeval/types.hpp"

namespace radeval {

/// The 11 radiology tasks, numbered 1..11 in QA order.
enum class TaskType : uint8_t {
  OrganSegmentation = 1,
  AnomalyDetection = 2,
  StandardDiagnosis = 3,
  JointGrounding = 4,
  DiagnosisWithGrounding = 5,
  OrganBiomarker = 6,
  AnomalyBiomarker = 7,
  ReportGeneration = 8,
  BiomarkerReport = 9,
  BiomarkerIndicatorReport = 10,
  TreatmentPlanning = 11,
};

inline constexpr std::array<TaskType, 11> kAllTasks = {
    TaskType::OrganSegmentation,   TaskType::AnomalyDetection,
    TaskType::StandardDiagnosis,   TaskType::JointGrounding,
    TaskType::DiagnosisWithGrounding, TaskType::OrganBiomarker,
    TaskType::AnomalyBiomarker,    TaskType::ReportGeneration,
    TaskType::BiomarkerReport,     TaskType::BiomarkerIndicatorReport,
    TaskType::TreatmentPlanning,
};

std::string_view task_name(TaskType t);
std::optional<TaskType> task_from_number(int n);
inline int task_number(TaskType t) { return static_cast<int>(t); }

enum class Complexity { Simple, Moderate, Complex };
std::string_view to_string(Complexity c);

/// One element of a chain step: a category plus the organ/anomaly flavor it
/// must be served by. Only Biomarker Quantifier units carry a flavor.
struct ChainUnit {
  ToolCategory category;
  Variant variant = Variant::None;

  bool operator==(const ChainUnit&) const = default;
};

/// A chain step is a parallel group of 1-2 units executable in either order.
using ChainStep = std::vector<ChainUnit>;

struct TaskSpec {
  TaskType task;
  std::vector<ChainStep> gt_chain;  // always starts [AC], [MC]
  ToolCategory terminal_category;
  InfoKey milestone_key;
  Complexity complexity;

  /// Length of any linearization (all linearizations have equal length).
  int linearized_length() const;

  /// Units of the canonical linearization (groups in listed order).
  std::vector<ChainUnit> canonical_linearization() const;

  /// Every linearization, as unit sequences. Duplicate category sequences
  /// produced by same-category groups are kept; callers dedupe if needed.
  std::vector<std::vector<ChainUnit>> linearizations() const;

  /// Category sequences of all linearizations, deduplicated.
  std::vector<std::vector<ToolCategory>> category_linearizations() const;
};

/// Fixed ground-truth table transcribed from the supplementary chain listing.
const TaskSpec& ground_truth_spec(TaskType task);

/// Complexity from linearized chain length: <4 Simple, 4-6 Moderate, >=6 Complex.
Complexity complexity_for_length(int linearized_length);

std::vector<ToolCategory> categories_of(const std::vector<ChainUnit>& units);

}  // namespace radeval
