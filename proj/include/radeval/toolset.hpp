#pragma once

#include <map>

#include "radeval/record.hpp"
#include "radeval/tasks.hpp"
#include "radeval/toolcard.hpp"

namespace radeval {

/// The eight tool-availability conditions.
enum class Condition : uint8_t {
  Baseline,
  RedundantRegular,
  RedundantMedium,
  RedundantHigh,
  InsufficientConfig1,
  InsufficientConfig2,
  InsufficientConfig3,
  Differentiated,
};

inline constexpr std::array<Condition, 8> kAllConditions = {
    Condition::Baseline,            Condition::RedundantRegular,
    Condition::RedundantMedium,     Condition::RedundantHigh,
    Condition::InsufficientConfig1, Condition::InsufficientConfig2,
    Condition::InsufficientConfig3, Condition::Differentiated,
};

std::string_view to_string(Condition c);
std::optional<Condition> parse_condition(std::string_view text);
bool is_insufficient(Condition c);

struct ToolSet {
  std::vector<ToolCard> cards;  // names TOOL1..TOOLn, consecutive
  Condition condition = Condition::Baseline;
  uint64_t seed = 0;
  std::string record_id;
  TaskType task = TaskType::OrganSegmentation;

  size_t size() const { return cards.size(); }
  const ToolCard* find(const std::string& name) const;
  /// Appends a card under the next consecutive TOOLn name; returns it.
  const ToolCard& append(ToolCard card);

  /// Cards usable for a chain unit on this record: category+variant match and
  /// fully applicable. Sorted by descending performance upper, then name.
  std::vector<const ToolCard*> applicable_for(const ChainUnit& unit,
                                              const PatientRecord& record) const;
};

enum class GapKind : uint8_t { CategoryMissing, SpecificToolMissing, InsufficientCapability };

std::string_view to_string(GapKind k);
std::optional<GapKind> parse_gap_kind(std::string_view text);

/// Machine-readable description of what an Insufficient condition withheld.
struct GroundTruthGap {
  ToolCategory category = ToolCategory::OrganSegmentor;
  std::optional<Anatomy> anatomy;    // unset = Universal
  std::optional<Modality> modality;  // unset = Universal
  GapKind kind = GapKind::CategoryMissing;
  std::optional<std::string> missing_label;
  /// Organ/anomaly flavor of the blocked unit (BQ/IE); lets the simulated
  /// builder inject the right variant. Not part of UGR matching.
  Variant variant = Variant::None;

  bool operator==(const GroundTruthGap&) const = default;
};

struct TaskConditionMismatch : Error {
  using Error::Error;
};

struct BuildResult {
  ToolSet toolset;
  std::optional<GroundTruthGap> gap;  // present for Insufficient conditions
};

/// Seeded, deterministic tool-set generation for one evaluation cell.
/// Size postconditions per condition: 12; 12-15; 27-34; 169; 14-17; 15-17;
/// 18; 17-18.
BuildResult build_toolset(Condition condition, uint64_t seed,
                          const PatientRecord& record, TaskType task);

/// Rows of the fixed 169-tool enumeration used by RedundantHigh.
struct HighManifestRow {
  ToolCategory category;
  std::optional<Anatomy> anatomy;
  std::optional<Modality> modality;
  Variant variant;
  bool include_optionals;
};
const std::vector<HighManifestRow>& redundant_high_manifest();

// ---------------------------------------------------------------------------
// Solvability oracle
// ---------------------------------------------------------------------------

struct SolvabilityVerdict {
  bool solvable = false;
  std::optional<std::vector<std::string>> witness_chain;
  std::optional<GroundTruthGap> blocking_gap;
};

struct SearchBudgetExceeded : Error {
  using Error::Error;
};

/// Exhaustive search over tool chains (linearized ground-truth length + 2
/// calls) from the initial bank {$Image$, $Information$}, respecting category
/// signatures, applicability and data-flow feasibility. Bounded at 1e6
/// expansions.
SolvabilityVerdict solvability_oracle(const ToolSet& toolset,
                                      const PatientRecord& record, TaskType task);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string toolset_to_json(const ToolSet& ts, int indent = 4);
ToolSet toolset_from_json(const std::string& text);

std::string gap_to_json(const GroundTruthGap& gap, int indent = 4);
GroundTruthGap gap_from_json(const std::string& text);

/// Tool-set block embedded into prompts: the JSON dictionary rendering used
/// by the released case studies ("TOOL1": { ... }, ...).
std::string render_toolset_for_prompt(const ToolSet& ts);

}  // namespace radeval
