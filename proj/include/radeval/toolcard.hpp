#pragma once

#include <map>
#include <string>
#include <vector>

#include "radeval/types.hpp"

namespace radeval {

/// Applicability scope. Unset fields mean "Universal".
struct ToolScope {
  std::optional<Anatomy> anatomy;
  std::optional<Modality> modality;

  bool universal() const { return !anatomy && !modality; }
  bool operator==(const ToolScope&) const = default;
};

struct Performance {
  double lower = 0.0;
  double upper = 0.0;
  double step = 0.0;

  bool operator==(const Performance&) const = default;
};

/// Which label domain a card's capability list restricts.
enum class LabelKind : uint8_t { None, Organs, Anomalies, Diseases, Biomarkers, Indicators };

std::string_view to_string(LabelKind k);
LabelKind label_kind_for(ToolCategory c);

/// An eight-field conceptual tool description. A card is a simulation
/// descriptor only; no model runs behind it.
struct ToolCard {
  std::string name;  // "TOOL17"
  ToolCategory category = ToolCategory::AnatomyClassifier;
  Variant variant = Variant::None;  // organ/anomaly flavor for BQ and IE
  std::string property;
  std::string ability;
  std::vector<InfoKey> compulsory_input;
  std::vector<InfoKey> optional_input;
  std::vector<InfoKey> output;
  Performance performance;
  ToolScope scope;
  /// Finite capability list (empty = unrestricted). Domain per label_kind_for().
  std::vector<std::string> capability_labels;

  bool operator==(const ToolCard&) const = default;
};

struct CategorySignature {
  std::vector<InfoKey> compulsory;
  std::vector<InfoKey> optional;
  std::vector<InfoKey> output;
};

/// Fixed I/O table per category. Universal-scoped OS/AD/ID/RG require
/// $Anatomy$ and $Modality$ as compulsory inputs; scope-specific ones only
/// $Image$. BQ/IE signatures depend on the organ/anomaly variant.
CategorySignature category_signature(ToolCategory category, const ToolScope& scope,
                                     Variant variant = Variant::None);

/// Default performance range per category and scope specificity.
Performance default_performance(ToolCategory category, bool scope_specific);

/// Canonical ability/property text for a generated card.
std::string ability_text(ToolCategory category, const ToolScope& scope,
                         Variant variant,
                         const std::vector<std::string>& labels = {});
std::string property_text(ToolCategory category, const ToolScope& scope,
                          Variant variant);

struct MakeCardOptions {
  bool include_optionals = true;
  std::vector<std::string> labels;
};

/// Builds a fully populated card from the fixed tables.
ToolCard make_tool_card(std::string name, ToolCategory category, ToolScope scope,
                        Variant variant = Variant::None,
                        const MakeCardOptions& opts = {});

/// score = min(upper, lower + step * provided_optional_count)
double performance_score(const ToolCard& card, int provided_optional_count);

enum class Applicability { Applicable, WrongScope, InsufficientCapability };

/// Scope and capability check against a resolved (anatomy, modality) and an
/// optional needed capability label.
Applicability applicability(const ToolCard& card, Anatomy anatomy, Modality modality,
                            const std::optional<std::string>& need = std::nullopt);

/// Minimal-digit score rendering (0.8, not 0.80).
std::string format_score(double v);

/// Canonical multi-line textual rendering ("=== Tool Description for ... ===").
std::string render_tool_card(const ToolCard& card);

/// Inverse of render_tool_card. Throws Error on malformed blocks.
ToolCard parse_tool_card(const std::string& text);

/// JSON-style serialization mirroring the released tool-card fields
/// (lower_bound/upper_bound/step/Anatomy/Modality/label lists/type).
std::string tool_card_to_json(const ToolCard& card, int indent = 4);
ToolCard tool_card_from_json(const std::string& json_text);

/// Enforces the card invariants (bound ordering, step coverage, disjoint IO
/// lists, name shape). Throws Error with a description on violation.
void validate_tool_card(const ToolCard& card);

}  // namespace radeval
