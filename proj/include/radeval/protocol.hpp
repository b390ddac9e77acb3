#pragma once

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "radeval/types.hpp"

namespace radeval {

struct CallMessage {
  std::string purpose;
  std::string tool_name;  // "TOOL3"
  std::vector<InfoKey> inputs;
  bool terminal = false;  // true for <EndCall>
};

struct NoCallMessage {
  std::string purpose;
  ToolCategory category = ToolCategory::OrganSegmentor;
  std::optional<Anatomy> anatomy;    // unset = Universal
  std::optional<Modality> modality;  // unset = Universal
  std::string ability;  // CategoryMissing | SpecificToolMissing | InsufficientCapability
};

struct ParseFailure {
  std::string reason;
};

using ProtocolMessage = std::variant<CallMessage, NoCallMessage, ParseFailure>;

/// Locates exactly one <Call>/<EndCall>/<NoCall> block in a model response,
/// ignoring <Reflection> blocks and surrounding prose. Failures come back as
/// the ParseFailure variant, never as exceptions.
ProtocolMessage parse_protocol(const std::string& text);

// ---------------------------------------------------------------------------
// Decomposition plans
// ---------------------------------------------------------------------------

struct PlanUnit {
  ToolCategory category;
  Variant variant = Variant::None;
};

struct Plan {
  std::set<InfoKey> known_info;  // never contains $Report$ or $Treatment$
  std::vector<PlanUnit> tool_chain;
  std::string raw_text;

  std::vector<ToolCategory> chain_categories() const;
};

struct NoChainFound : Error {
  using Error::Error;
};
struct UnknownCategoryToken : Error {
  explicit UnknownCategoryToken(const std::string& t)
      : Error("UnknownCategory: " + t), token(t) {}
  std::string token;
};
struct MalformedKnownInfo : Error {
  using Error::Error;
};

/// Extracts the bracketed known-info keys and the arrow-separated starred
/// tool list from a decomposition response. Tolerant of surrounding prose and
/// of the refined planner's JSON wrapper.
Plan parse_decomposition(const std::string& text);

}  // namespace radeval
