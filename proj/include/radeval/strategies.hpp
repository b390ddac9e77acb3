#pragma once

#include "radeval/session.hpp"

namespace radeval {

enum class BuilderPolicy : uint8_t { Off, ExactMatch };

std::string_view to_string(BuilderPolicy p);
std::optional<BuilderPolicy> parse_builder_policy(std::string_view text);

struct StrategyFlags {
  bool self_reflection = false;
  bool few_shot = false;
  bool multi_agent = false;
  bool auto_build = false;
};

struct StrategyConfig {
  std::string name = "base";
  StrategyFlags flags;
  std::string prompt_set = "v0-base";  // multi_agent uses a refined set
  BuilderPolicy builder_policy = BuilderPolicy::Off;
};

/// Applies the prompt overlays to a step-stage prompt: few-shot examples
/// first, then the reflection requirement. All-false flags return the base
/// text unchanged.
std::string augment_prompt(const std::string& base, const StrategyFlags& flags);

/// True iff a well-formed <Reflection> block with Candidates, Reasoning and
/// Constraints children precedes the protocol block.
bool validate_reflection(const std::string& response_text);

// ---------------------------------------------------------------------------
// Automated tool building
// ---------------------------------------------------------------------------

struct BuildRequest {
  ToolCategory category = ToolCategory::OrganSegmentor;
  std::optional<Anatomy> anatomy;
  std::optional<Modality> modality;
  std::string capability;  // copied verbatim from the NoCall purpose
};

/// One-sentence natural-language request ("I need a model to calculate the
/// biomarker size in Chest X-ray").
std::string render_build_request(const BuildRequest& request);
BuildRequest emit_build_request(const NoCallMessage& nocall);

/// ExactMatch: succeeds iff the request's category, anatomy, modality and
/// capability all match the generator's gap (capability by case-insensitive
/// containment of the missing label). Success yields an applicable card with
/// performance fixed at 0.8.
std::optional<ToolCard> simulated_builder(const BuildRequest& request,
                                          const GroundTruthGap& gap,
                                          BuilderPolicy policy);

// ---------------------------------------------------------------------------
// Session wiring
// ---------------------------------------------------------------------------

struct StrategySession {
  Backend* agent = nullptr;      // single-agent core
  Backend* planner = nullptr;    // multi-agent slots (may alias agent)
  Backend* executor = nullptr;
  Backend* concluder = nullptr;
};

struct PlannerParseError : Error {
  using Error::Error;
};

/// Runs one cell under a strategy: applies overlays, wires the simulated
/// builder against the generator's gap, and dispatches to the single- or
/// multi-agent loop.
Transcript run_with_strategy(const StrategySession& session, const QAPair& qa,
                             const PatientRecord& record, const ToolSet& toolset,
                             const std::optional<GroundTruthGap>& gap,
                             const StrategyConfig& config,
                             const PromptRegistry& registry,
                             SessionLimits limits = {});

/// Three-role collaboration: the planner's structured plan is injected into
/// the executor's system prompt; the concluder sees the final bank.
Transcript run_multi_agent(Backend& planner, Backend& executor, Backend& concluder,
                           const QAPair& qa, const PatientRecord& record,
                           const ToolSet& toolset, const PromptSet& prompts,
                           SessionLimits limits = {},
                           SessionOptions base_options = {});

// ---------------------------------------------------------------------------
// Prompt back-propagation
// ---------------------------------------------------------------------------

/// Renders a critique request from failure excerpts, asks the backend for a
/// revised template per stage, and stores the result as a new registry
/// version (never auto-activated).
PromptSet critique_prompt_round(Backend& backend, const PromptSet& current,
                                const std::vector<Transcript>& sample_transcripts,
                                PromptRegistry& registry);

}  // namespace radeval
