#pragma once

#include <functional>

#include "radeval/backend.hpp"
#include "radeval/prompts.hpp"
#include "radeval/protocol.hpp"

namespace radeval {

enum class IOErrorKind : uint8_t {
  UnknownTool,
  MissingInput,
  CompulsoryOmitted,
  ToolMisuse,
  ProtocolParse,
};

std::string_view to_string(IOErrorKind k);
std::optional<IOErrorKind> parse_io_error_kind(std::string_view text);

struct ExecSuccess {
  std::vector<InfoKey> outputs;
  double score = 0.0;
};

struct ExecError {
  IOErrorKind kind = IOErrorKind::UnknownTool;
  std::string detail;
};

using ExecResult = std::variant<ExecSuccess, ExecError>;

/// Simulated tool execution. Validation order: unknown tool, listed inputs
/// present, compulsory covered, applicability; then every output key is set
/// from the record's ground truth with the card's performance score. Errors
/// never mutate the bank.
ExecResult execute_call(const CallMessage& msg, const ToolSet& toolset,
                        MemoryBank& bank, const PatientRecord& record);

// ---------------------------------------------------------------------------
// Transcript
// ---------------------------------------------------------------------------

enum class StepKind : uint8_t { Executed, IOError, DeniedByAgent };

struct StepRecord {
  std::string request;
  std::string response;
  ProtocolMessage parsed = ParseFailure{};
  StepKind kind = StepKind::IOError;
  IOErrorKind io_kind = IOErrorKind::ProtocolParse;  // when kind == IOError
  std::string tool_name;                             // when kind == Executed
  ToolCategory category = ToolCategory::AnatomyClassifier;
  Variant variant = Variant::None;
  std::vector<InfoKey> outputs;
  double score = 0.0;
  MemoryBank bank_after;
};

enum class TerminalKind : uint8_t {
  Concluded,
  NoCallStop,
  IOAbort,
  IterationCap,
  BackendError,
};

std::string_view to_string(TerminalKind k);

struct TerminalState {
  TerminalKind kind = TerminalKind::IterationCap;
  std::string answer;                    // Concluded
  std::optional<NoCallMessage> nocall;   // NoCallStop
  IOErrorKind io_kind = IOErrorKind::UnknownTool;  // IOAbort
  std::string error;                     // BackendError
};

struct BuildAttempt {
  std::string request_text;
  bool succeeded = false;
  std::string injected_tool;  // name, when succeeded
};

struct Transcript {
  QAPair qa;
  Condition condition = Condition::Baseline;
  uint64_t toolset_seed = 0;
  std::string backend_label;
  std::string strategy_label;

  Plan plan;
  bool plan_degenerate = false;

  ChatHistory turns;              // full conversation, prompts and responses
  std::vector<int> turn_tokens;   // chars/4 heuristic, one per turn

  std::vector<StepRecord> steps;
  std::vector<std::pair<std::string, ToolCategory>> executed_chain;
  std::vector<Variant> executed_variants;
  TerminalState terminal;
  std::optional<BuildAttempt> build;

  int total_tokens() const;
  std::vector<ToolCategory> executed_categories() const;
};

/// chars/4 token heuristic (approximate; tokenizers are backend-specific).
int approx_tokens(const std::string& text);

// ---------------------------------------------------------------------------
// Session loop
// ---------------------------------------------------------------------------

struct SessionLimits {
  int max_steps = 0;  // 0 = 2 * linearized chain length + 5
  bool abort_on_io_error = false;
};

struct SessionOptions {
  const PromptSet* prompts = nullptr;  // default: built-in v0-base
  SessionLimits limits;
  /// Applied to each rendered stage prompt (strategy overlays).
  std::function<std::string(Stage, const std::string&)> prompt_overlay;
  /// When set, responses failing this gate trigger one re-prompt.
  std::function<bool(const std::string&)> response_gate;
  std::string response_gate_reprompt;
  /// Automated tool building hook: NoCall in, request text and maybe a card out.
  struct BuildHookResult {
    std::string request_text;
    std::optional<ToolCard> card;
  };
  std::function<BuildHookResult(const NoCallMessage&)> builder;

  // Multi-agent support: a system prompt, an externally produced plan (skips
  // the decompose turn), and a separate concluder.
  std::optional<std::string> system_prompt;
  std::optional<Plan> external_plan;
  Backend* conclude_backend = nullptr;
  std::function<std::string(const MemoryBank&, const QAPair&)> conclude_prompt_builder;
};

/// Runs the three-phase protocol: decompose once, the select-call-update loop,
/// then conclude. Backend failures land in the terminal state, never throw.
Transcript run_session(Backend& backend, const QAPair& qa,
                       const PatientRecord& record, const ToolSet& toolset,
                       const SessionOptions& options = {});

/// The "{Patient Record}" block of the decomposition prompt: the demographics
/// dictionary plus the image placeholder.
std::string render_record_block(const PatientRecord& record);

}  // namespace radeval
