#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "radeval/bank.hpp"
#include "radeval/record.hpp"
#include "radeval/toolset.hpp"

namespace radeval {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};
using ChatHistory = std::vector<ChatMessage>;

/// Read-only session view passed alongside the history. The live HTTP backend
/// ignores it; scripted cores replay deterministic behavior from it.
struct SessionView {
  const QAPair* qa = nullptr;
  const PatientRecord* record = nullptr;
  const ToolSet* toolset = nullptr;  // live set; builder injections visible
  const MemoryBank* bank = nullptr;
  int executed_steps = 0;
  int step_prompts_seen = 0;
};

struct BackendError : Error {
  using Error::Error;
};

/// The chat contract: ordered message history in, text out.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string identity() const = 0;
  virtual bool deterministic() const = 0;
  virtual std::string send(const ChatHistory& history, const SessionView& view) = 0;
};

/// Chat-completion over HTTP with message-role history (OpenAI-style wire
/// format). The API secret is read from the named environment variable.
struct HttpBackendConfig {
  std::string endpoint;  // e.g. "https://api.example.com"
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env;
  int retries = 1;
  int timeout_seconds = 60;
  int max_parallel = 1;
};

std::unique_ptr<Backend> make_http_backend(const HttpBackendConfig& config,
                                           std::string identity);

// ---------------------------------------------------------------------------
// Scripted deterministic cores (metric fixtures)
// ---------------------------------------------------------------------------

/// Replays the ground-truth chain with correct inputs; on a blocked step it
/// emits the grounded NoCall derived from the tool set itself.
std::unique_ptr<Backend> make_oracle_backend();

/// Oracle that substitutes the last `k` chain steps with applicable
/// wrong-category tools (plan and execution both deviate).
std::unique_ptr<Backend> make_deviant_backend(int k);

/// Oracle that omits a compulsory input at step attempt `j`, then recovers.
std::unique_ptr<Backend> make_clumsy_backend(int j);

struct RefuserFields {
  std::optional<ToolCategory> category;
  std::optional<Anatomy> anatomy;
  std::optional<Modality> modality;
  std::optional<std::string> ability;
};

/// Immediate NoCall with configurable fields (defaults: CategoryMissing on
/// the task's terminal category, Universal scope).
std::unique_ptr<Backend> make_refuser_backend(RefuserFields fields = {});

/// Oracle whose NoCall fields are deliberately overridden; used for
/// unsolvability-grounding and wrong-request builder fixtures.
std::unique_ptr<Backend> make_misgrounded_backend(RefuserFields overrides);

/// Echoes the request text back (parser fuzzing).
std::unique_ptr<Backend> make_echo_backend();

/// Scripted factory by spec string: "scripted:oracle", "scripted:deviant:1",
/// "scripted:clumsy:2", "scripted:refuser", "scripted:misgrounded",
/// "scripted:echo".
std::unique_ptr<Backend> make_scripted_backend(const std::string& spec);

}  // namespace radeval
