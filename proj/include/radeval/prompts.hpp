#pragma once

#include <map>
#include <string>
#include <vector>

#include "radeval/types.hpp"

namespace radeval {

enum class Stage { Decompose, Step, Conclude };

std::string_view to_string(Stage s);

/// Single-agent sets carry the three stage templates; multi-agent sets the
/// three role system prompts.
struct PromptSet {
  std::string name;
  bool multi_agent = false;
  std::string decompose;  // planner system prompt when multi_agent
  std::string step;       // executor system prompt when multi_agent
  std::string conclude;   // concluder system prompt when multi_agent

  const std::string& stage_template(Stage s) const;
};

struct StageContext {
  std::string record_info;   // rendered $Information$ block
  std::string query;
  std::string toolset_block; // embedded into the first step turn only
  std::string bank_values;   // fills the literal {value_dict} slot
};

struct UnknownStage : Error {
  using Error::Error;
};

/// Byte-exact instantiation of a stage template with the context substituted
/// at the marked slots.
std::string render_stage_prompt(const PromptSet& prompts, Stage stage,
                                const StageContext& ctx);

/// Named, versioned prompt sets. "v0-base" and "v1-refined" are always
/// present; further versions can be loaded from and saved to plain-text
/// template files with a manifest.
class PromptRegistry {
 public:
  PromptRegistry();

  const PromptSet& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  void add(PromptSet set);

  /// Reads versions from <dir>/manifest.json plus the template files it names.
  void load_dir(const std::string& dir);
  /// Writes one version under <dir>/<name>/ and updates the manifest.
  void save_version(const std::string& dir, const PromptSet& set);

 private:
  std::map<std::string, PromptSet> sets_;
};

/// "v0-base" -> "v0-r1" -> "v0-r2" ...
std::string next_version_name(const std::string& current);

// Built-in template text (exposed for the strategy overlays and tests).
const std::string& base_decompose_template();
const std::string& base_step_template();
const std::string& base_conclude_template();
const std::string& refined_planner_template();
const std::string& refined_executor_template();
const std::string& refined_concluder_template();

/// Overlay snippets taken from the refined executor prompt.
const std::string& reflection_overlay();
const std::string& few_shot_overlay();

}  // namespace radeval
