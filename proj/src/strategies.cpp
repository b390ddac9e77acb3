#include "radeval/strategies.hpp"

#include <algorithm>
#include <cctype>

namespace radeval {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

size_t find_tag(const std::string& text, const char* tag) {
  return text.find(std::string("<") + tag + ">");
}

}  // namespace

std::string_view to_string(BuilderPolicy p) {
  switch (p) {
    case BuilderPolicy::Off: return "Off";
    case BuilderPolicy::ExactMatch: return "ExactMatch";
  }
  return "";
}

std::optional<BuilderPolicy> parse_builder_policy(std::string_view text) {
  if (text == "Off") return BuilderPolicy::Off;
  if (text == "ExactMatch") return BuilderPolicy::ExactMatch;
  return std::nullopt;
}

std::string augment_prompt(const std::string& base, const StrategyFlags& flags) {
  std::string text = base;
  if (flags.few_shot) text += "\n\n" + few_shot_overlay();
  if (flags.self_reflection) text += "\n\n" + reflection_overlay();
  return text;
}

bool validate_reflection(const std::string& text) {
  const size_t open = find_tag(text, "Reflection");
  if (open == std::string::npos) return false;
  const size_t close = text.find("</Reflection>", open);
  if (close == std::string::npos) return false;
  const std::string body = text.substr(open, close - open);
  for (const char* child : {"Candidates", "Reasoning", "Constraints"}) {
    const size_t at = find_tag(body, child);
    if (at == std::string::npos) return false;
    if (body.find(std::string("</") + child + ">", at) == std::string::npos)
      return false;
  }
  // The reflection must precede the protocol block.
  for (const char* tag : {"Call", "EndCall", "NoCall"}) {
    const size_t at = find_tag(text, tag);
    if (at != std::string::npos && at < open) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Automated tool building
// ---------------------------------------------------------------------------

namespace {

std::string category_verb(ToolCategory c) {
  switch (c) {
    case ToolCategory::AnatomyClassifier:
    case ToolCategory::ModalityClassifier: return "classify the";
    case ToolCategory::OrganSegmentor: return "segment the";
    case ToolCategory::AnomalyDetector: return "detect the";
    case ToolCategory::ImagingDiagnoser: return "diagnose the";
    case ToolCategory::GroundedDiagnoser: return "infer the";
    case ToolCategory::BiomarkerQuantifier: return "calculate the";
    case ToolCategory::IndicatorEvaluator: return "evaluate the";
    case ToolCategory::ReportGenerator: return "generate the";
    case ToolCategory::TreatmentPlanner: return "plan the";
  }
  return "provide the";
}

}  // namespace

std::string render_build_request(const BuildRequest& request) {
  std::string text = "I need a model to " + category_verb(request.category) + " " +
                     request.capability;
  if (request.anatomy && request.modality)
    text += " in " + std::string(to_string(*request.anatomy)) + " " +
            std::string(to_string(*request.modality));
  else if (request.anatomy)
    text += " in " + std::string(to_string(*request.anatomy));
  else if (request.modality)
    text += " in " + std::string(to_string(*request.modality));
  return text;
}

BuildRequest emit_build_request(const NoCallMessage& nocall) {
  BuildRequest request;
  request.category = nocall.category;
  request.anatomy = nocall.anatomy;
  request.modality = nocall.modality;
  request.capability = nocall.purpose;
  return request;
}

std::optional<ToolCard> simulated_builder(const BuildRequest& request,
                                          const GroundTruthGap& gap,
                                          BuilderPolicy policy) {
  if (policy != BuilderPolicy::ExactMatch) return std::nullopt;
  if (request.category != gap.category) return std::nullopt;
  if (request.anatomy != gap.anatomy || request.modality != gap.modality)
    return std::nullopt;
  if (gap.missing_label &&
      lower(request.capability).find(lower(*gap.missing_label)) == std::string::npos)
    return std::nullopt;

  Variant variant = gap.variant;
  if (variant == Variant::None && (gap.category == ToolCategory::BiomarkerQuantifier ||
                                   gap.category == ToolCategory::IndicatorEvaluator))
    variant = Variant::Organ;
  const ToolScope scope{gap.anatomy, gap.modality};
  MakeCardOptions opts;
  if (gap.missing_label) opts.labels = {*gap.missing_label};
  ToolCard card = make_tool_card("TOOL0", gap.category, scope, variant, opts);
  card.performance = {0.8, 0.8, 0.0};
  return card;
}

// ---------------------------------------------------------------------------
// Session wiring
// ---------------------------------------------------------------------------

Transcript run_multi_agent(Backend& planner, Backend& executor, Backend& concluder,
                           const QAPair& qa, const PatientRecord& record,
                           const ToolSet& toolset, const PromptSet& prompts,
                           SessionLimits limits, SessionOptions base_options) {
  // The planner runs standalone; its structured plan lands in the executor's
  // system prompt. Handoff is forward-only.
  StageContext planner_ctx;
  planner_ctx.record_info = render_record_block(record);
  planner_ctx.query = "$Query$: " + qa.question;
  const std::string planner_prompt =
      render_stage_prompt(prompts, Stage::Decompose, planner_ctx);

  SessionView planner_view;
  planner_view.qa = &qa;
  planner_view.record = &record;
  planner_view.toolset = &toolset;
  MemoryBank initial_bank;
  planner_view.bank = &initial_bank;

  ChatHistory planner_history = {{"user", planner_prompt}};
  Plan plan;
  std::string plan_text;
  bool parsed = false;
  std::string parse_error;
  for (int round = 0; round < 2 && !parsed; ++round) {
    plan_text = planner.send(planner_history, planner_view);
    planner_history.push_back({"assistant", plan_text});
    try {
      plan = parse_decomposition(plan_text);
      parsed = true;
    } catch (const Error& e) {
      parse_error = e.what();
      planner_history.push_back(
          {"user", "The structured plan block was unreadable. Respond again "
                   "using exactly the required json format."});
    }
  }
  if (!parsed)
    throw PlannerParseError("planner output unreadable after one retry: " +
                            parse_error);

  std::string executor_system = prompts.step;
  auto fill = [&](const std::string& slot, const std::string& value) {
    size_t pos = 0;
    while ((pos = executor_system.find(slot, pos)) != std::string::npos) {
      executor_system.replace(pos, slot.size(), value);
      pos += value.size();
    }
  };
  fill("{query}", qa.question);
  fill("{decomposition_json}", plan_text);
  fill("{toolset_description}", render_toolset_for_prompt(toolset));

  SessionOptions options = std::move(base_options);
  options.limits = limits;
  options.prompts = nullptr;  // executor turns use the base step template
  options.system_prompt = executor_system;
  options.external_plan = plan;
  options.conclude_backend = &concluder;
  options.conclude_prompt_builder = [&prompts, &qa](const MemoryBank& bank,
                                                    const QAPair&) {
    return prompts.conclude + "\n\nQuery: \"" + qa.question + "\"\n\nKnown Info: \"" +
           bank.render_values() + "\"\n\nAnswer:";
  };

  Transcript t = run_session(executor, qa, record, toolset, options);
  // Planner turns precede the executor conversation in the merged transcript.
  ChatHistory merged(planner_history.begin(), planner_history.end());
  std::vector<int> merged_tokens;
  for (const auto& m : merged) merged_tokens.push_back(approx_tokens(m.content));
  merged.insert(merged.end(), t.turns.begin(), t.turns.end());
  merged_tokens.insert(merged_tokens.end(), t.turn_tokens.begin(),
                       t.turn_tokens.end());
  t.turns = std::move(merged);
  t.turn_tokens = std::move(merged_tokens);
  return t;
}

Transcript run_with_strategy(const StrategySession& session, const QAPair& qa,
                             const PatientRecord& record, const ToolSet& toolset,
                             const std::optional<GroundTruthGap>& gap,
                             const StrategyConfig& config,
                             const PromptRegistry& registry, SessionLimits limits) {
  SessionOptions options;
  options.limits = limits;

  const StrategyFlags flags = config.flags;
  if (flags.few_shot || flags.self_reflection) {
    options.prompt_overlay = [flags](Stage stage, const std::string& text) {
      return stage == Stage::Step ? augment_prompt(text, flags) : text;
    };
  }
  if (flags.self_reflection) {
    options.response_gate = [](const std::string& text) {
      return validate_reflection(text);
    };
  }
  if (flags.auto_build && config.builder_policy != BuilderPolicy::Off && gap) {
    const GroundTruthGap gap_copy = *gap;
    const BuilderPolicy policy = config.builder_policy;
    options.builder = [gap_copy, policy](const NoCallMessage& nocall) {
      SessionOptions::BuildHookResult result;
      const BuildRequest request = emit_build_request(nocall);
      result.request_text = render_build_request(request);
      result.card = simulated_builder(request, gap_copy, policy);
      return result;
    };
  }

  Transcript t;
  if (flags.multi_agent) {
    Backend* planner = session.planner ? session.planner : session.agent;
    Backend* executor = session.executor ? session.executor : session.agent;
    Backend* concluder = session.concluder ? session.concluder : session.agent;
    const PromptSet& prompts = registry.contains(config.prompt_set)
                                   ? registry.get(config.prompt_set)
                                   : registry.get("v1-refined");
    const PromptSet& roles =
        prompts.multi_agent ? prompts : registry.get("v1-refined");
    t = run_multi_agent(*planner, *executor, *concluder, qa, record, toolset, roles,
                        limits, std::move(options));
  } else {
    const PromptSet& prompts = registry.get(config.prompt_set);
    options.prompts = &prompts;
    t = run_session(*session.agent, qa, record, toolset, options);
  }
  t.strategy_label = config.name;
  return t;
}

// ---------------------------------------------------------------------------
// Prompt back-propagation
// ---------------------------------------------------------------------------

namespace {

std::string failure_excerpt(const Transcript& t) {
  std::string out;
  out += "Task " + std::to_string(task_number(t.qa.task)) + " under " +
         std::string(to_string(t.condition)) + " ended with " +
         std::string(to_string(t.terminal.kind)) + ".\n";
  int shown = 0;
  for (const auto& step : t.steps) {
    if (step.kind != StepKind::IOError) continue;
    out += "Failed step response:\n" + step.response + "\n";
    if (++shown == 2) break;
  }
  return out;
}

}  // namespace

PromptSet critique_prompt_round(Backend& backend, const PromptSet& current,
                                const std::vector<Transcript>& sample_transcripts,
                                PromptRegistry& registry) {
  if (sample_transcripts.empty())
    throw Error("critique round needs a non-empty transcript sample");

  std::string excerpts;
  size_t shown = 0;
  for (const auto& t : sample_transcripts) {
    excerpts += failure_excerpt(t) + "\n";
    if (++shown == 8) break;
  }

  PromptSet revised = current;
  revised.name = next_version_name(current.name);
  SessionView empty_view;
  const struct {
    Stage stage;
    std::string* slot;
  } stages[] = {{Stage::Decompose, &revised.decompose},
                {Stage::Step, &revised.step},
                {Stage::Conclude, &revised.conclude}};
  for (const auto& entry : stages) {
    std::string request =
        "Below are excerpts from failed agent sessions:\n\n" + excerpts +
        "\nRevise the following " + std::string(to_string(entry.stage)) +
        " prompt template to address these failures. Keep every placeholder "
        "slot (text in curly braces) unchanged and reply with the full revised "
        "template only.\n\n---\n" + *entry.slot;
    ChatHistory history = {{"user", std::move(request)}};
    *entry.slot = backend.send(history, empty_view);
  }
  registry.add(revised);
  return revised;
}

}  // namespace radeval
