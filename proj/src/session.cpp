#include "radeval/session.hpp"

#include <algorithm>

namespace radeval {

std::string_view to_string(IOErrorKind k) {
  switch (k) {
    case IOErrorKind::UnknownTool: return "UnknownTool";
    case IOErrorKind::MissingInput: return "MissingInput";
    case IOErrorKind::CompulsoryOmitted: return "CompulsoryOmitted";
    case IOErrorKind::ToolMisuse: return "ToolMisuse";
    case IOErrorKind::ProtocolParse: return "ProtocolParse";
  }
  return "";
}

std::optional<IOErrorKind> parse_io_error_kind(std::string_view text) {
  for (IOErrorKind k : {IOErrorKind::UnknownTool, IOErrorKind::MissingInput,
                        IOErrorKind::CompulsoryOmitted, IOErrorKind::ToolMisuse,
                        IOErrorKind::ProtocolParse})
    if (text == to_string(k)) return k;
  return std::nullopt;
}

std::string_view to_string(TerminalKind k) {
  switch (k) {
    case TerminalKind::Concluded: return "Concluded";
    case TerminalKind::NoCallStop: return "NoCallStop";
    case TerminalKind::IOAbort: return "IOAbort";
    case TerminalKind::IterationCap: return "IterationCap";
    case TerminalKind::BackendError: return "BackendError";
  }
  return "";
}

ExecResult execute_call(const CallMessage& msg, const ToolSet& toolset,
                        MemoryBank& bank, const PatientRecord& record) {
  const ToolCard* card = toolset.find(msg.tool_name);
  if (!card) return ExecError{IOErrorKind::UnknownTool, msg.tool_name};

  for (InfoKey k : msg.inputs)
    if (!bank.contains(k))
      return ExecError{IOErrorKind::MissingInput, std::string(to_string(k))};

  for (InfoKey k : card->compulsory_input)
    if (std::find(msg.inputs.begin(), msg.inputs.end(), k) == msg.inputs.end())
      return ExecError{IOErrorKind::CompulsoryOmitted, std::string(to_string(k))};

  const auto need = record.needed_label(card->category, card->variant);
  if (applicability(*card, record.anatomy, record.modality, need) !=
      Applicability::Applicable)
    return ExecError{IOErrorKind::ToolMisuse, card->name};

  int optional_count = 0;
  for (InfoKey k : msg.inputs)
    if (std::find(card->optional_input.begin(), card->optional_input.end(), k) !=
        card->optional_input.end())
      ++optional_count;
  const double score = performance_score(*card, optional_count);

  ExecSuccess ok;
  ok.score = score;
  for (InfoKey k : card->output) {
    bank.set(k, record.ground_truth(k), score);
    ok.outputs.push_back(k);
  }
  return ok;
}

int approx_tokens(const std::string& text) {
  return static_cast<int>((text.size() + 3) / 4);
}

int Transcript::total_tokens() const {
  int sum = 0;
  for (int t : turn_tokens) sum += t;
  return sum;
}

std::vector<ToolCategory> Transcript::executed_categories() const {
  std::vector<ToolCategory> out;
  out.reserve(executed_chain.size());
  for (const auto& [name, cat] : executed_chain) out.push_back(cat);
  return out;
}

std::string render_record_block(const PatientRecord& record) {
  return "$Information$: " + record.info_text() +
         "\n\n$Image$: 'PLACEHOLDER_IMAGE'";
}

namespace {

const PromptSet& default_prompts() {
  static const PromptSet set = [] {
    PromptSet s;
    s.name = "v0-base";
    s.decompose = base_decompose_template();
    s.step = base_step_template();
    s.conclude = base_conclude_template();
    return s;
  }();
  return set;
}

}  // namespace

Transcript run_session(Backend& backend, const QAPair& qa,
                       const PatientRecord& record, const ToolSet& toolset,
                       const SessionOptions& options) {
  Transcript t;
  t.qa = qa;
  t.condition = toolset.condition;
  t.toolset_seed = toolset.seed;
  t.backend_label = backend.identity();

  ToolSet live = toolset;  // builds extend the session-local copy
  MemoryBank bank;
  const TaskSpec& spec = ground_truth_spec(qa.task);
  const int max_steps = options.limits.max_steps > 0
                            ? options.limits.max_steps
                            : 2 * spec.linearized_length() + 5;
  const PromptSet& prompts = options.prompts ? *options.prompts : default_prompts();

  SessionView view;
  view.qa = &qa;
  view.record = &record;
  view.toolset = &live;
  view.bank = &bank;

  auto overlay = [&](Stage stage, std::string text) {
    return options.prompt_overlay ? options.prompt_overlay(stage, text)
                                  : std::move(text);
  };
  auto push_turn = [&](const char* role, std::string content) -> const std::string& {
    t.turns.push_back({role, std::move(content)});
    t.turn_tokens.push_back(approx_tokens(t.turns.back().content));
    return t.turns.back().content;
  };
  auto ask = [&](Backend& who) -> std::optional<std::string> {
    try {
      std::string reply = who.send(t.turns, view);
      push_turn("assistant", reply);
      return reply;
    } catch (const std::exception& e) {
      t.terminal.kind = TerminalKind::BackendError;
      t.terminal.error = e.what();
      return std::nullopt;
    }
  };

  if (options.system_prompt) push_turn("system", *options.system_prompt);

  // Phase 1: task decomposition.
  if (options.external_plan) {
    t.plan = *options.external_plan;
  } else {
    StageContext ctx;
    ctx.record_info = render_record_block(record);
    ctx.query = "$Query$: " + qa.question;
    push_turn("user", overlay(Stage::Decompose,
                              render_stage_prompt(prompts, Stage::Decompose, ctx)));
    const auto reply = ask(backend);
    if (!reply) return t;
    try {
      t.plan = parse_decomposition(*reply);
    } catch (const Error&) {
      t.plan.raw_text = *reply;
      t.plan_degenerate = true;
    }
  }

  // Phase 2: the select-call-update loop.
  std::string pending_notice;
  for (int attempt = 1; attempt <= max_steps; ++attempt) {
    view.step_prompts_seen = attempt;
    view.executed_steps = static_cast<int>(t.executed_chain.size());

    StageContext ctx;
    ctx.bank_values = bank.render_values();
    if (attempt == 1) ctx.toolset_block = render_toolset_for_prompt(live);
    std::string prompt =
        overlay(Stage::Step, render_stage_prompt(prompts, Stage::Step, ctx));
    if (!pending_notice.empty()) {
      prompt = pending_notice + "\n\n" + prompt;
      pending_notice.clear();
    }
    push_turn("user", prompt);
    auto reply = ask(backend);
    if (!reply) return t;

    if (options.response_gate && !options.response_gate(*reply)) {
      push_turn("user", options.response_gate_reprompt.empty()
                            ? "The required reflection block is missing or "
                              "malformed. Repeat the step in the required format."
                            : options.response_gate_reprompt);
      reply = ask(backend);
      if (!reply) return t;
    }

    StepRecord step;
    step.request = prompt;
    step.response = *reply;
    step.parsed = parse_protocol(*reply);

    if (const auto* fail = std::get_if<ParseFailure>(&step.parsed)) {
      step.kind = StepKind::IOError;
      step.io_kind = IOErrorKind::ProtocolParse;
      step.bank_after = bank;
      t.steps.push_back(std::move(step));
      if (options.limits.abort_on_io_error) {
        t.terminal.kind = TerminalKind::IOAbort;
        t.terminal.io_kind = IOErrorKind::ProtocolParse;
        return t;
      }
      pending_notice = "Execution failed: ProtocolParse (" + fail->reason + ")";
      continue;
    }

    if (const auto* nocall = std::get_if<NoCallMessage>(&step.parsed)) {
      step.kind = StepKind::DeniedByAgent;
      step.bank_after = bank;
      t.steps.push_back(step);
      // One build attempt per session.
      if (options.builder && !t.build) {
        auto outcome = options.builder(*nocall);
        BuildAttempt attempt_record;
        attempt_record.request_text = outcome.request_text;
        if (outcome.card) {
          const ToolCard& added = live.append(*outcome.card);
          attempt_record.succeeded = true;
          attempt_record.injected_tool = added.name;
          t.build = attempt_record;
          pending_notice =
              "Building Done. Successful!\n\nA new tool has been added to the "
              "tool set:\n\n" + render_tool_card(added);
          continue;
        }
        t.build = attempt_record;
      }
      t.terminal.kind = TerminalKind::NoCallStop;
      t.terminal.nocall = *nocall;
      return t;
    }

    const auto& call = std::get<CallMessage>(step.parsed);
    auto result = execute_call(call, live, bank, record);
    if (const auto* err = std::get_if<ExecError>(&result)) {
      step.kind = StepKind::IOError;
      step.io_kind = err->kind;
      step.bank_after = bank;
      t.steps.push_back(std::move(step));
      if (options.limits.abort_on_io_error) {
        t.terminal.kind = TerminalKind::IOAbort;
        t.terminal.io_kind = err->kind;
        return t;
      }
      pending_notice = "Execution failed: " + std::string(to_string(err->kind));
      continue;
    }

    const auto& ok = std::get<ExecSuccess>(result);
    const ToolCard* card = live.find(call.tool_name);
    step.kind = StepKind::Executed;
    step.tool_name = call.tool_name;
    step.category = card->category;
    step.variant = card->variant;
    step.outputs = ok.outputs;
    step.score = ok.score;
    step.bank_after = bank;
    t.steps.push_back(step);
    t.executed_chain.emplace_back(call.tool_name, card->category);
    t.executed_variants.push_back(card->variant);

    if (call.terminal) {
      // Phase 3: response generation.
      std::string conclude_prompt;
      if (options.conclude_prompt_builder) {
        conclude_prompt = options.conclude_prompt_builder(bank, qa);
      } else {
        StageContext cctx;
        cctx.bank_values = bank.render_values();
        conclude_prompt = render_stage_prompt(prompts, Stage::Conclude, cctx);
      }
      push_turn("user", overlay(Stage::Conclude, std::move(conclude_prompt)));
      Backend& concluder =
          options.conclude_backend ? *options.conclude_backend : backend;
      const auto answer = ask(concluder);
      if (!answer) return t;
      t.terminal.kind = TerminalKind::Concluded;
      t.terminal.answer = *answer;
      return t;
    }
  }
  t.terminal.kind = TerminalKind::IterationCap;
  return t;
}

}  // namespace radeval
