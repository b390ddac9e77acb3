#include "radeval/harness.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace radeval {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  auto require = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw MissingKey(key);
    return j.at(key);
  };
  const auto& corpus = require("corpus");
  if (!corpus.contains("records_dir")) throw MissingKey("corpus.records_dir");
  cfg.records_dir = corpus.at("records_dir").get<std::string>();
  if (!corpus.contains("qa_dir")) throw MissingKey("corpus.qa_dir");
  cfg.qa_dir = corpus.at("qa_dir").get<std::string>();
  cfg.diseases_csv = corpus.value("diseases_csv", std::string());

  for (const auto& c : require("conditions")) {
    const auto condition = parse_condition(c.get<std::string>());
    if (!condition) throw BadEnum("condition " + c.get<std::string>());
    cfg.conditions.push_back(*condition);
  }
  if (cfg.conditions.empty()) throw Error("config needs at least one condition");

  if (j.contains("tasks"))
    for (const auto& t : j.at("tasks")) {
      const auto task = task_from_number(t.get<int>());
      if (!task) throw BadEnum("task " + std::to_string(t.get<int>()));
      cfg.tasks.push_back(*task);
    }

  for (const auto& s : require("seeds")) cfg.seeds.push_back(s.get<uint64_t>());
  if (cfg.seeds.empty()) throw Error("config needs at least one seed");

  for (const auto& b : require("backends")) {
    BackendDescriptor d;
    if (!b.contains("name")) throw MissingKey("backends[].name");
    d.name = b.at("name").get<std::string>();
    if (!b.contains("kind")) throw MissingKey("backends[].kind");
    d.kind = b.at("kind").get<std::string>();
    if (d.kind == "http") {
      if (!b.contains("endpoint")) throw MissingKey("backends[].endpoint");
      d.http.endpoint = b.at("endpoint").get<std::string>();
      d.http.path = b.value("path", std::string("/v1/chat/completions"));
      d.http.model = b.value("model", d.name);
      if (!b.contains("api_key_env")) throw MissingKey("backends[].api_key_env");
      d.http.api_key_env = b.at("api_key_env").get<std::string>();
      d.http.retries = b.value("retries", 1);
      d.http.timeout_seconds = b.value("timeout_seconds", 60);
      d.http.max_parallel = b.value("max_parallel", 1);
      const char* secret = std::getenv(d.http.api_key_env.c_str());
      if (!secret || !*secret) throw SecretUnset(d.http.api_key_env);
    } else if (d.kind.rfind("scripted:", 0) != 0) {
      throw BadEnum("backend kind " + d.kind);
    }
    cfg.backends.push_back(std::move(d));
  }
  if (cfg.backends.empty()) throw Error("config needs at least one backend");

  if (j.contains("strategies")) {
    for (const auto& s : j.at("strategies")) {
      StrategyConfig sc;
      sc.name = s.value("name", std::string("base"));
      if (s.contains("flags")) {
        const auto& f = s.at("flags");
        sc.flags.self_reflection = f.value("self_reflection", false);
        sc.flags.few_shot = f.value("few_shot", false);
        sc.flags.multi_agent = f.value("multi_agent", false);
        sc.flags.auto_build = f.value("auto_build", false);
      }
      sc.prompt_set = s.value("prompt_set",
                              sc.flags.multi_agent ? std::string("v1-refined")
                                                   : std::string("v0-base"));
      if (s.contains("builder_policy")) {
        const auto policy = parse_builder_policy(s.at("builder_policy").get<std::string>());
        if (!policy) throw BadEnum("builder_policy " + s.at("builder_policy").get<std::string>());
        sc.builder_policy = *policy;
      }
      cfg.strategies.push_back(std::move(sc));
    }
  }
  if (cfg.strategies.empty()) cfg.strategies.push_back(StrategyConfig{});

  if (j.contains("limits")) {
    cfg.limits.max_steps = j.at("limits").value("max_steps", 0);
    cfg.limits.abort_on_io_error = j.at("limits").value("abort_on_io_error", false);
  }
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.resume = j.value("resume", false);
  cfg.max_cells = j.value("max_cells", 0);
  cfg.parallelism = j.value("parallelism", 4);
  cfg.prompt_dir = j.value("prompt_dir", std::string());
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return config_from_json(read_file(path));
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

const PatientRecord* Corpus::find_record(const std::string& record_id) const {
  for (const auto& r : records)
    if (r.record_id() == record_id) return &r;
  return nullptr;
}

Corpus load_corpus(const std::string& records_dir, const std::string& qa_dir,
                   const std::string& diseases_csv) {
  Corpus corpus;
  std::vector<fs::path> record_files;
  for (const auto& entry : fs::directory_iterator(records_dir))
    if (entry.path().extension() == ".json") record_files.push_back(entry.path());
  std::sort(record_files.begin(), record_files.end());
  for (const auto& path : record_files)
    corpus.records.push_back(parse_patient_record(read_file(path)));

  for (const auto& record : corpus.records) {
    const fs::path qa_path = fs::path(qa_dir) / (record.record_id() + ".qa.txt");
    if (!fs::exists(qa_path)) continue;
    corpus.qa_by_record[record.record_id()] =
        parse_qa_text(read_file(qa_path), record.record_id());
  }
  if (!diseases_csv.empty() && fs::exists(diseases_csv))
    corpus.diseases = parse_disease_csv(read_file(diseases_csv));
  return corpus;
}

std::vector<ValidationIssue> validate_corpus(const Corpus& corpus) {
  std::vector<ValidationIssue> issues;
  std::set<std::string> seen_ids;
  for (const auto& record : corpus.records) {
    const std::string id = record.record_id();
    if (!seen_ids.insert(id).second)
      issues.push_back({id, "duplicate record id"});
    if (!combination_allowed(record.anatomy, record.modality))
      issues.push_back({id, "anatomy-modality combination not allowed"});
    const auto qa_it = corpus.qa_by_record.find(id);
    if (qa_it == corpus.qa_by_record.end()) {
      issues.push_back({id, "no QA block"});
      continue;
    }
    if (qa_it->second.size() != 11)
      issues.push_back({id, "QA block does not hold 11 pairs"});
    for (const auto& qa : qa_it->second)
      if (question_leaks_scope(qa.question))
        issues.push_back({id + "#Q" + std::to_string(task_number(qa.task)),
                          "question leaks anatomy/modality"});
    if (!corpus.diseases.empty()) {
      const bool listed =
          std::any_of(corpus.diseases.begin(), corpus.diseases.end(),
                      [&](const DiseaseRow& row) {
                        return row.anatomy == record.anatomy &&
                               row.modality == record.modality &&
                               row.disease == record.disease;
                      });
      if (!listed) issues.push_back({id, "disease not in disease list"});
    }
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::string CellId::key() const {
  return record_id + "|" + std::to_string(task_number(task)) + "|" +
         std::string(to_string(condition)) + "|" + std::to_string(seed) + "|" +
         backend + "|" + strategy;
}

int RunManifest::count(CellStatus status) const {
  int n = 0;
  for (const auto& [cell, s] : cells)
    if (s == status) ++n;
  return n;
}

RunManifest enumerate_cells(const RunConfig& config, const Corpus& corpus) {
  RunManifest manifest;
  std::vector<TaskType> tasks = config.tasks;
  if (tasks.empty()) tasks.assign(kAllTasks.begin(), kAllTasks.end());
  for (const auto& backend : config.backends)
    for (const auto& strategy : config.strategies)
      for (Condition condition : config.conditions)
        for (uint64_t seed : config.seeds)
          for (const auto& record : corpus.records)
            for (TaskType task : tasks) {
              if (!corpus.qa_by_record.count(record.record_id())) continue;
              CellId cell;
              cell.record_id = record.record_id();
              cell.task = task;
              cell.condition = condition;
              cell.seed = seed;
              cell.backend = backend.name;
              cell.strategy = strategy.name;
              manifest.cells.emplace_back(std::move(cell), CellStatus::Pending);
              if (config.max_cells > 0 &&
                  static_cast<int>(manifest.cells.size()) >= config.max_cells)
                return manifest;
            }
  return manifest;
}

uint64_t cell_toolset_seed(const CellId& cell) {
  return fnv1a64("cell|" + std::to_string(cell.seed) + "|" + cell.record_id + "|" +
                 std::to_string(task_number(cell.task)) + "|" +
                 std::string(to_string(cell.condition)));
}

// ---------------------------------------------------------------------------
// Transcript serialization
// ---------------------------------------------------------------------------

namespace {

json bank_to_json(const MemoryBank& bank) {
  json j = json::array();
  for (InfoKey k : bank.keys())
    j.push_back({{"key", std::string(to_string(k))},
                 {"value", bank.value(k)},
                 {"score", bank.score(k)}});
  return j;
}

MemoryBank bank_from_json(const json& j) {
  MemoryBank bank;
  for (const auto& entry : j) {
    const auto key = parse_info_key(entry.at("key").get<std::string>());
    if (!key) throw Error("unknown bank key in transcript");
    if (MemoryBank::is_fixed(*key)) continue;
    bank.set(*key, entry.at("value").get<std::string>(),
             entry.at("score").get<double>());
  }
  return bank;
}

const char* step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::Executed: return "Executed";
    case StepKind::IOError: return "IOError";
    case StepKind::DeniedByAgent: return "DeniedByAgent";
  }
  return "";
}

StepKind step_kind_from(const std::string& s) {
  if (s == "Executed") return StepKind::Executed;
  if (s == "IOError") return StepKind::IOError;
  if (s == "DeniedByAgent") return StepKind::DeniedByAgent;
  throw Error("unknown step kind: " + s);
}

TerminalKind terminal_kind_from(const std::string& s) {
  for (TerminalKind k : {TerminalKind::Concluded, TerminalKind::NoCallStop,
                         TerminalKind::IOAbort, TerminalKind::IterationCap,
                         TerminalKind::BackendError})
    if (s == to_string(k)) return k;
  throw Error("unknown terminal kind: " + s);
}

json nocall_to_json(const NoCallMessage& m) {
  return json{{"purpose", m.purpose},
              {"category", std::string(to_string(m.category))},
              {"anatomy", m.anatomy ? json(std::string(to_string(*m.anatomy))) : json(nullptr)},
              {"modality", m.modality ? json(std::string(to_string(*m.modality))) : json(nullptr)},
              {"ability", m.ability}};
}

NoCallMessage nocall_from_json(const json& j) {
  NoCallMessage m;
  m.purpose = j.at("purpose").get<std::string>();
  m.category = resolve_category(j.at("category").get<std::string>())->category;
  if (!j.at("anatomy").is_null())
    m.anatomy = parse_anatomy(j.at("anatomy").get<std::string>());
  if (!j.at("modality").is_null())
    m.modality = parse_modality(j.at("modality").get<std::string>());
  m.ability = j.at("ability").get<std::string>();
  return m;
}

}  // namespace

std::string transcript_to_json(const Transcript& t) {
  json j;
  j["record_id"] = t.qa.record_id;
  j["task"] = task_number(t.qa.task);
  j["condition"] = std::string(to_string(t.condition));
  j["toolset_seed"] = t.toolset_seed;
  j["backend"] = t.backend_label;
  j["strategy"] = t.strategy_label;
  j["question"] = t.qa.question;
  j["answer"] = t.qa.answer;
  j["plan_degenerate"] = t.plan_degenerate;
  j["plan_raw"] = t.plan.raw_text;

  json turns = json::array();
  for (size_t i = 0; i < t.turns.size(); ++i)
    turns.push_back({{"role", t.turns[i].role},
                     {"content", t.turns[i].content},
                     {"tokens", t.turn_tokens[i]}});
  j["turns"] = std::move(turns);

  json steps = json::array();
  for (const auto& step : t.steps) {
    json s;
    s["request"] = step.request;
    s["response"] = step.response;
    s["kind"] = step_kind_name(step.kind);
    if (step.kind == StepKind::IOError)
      s["io_kind"] = std::string(to_string(step.io_kind));
    if (step.kind == StepKind::Executed) {
      s["tool"] = step.tool_name;
      s["category"] = std::string(to_string(step.category));
      s["score"] = step.score;
      json outs = json::array();
      for (InfoKey k : step.outputs) outs.push_back(std::string(to_string(k)));
      s["outputs"] = std::move(outs);
    }
    s["bank_after"] = bank_to_json(step.bank_after);
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);

  json chain = json::array();
  for (size_t i = 0; i < t.executed_chain.size(); ++i)
    chain.push_back({{"tool", t.executed_chain[i].first},
                     {"category", std::string(to_string(t.executed_chain[i].second))},
                     {"variant", t.executed_variants.size() > i
                                     ? static_cast<int>(t.executed_variants[i])
                                     : 0}});
  j["executed_chain"] = std::move(chain);

  json terminal;
  terminal["kind"] = std::string(to_string(t.terminal.kind));
  switch (t.terminal.kind) {
    case TerminalKind::Concluded: terminal["answer"] = t.terminal.answer; break;
    case TerminalKind::NoCallStop:
      if (t.terminal.nocall) terminal["nocall"] = nocall_to_json(*t.terminal.nocall);
      break;
    case TerminalKind::IOAbort:
      terminal["io_kind"] = std::string(to_string(t.terminal.io_kind));
      break;
    case TerminalKind::BackendError: terminal["error"] = t.terminal.error; break;
    case TerminalKind::IterationCap: break;
  }
  j["terminal"] = std::move(terminal);

  if (t.build) {
    j["build"] = {{"request", t.build->request_text},
                  {"succeeded", t.build->succeeded},
                  {"injected_tool", t.build->injected_tool}};
  }
  return j.dump();
}

Transcript transcript_from_json(const std::string& line) {
  const json j = json::parse(line);
  Transcript t;
  t.qa.record_id = j.at("record_id").get<std::string>();
  t.qa.task = *task_from_number(j.at("task").get<int>());
  t.condition = *parse_condition(j.at("condition").get<std::string>());
  t.toolset_seed = j.at("toolset_seed").get<uint64_t>();
  t.backend_label = j.at("backend").get<std::string>();
  t.strategy_label = j.at("strategy").get<std::string>();
  t.qa.question = j.at("question").get<std::string>();
  t.qa.answer = j.at("answer").get<std::string>();
  t.plan_degenerate = j.at("plan_degenerate").get<bool>();
  t.plan.raw_text = j.at("plan_raw").get<std::string>();
  if (!t.plan_degenerate && !t.plan.raw_text.empty()) {
    try {
      t.plan = parse_decomposition(t.plan.raw_text);
    } catch (const Error&) {
      t.plan_degenerate = true;
    }
  }
  for (const auto& turn : j.at("turns")) {
    t.turns.push_back({turn.at("role").get<std::string>(),
                       turn.at("content").get<std::string>()});
    t.turn_tokens.push_back(turn.at("tokens").get<int>());
  }
  for (const auto& s : j.at("steps")) {
    StepRecord step;
    step.request = s.at("request").get<std::string>();
    step.response = s.at("response").get<std::string>();
    step.kind = step_kind_from(s.at("kind").get<std::string>());
    step.parsed = parse_protocol(step.response);
    if (step.kind == StepKind::IOError)
      step.io_kind = *parse_io_error_kind(s.at("io_kind").get<std::string>());
    if (step.kind == StepKind::Executed) {
      step.tool_name = s.at("tool").get<std::string>();
      step.category = resolve_category(s.at("category").get<std::string>())->category;
      step.score = s.at("score").get<double>();
      for (const auto& out : s.at("outputs"))
        step.outputs.push_back(*parse_info_key(out.get<std::string>()));
    }
    step.bank_after = bank_from_json(s.at("bank_after"));
    t.steps.push_back(std::move(step));
  }
  for (const auto& c : j.at("executed_chain")) {
    t.executed_chain.emplace_back(
        c.at("tool").get<std::string>(),
        resolve_category(c.at("category").get<std::string>())->category);
    t.executed_variants.push_back(static_cast<Variant>(c.at("variant").get<int>()));
  }
  const auto& terminal = j.at("terminal");
  t.terminal.kind = terminal_kind_from(terminal.at("kind").get<std::string>());
  switch (t.terminal.kind) {
    case TerminalKind::Concluded:
      t.terminal.answer = terminal.at("answer").get<std::string>();
      break;
    case TerminalKind::NoCallStop:
      if (terminal.contains("nocall"))
        t.terminal.nocall = nocall_from_json(terminal.at("nocall"));
      break;
    case TerminalKind::IOAbort:
      t.terminal.io_kind =
          *parse_io_error_kind(terminal.at("io_kind").get<std::string>());
      break;
    case TerminalKind::BackendError:
      t.terminal.error = terminal.at("error").get<std::string>();
      break;
    case TerminalKind::IterationCap: break;
  }
  if (j.contains("build")) {
    BuildAttempt b;
    b.request_text = j.at("build").at("request").get<std::string>();
    b.succeeded = j.at("build").at("succeeded").get<bool>();
    b.injected_tool = j.at("build").at("injected_tool").get<std::string>();
    t.build = b;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Benchmark execution
// ---------------------------------------------------------------------------

namespace {

struct CellOutput {
  bool failed = false;
  std::string failure;
  std::string transcript_line;
  std::string metrics_line;
};

std::set<std::string> load_done_cells(const fs::path& manifest_path) {
  std::set<std::string> done;
  if (!fs::exists(manifest_path)) return done;
  std::ifstream in(manifest_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    if (j.at("status").get<std::string>() == "done")
      done.insert(j.at("cell").get<std::string>());
  }
  return done;
}

CellOutput run_cell(const CellId& cell, const RunConfig& config, const Corpus& corpus,
                    Backend& backend, const StrategyConfig& strategy,
                    const PromptRegistry& registry) {
  CellOutput out;
  try {
    const PatientRecord* record = corpus.find_record(cell.record_id);
    if (!record) throw Error("record not found: " + cell.record_id);
    const auto& qa_list = corpus.qa_by_record.at(cell.record_id);
    const QAPair* qa = nullptr;
    for (const auto& candidate : qa_list)
      if (candidate.task == cell.task) qa = &candidate;
    if (!qa) throw Error("qa pair not found for task");

    const uint64_t toolset_seed = cell_toolset_seed(cell);
    auto built = build_toolset(cell.condition, toolset_seed, *record, cell.task);
    Transcript t = run_with_strategy({&backend}, *qa, *record, built.toolset,
                                     built.gap, strategy, registry, config.limits);
    t.backend_label = cell.backend;
    const MetricRow row = score_transcript(t, *record, built.toolset, built.gap);
    out.transcript_line = transcript_to_json(t);
    out.metrics_line = metric_row_csv(row);
  } catch (const std::exception& e) {
    out.failed = true;
    out.failure = e.what();
  }
  return out;
}

}  // namespace

RunResult run_benchmark(const RunConfig& config) {
  const Corpus corpus = load_corpus(config.records_dir, config.qa_dir,
                                    config.diseases_csv);
  PromptRegistry registry;
  if (!config.prompt_dir.empty() &&
      fs::exists(fs::path(config.prompt_dir) / "manifest.json"))
    registry.load_dir(config.prompt_dir);

  std::map<std::string, std::unique_ptr<Backend>> backends;
  std::map<std::string, const StrategyConfig*> strategies;
  int parallelism = std::max(1, config.parallelism);
  for (const auto& d : config.backends) {
    if (d.kind == "http") {
      backends[d.name] = make_http_backend(d.http, d.name);
      parallelism = std::min(parallelism, std::max(1, d.http.max_parallel));
    } else {
      backends[d.name] = make_scripted_backend(d.kind);
    }
  }
  for (const auto& s : config.strategies) strategies[s.name] = &s;

  fs::create_directories(config.output_dir);
  const fs::path out_dir(config.output_dir);
  const fs::path manifest_path = out_dir / "manifest.jsonl";
  const fs::path transcripts_path = out_dir / "transcripts.jsonl";
  const fs::path metrics_path = out_dir / "metrics.csv";

  std::set<std::string> done;
  if (config.resume) {
    done = load_done_cells(manifest_path);
  } else {
    fs::remove(manifest_path);
    fs::remove(transcripts_path);
    fs::remove(metrics_path);
  }

  RunResult result;
  result.manifest = enumerate_cells(config, corpus);

  struct WorkItem {
    size_t manifest_index;
    const CellId* cell;
  };
  std::vector<WorkItem> work;
  for (size_t i = 0; i < result.manifest.cells.size(); ++i) {
    auto& [cell, status] = result.manifest.cells[i];
    if (done.count(cell.key())) {
      status = CellStatus::Done;
      ++result.skipped;
    } else {
      work.push_back({i, &cell});
    }
  }

  std::ofstream manifest_out(manifest_path, std::ios::app);
  std::ofstream transcripts_out(transcripts_path, std::ios::app);
  const bool fresh_metrics = !fs::exists(metrics_path) || fs::file_size(metrics_path) == 0;
  std::ofstream metrics_out(metrics_path, std::ios::app);
  if (fresh_metrics) metrics_out << metric_row_header() << "\n";

  std::vector<std::optional<CellOutput>> outputs(work.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<size_t> next_item{0};

  auto worker = [&] {
    while (true) {
      const size_t i = next_item.fetch_add(1);
      if (i >= work.size()) return;
      const CellId& cell = *work[i].cell;
      CellOutput out = run_cell(cell, config, corpus, *backends.at(cell.backend),
                                *strategies.at(cell.strategy), registry);
      {
        std::lock_guard<std::mutex> lock(mu);
        outputs[i] = std::move(out);
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  const size_t thread_count =
      std::min<size_t>(static_cast<size_t>(parallelism), std::max<size_t>(1, work.size()));
  for (size_t i = 0; i < thread_count; ++i) pool.emplace_back(worker);

  // Single writer appends in manifest order so identical runs produce
  // byte-identical logs.
  for (size_t i = 0; i < work.size(); ++i) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return outputs[i].has_value(); });
    CellOutput out = std::move(*outputs[i]);
    outputs[i].reset();
    lock.unlock();

    const CellId& cell = *work[i].cell;
    auto& status = result.manifest.cells[work[i].manifest_index].second;
    json m;
    m["cell"] = cell.key();
    if (out.failed) {
      status = CellStatus::Failed;
      ++result.failed;
      m["status"] = "failed";
      m["error"] = out.failure;
    } else {
      status = CellStatus::Done;
      ++result.executed;
      m["status"] = "done";
      transcripts_out << out.transcript_line << "\n";
      metrics_out << out.metrics_line << "\n";
    }
    manifest_out << m.dump() << "\n";
    transcripts_out.flush();
    metrics_out.flush();
    manifest_out.flush();
  }
  for (auto& t : pool) t.join();
  return result;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

std::vector<ReplayMismatch> replay_run(const RunConfig& config) {
  const Corpus corpus = load_corpus(config.records_dir, config.qa_dir,
                                    config.diseases_csv);
  const fs::path out_dir(config.output_dir);
  std::ifstream transcripts(out_dir / "transcripts.jsonl");
  if (!transcripts) throw Error("no transcripts.jsonl under " + config.output_dir);
  std::ifstream metrics(out_dir / "metrics.csv");
  if (!metrics) throw Error("no metrics.csv under " + config.output_dir);
  std::string header;
  std::getline(metrics, header);

  std::vector<ReplayMismatch> mismatches;
  std::string line;
  while (std::getline(transcripts, line)) {
    if (line.empty()) continue;
    const Transcript stored = transcript_from_json(line);
    std::string stored_row;
    if (!std::getline(metrics, stored_row)) {
      mismatches.push_back({"<global>", "metrics.csv has fewer rows than transcripts"});
      break;
    }
    const std::string cell_key =
        stored.qa.record_id + "|" + std::to_string(task_number(stored.qa.task)) +
        "|" + std::string(to_string(stored.condition));

    const PatientRecord* record = corpus.find_record(stored.qa.record_id);
    if (!record) {
      mismatches.push_back({cell_key, "record missing from corpus"});
      continue;
    }
    auto built = build_toolset(stored.condition, stored.toolset_seed, *record,
                               stored.qa.task);
    ToolSet live = built.toolset;
    if (stored.build && stored.build->succeeded) {
      // Rebuild the injected card from the stored request and the gap.
      const BuildRequest request = [&] {
        BuildRequest r;
        if (stored.terminal.nocall) return emit_build_request(*stored.terminal.nocall);
        for (const auto& step : stored.steps)
          if (const auto* nc = std::get_if<NoCallMessage>(&step.parsed))
            return emit_build_request(*nc);
        return r;
      }();
      if (built.gap) {
        auto card = simulated_builder(request, *built.gap, BuilderPolicy::ExactMatch);
        if (card) live.append(*card);
      }
    }

    // Re-execute the stored raw responses.
    MemoryBank bank;
    size_t step_index = 0;
    for (const auto& step : stored.steps) {
      const auto parsed = parse_protocol(step.response);
      std::string what;
      if (const auto* call = std::get_if<CallMessage>(&parsed)) {
        auto exec = execute_call(*call, live, bank, *record);
        const bool was_executed = std::holds_alternative<ExecSuccess>(exec);
        if (was_executed != (step.kind == StepKind::Executed))
          what = "step outcome diverged";
      } else if (std::holds_alternative<NoCallMessage>(parsed)) {
        if (step.kind != StepKind::DeniedByAgent) what = "denial diverged";
      } else {
        if (step.kind != StepKind::IOError) what = "parse failure diverged";
      }
      if (what.empty() && !(bank == step.bank_after))
        what = "bank snapshot diverged at step " + std::to_string(step_index + 1);
      if (!what.empty()) {
        mismatches.push_back({cell_key, what});
        break;
      }
      ++step_index;
    }

    const MetricRow recomputed =
        score_transcript(stored, *record, built.toolset, built.gap);
    if (metric_row_csv(recomputed) != stored_row)
      mismatches.push_back({cell_key, "metric row diverged"});
  }
  return mismatches;
}

}  // namespace radeval
