#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "radeval/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace radeval;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitPartialFailure = 3;

int cmd_validate_data(const std::string& records_dir, const std::string& qa_dir,
                      const std::string& diseases_csv) {
  const Corpus corpus = load_corpus(records_dir, qa_dir, diseases_csv);
  const auto issues = validate_corpus(corpus);
  std::cout << "records: " << corpus.records.size() << "\n";
  std::cout << "qa blocks: " << corpus.qa_by_record.size() << "\n";
  std::cout << "disease rows: " << corpus.diseases.size() << "\n";
  for (const auto& issue : issues)
    std::cout << "issue: " << issue.where << ": " << issue.what << "\n";
  if (issues.empty()) {
    std::cout << "corpus ok\n";
    return kExitOk;
  }
  return kExitPartialFailure;
}

int cmd_gen_toolsets(const std::string& records_dir, const std::string& condition_name,
                     uint64_t seed, const std::string& record_id, int task_number_arg,
                     const std::string& out_dir) {
  const auto condition = parse_condition(condition_name);
  if (!condition) {
    std::cerr << "unknown condition: " << condition_name << "\n";
    return kExitConfigError;
  }
  const auto task = task_from_number(task_number_arg);
  if (!task) {
    std::cerr << "task must be 1..11\n";
    return kExitConfigError;
  }
  Corpus corpus;
  for (const auto& entry : fs::directory_iterator(records_dir))
    if (entry.path().extension() == ".json") {
      std::ifstream in(entry.path());
      std::string text((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
      corpus.records.push_back(parse_patient_record(text));
    }
  const PatientRecord* record = nullptr;
  for (const auto& r : corpus.records)
    if (record_id.empty() || r.record_id() == record_id) {
      record = &r;
      break;
    }
  if (!record) {
    std::cerr << "record not found: " << record_id << "\n";
    return kExitConfigError;
  }

  const auto built = build_toolset(*condition, seed, *record, *task);
  fs::create_directories(out_dir);
  const std::string stem = std::string(to_string(*condition)) + "_" +
                           record->record_id() + "_task" +
                           std::to_string(task_number_arg) + "_seed" +
                           std::to_string(seed);
  {
    std::ofstream out(fs::path(out_dir) / (stem + ".json"));
    out << toolset_to_json(built.toolset) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / (stem + ".txt"));
    for (const auto& card : built.toolset.cards) out << render_tool_card(card) << "\n";
  }
  if (built.gap) {
    std::ofstream out(fs::path(out_dir) / (stem + ".gap.json"));
    out << gap_to_json(*built.gap) << "\n";
  }
  const auto verdict = solvability_oracle(built.toolset, *record, *task);
  std::cout << stem << ": " << built.toolset.size() << " tools, "
            << (verdict.solvable ? "solvable" : "unsolvable") << "\n";
  return kExitOk;
}

int cmd_run(const std::string& config_path) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const RunResult result = run_benchmark(config);
  std::cout << "cells: " << result.manifest.cells.size() << " executed: "
            << result.executed << " skipped: " << result.skipped
            << " failed: " << result.failed << "\n";
  return result.failed == 0 ? kExitOk : kExitPartialFailure;
}

int cmd_report(const std::string& config_path) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  emit_report(config);
  std::cout << "report written to " << config.output_dir << "/summary.json\n";
  return kExitOk;
}

int cmd_replay(const std::string& config_path) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const auto mismatches = replay_run(config);
  if (mismatches.empty()) {
    std::cout << "replay ok\n";
    return kExitOk;
  }
  for (const auto& m : mismatches)
    std::cout << "mismatch: " << m.cell << ": " << m.what << "\n";
  return kExitPartialFailure;
}

int cmd_critique(const std::string& config_path, const std::string& version,
                 const std::string& backend_name, const std::string& prompt_dir) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  PromptRegistry registry;
  if (!prompt_dir.empty() && fs::exists(fs::path(prompt_dir) / "manifest.json"))
    registry.load_dir(prompt_dir);

  std::unique_ptr<Backend> backend;
  for (const auto& d : config.backends)
    if (d.name == backend_name)
      backend = d.kind == "http" ? make_http_backend(d.http, d.name)
                                 : make_scripted_backend(d.kind);
  if (!backend) {
    std::cerr << "backend not found in config: " << backend_name << "\n";
    return kExitConfigError;
  }

  std::vector<Transcript> samples;
  std::ifstream in(fs::path(config.output_dir) / "transcripts.jsonl");
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) samples.push_back(transcript_from_json(line));
  if (samples.empty()) {
    std::cerr << "no transcripts under " << config.output_dir << "\n";
    return kExitConfigError;
  }

  const PromptSet revised =
      critique_prompt_round(*backend, registry.get(version), samples, registry);
  if (!prompt_dir.empty()) registry.save_version(prompt_dir, revised);
  std::cout << "registry gains " << revised.name << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated radiology tool-agent evaluation harness"};
  app.require_subcommand(1);

  std::string records_dir = "data/records";
  std::string qa_dir = "data/qa";
  std::string diseases_csv = "data/diseases.csv";
  auto* validate = app.add_subcommand("validate-data", "Check the bundled corpus");
  validate->add_option("--records", records_dir, "Record directory");
  validate->add_option("--qa", qa_dir, "QA directory");
  validate->add_option("--diseases", diseases_csv, "Disease list CSV");

  std::string condition = "Baseline";
  uint64_t seed = 1;
  std::string record_id;
  int task = 1;
  std::string out_dir = "out/toolsets";
  auto* gen = app.add_subcommand("gen-toolsets", "Emit a tool set for one cell");
  gen->add_option("--records", records_dir, "Record directory");
  gen->add_option("--condition", condition, "Condition name");
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--record", record_id, "Record id (default: first record)");
  gen->add_option("--task", task, "Task number 1..11");
  gen->add_option("--out", out_dir, "Output directory");

  std::string config_path = "config.json";
  auto* run = app.add_subcommand("run", "Run the benchmark cells of a config");
  run->add_option("--config", config_path, "Config file")->required();

  auto* report = app.add_subcommand("report", "Aggregate metrics into a summary");
  report->add_option("--config", config_path, "Config file")->required();

  auto* replay = app.add_subcommand("replay", "Re-execute stored transcripts");
  replay->add_option("--config", config_path, "Config file")->required();

  std::string version = "v0-base";
  std::string backend_name;
  std::string prompt_dir;
  auto* critique = app.add_subcommand("critique", "One prompt back-propagation round");
  critique->add_option("--config", config_path, "Config file")->required();
  critique->add_option("--version", version, "Prompt version to revise");
  critique->add_option("--backend", backend_name, "Backend name from the config")
      ->required();
  critique->add_option("--prompt-dir", prompt_dir, "Registry directory to write");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed())
      return cmd_validate_data(records_dir, qa_dir, diseases_csv);
    if (gen->parsed())
      return cmd_gen_toolsets(records_dir, condition, seed, record_id, task, out_dir);
    if (run->parsed()) return cmd_run(config_path);
    if (report->parsed()) return cmd_report(config_path);
    if (replay->parsed()) return cmd_replay(config_path);
    if (critique->parsed())
      return cmd_critique(config_path, version, backend_name, prompt_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartialFailure;
  }
  return kExitOk;
}
