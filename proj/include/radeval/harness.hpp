#pragma once

#include "radeval/metrics.hpp"
#include "radeval/stats.hpp"
#include "radeval/strategies.hpp"

namespace radeval {

struct MissingKey : Error {
  explicit MissingKey(const std::string& key) : Error("MissingKey: " + key) {}
};
struct BadEnum : Error {
  explicit BadEnum(const std::string& what) : Error("BadEnum: " + what) {}
};
struct SecretUnset : Error {
  explicit SecretUnset(const std::string& var) : Error("SecretUnset: " + var) {}
};

struct BackendDescriptor {
  std::string name;
  std::string kind;  // "scripted:<core>" or "http"
  HttpBackendConfig http;
};

struct RunConfig {
  std::string records_dir;
  std::string qa_dir;
  std::string diseases_csv;
  std::vector<Condition> conditions;
  std::vector<TaskType> tasks;  // empty = all 11
  std::vector<uint64_t> seeds;
  std::vector<BackendDescriptor> backends;
  std::vector<StrategyConfig> strategies;
  SessionLimits limits;
  std::string output_dir = "out";
  bool resume = false;
  int max_cells = 0;  // 0 = unbounded
  int parallelism = 4;
  std::string prompt_dir;  // optional extra prompt versions
};

/// Parses and validates a config file. Secrets are checked against the
/// environment for live backends but never stored.
RunConfig load_config(const std::string& path);
RunConfig config_from_json(const std::string& json_text);

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

struct Corpus {
  std::vector<PatientRecord> records;
  std::map<std::string, std::vector<QAPair>> qa_by_record;
  std::vector<DiseaseRow> diseases;

  const PatientRecord* find_record(const std::string& record_id) const;
};

Corpus load_corpus(const std::string& records_dir, const std::string& qa_dir,
                   const std::string& diseases_csv);

struct ValidationIssue {
  std::string where;
  std::string what;
};

/// Invariant checks over a loaded corpus (combination membership, 11 QAs per
/// record, scope-leak flags, unique record ids, disease-list coverage).
std::vector<ValidationIssue> validate_corpus(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct CellId {
  std::string record_id;
  TaskType task = TaskType::OrganSegmentation;
  Condition condition = Condition::Baseline;
  uint64_t seed = 0;
  std::string backend;
  std::string strategy;

  std::string key() const;
  bool operator==(const CellId&) const = default;
};

enum class CellStatus : uint8_t { Pending, Done, Failed };

struct RunManifest {
  std::vector<std::pair<CellId, CellStatus>> cells;

  int count(CellStatus status) const;
};

/// Deterministic cell enumeration for a config over a corpus.
RunManifest enumerate_cells(const RunConfig& config, const Corpus& corpus);

/// Toolset seed for one cell: hash(run seed, record, task, condition).
uint64_t cell_toolset_seed(const CellId& cell);

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const std::string& line);

struct RunResult {
  RunManifest manifest;
  int executed = 0;
  int skipped = 0;
  int failed = 0;
};

/// Runs all pending cells with bounded parallelism. Transcripts and metric
/// rows append in manifest order; interrupted runs resume from the manifest
/// without recomputation.
RunResult run_benchmark(const RunConfig& config);

struct ReplayMismatch {
  std::string cell;
  std::string what;
};

/// Re-executes every stored raw response and recomputes the metric rows;
/// returns the mismatches (empty = faithful replay).
std::vector<ReplayMismatch> replay_run(const RunConfig& config);

struct EmptyManifest : Error {
  using Error::Error;
};

/// Aggregates metrics.csv into summary.json and aggregates.csv under the run
/// directory. Deterministic: re-emitting over an unchanged manifest is
/// byte-identical.
void emit_report(const RunConfig& config);

}  // namespace radeval
