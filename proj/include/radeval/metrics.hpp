#pragma once

#include "radeval/session.hpp"

namespace radeval {

/// Minimum edit distance (insertion, deletion, substitution) between a
/// predicted category sequence and the closest linearization of the
/// ground-truth chain.
int levenshtein_chain(const std::vector<ToolCategory>& pred, const TaskSpec& gt);

/// Plain edit distance between two category sequences (decision vs execution
/// chains use this form).
int levenshtein_seq(const std::vector<ToolCategory>& a,
                    const std::vector<ToolCategory>& b);

struct FdrResult {
  double value = 0.0;
  bool degenerate = false;  // empty prediction: value pinned to 1.0
};

/// Share of predicted positions exceeding the ground-truth category multiset.
FdrResult fdr(const std::vector<ToolCategory>& pred, const TaskSpec& gt);

/// Best position-wise hit ratio over ground-truth linearizations.
double tma(const std::vector<ToolCategory>& pred, const TaskSpec& gt);

struct OtsStep {
  int suitable = 0;  // N: applicable same-category (and flavor) tools
  int rank = 0;      // 1 = best performance upper
  double score = 1.0;
};

/// (N - R + 1) / N for one executed step.
OtsStep ots_step(const std::string& tool_name, const ToolSet& toolset,
                 const PatientRecord& record);

/// Session mean over executed steps with at least two suitable tools; 1.0
/// when every choice was forced.
double session_ots(const Transcript& t, const ToolSet& toolset,
                   const PatientRecord& record, std::vector<OtsStep>* per_step = nullptr);

struct EcrPfsp {
  bool completed = false;
  std::optional<double> pre_failure_ratio;  // set iff not completed
};

/// ECR: no I/O errors and a concluded terminal. PFSP: executed steps before
/// the first failure over the linearized ground-truth length, clamped to 1.
EcrPfsp ecr_pfsp(const Transcript& t, const TaskSpec& gt);

struct ThrMhr {
  bool target_hit = false;
  bool milestone_hit = false;
};

ThrMhr thr_mhr(const Transcript& t, const TaskSpec& spec);

struct TextScores {
  double bleu = 0.0;
  double rouge = 0.0;
  double f1 = 0.0;
};

struct EmptyText : Error {
  using Error::Error;
};

/// Word-overlap metrics: BLEU-4 (add-one smoothing on n>1, brevity penalty),
/// ROUGE as unigram recall, F1 as unigram precision/recall harmonic mean.
/// Tokenization: lowercase, punctuation stripped, whitespace split.
TextScores text_metrics(const std::string& candidate, const std::string& reference);

std::vector<std::string> tokenize_text(const std::string& text);

struct Unsolvability {
  bool aware = false;      // UAR
  bool grounded = false;   // UGR
  bool false_refusal = false;  // NoCallStop under a solvable condition
};

Unsolvability unsolvability_assess(const Transcript& t,
                                   const std::optional<GroundTruthGap>& gap);

/// Solvable cells: ECR and THR. Insufficient cells: UAR and UGR. A post-build
/// concluded session is scored as the solvable case.
bool task_completion(const Transcript& t, const TaskSpec& spec,
                     const std::optional<GroundTruthGap>& gap);

// ---------------------------------------------------------------------------
// Per-cell metric row
// ---------------------------------------------------------------------------

struct MetricRow {
  std::string record_id;
  int task = 1;
  std::string condition;
  uint64_t seed = 0;
  std::string backend;
  std::string strategy;
  std::string complexity;

  double ld_plan = 0, ld_exec = 0, ld_plan_exec = 0;
  double fdr_plan = 0, fdr_exec = 0;
  double tma_plan = 0, tma_exec = 0;
  double ots = 1.0;
  bool ecr = false;
  std::optional<double> pfsp;
  bool thr = false, mhr = false;
  std::optional<double> bleu, rouge, f1;
  bool uar = false, ugr = false, false_refusal = false;
  bool completion = false;
  bool plan_degenerate = false;
  bool build_attempted = false, build_succeeded = false;
  int steps_executed = 0;
  int tokens_total = 0;
  std::string terminal;
  std::vector<OtsStep> ots_steps;
};

/// Computes every metric for one finished cell.
MetricRow score_transcript(const Transcript& t, const PatientRecord& record,
                           const ToolSet& toolset,
                           const std::optional<GroundTruthGap>& gap);

/// Delimited export. Optional values serialize as empty cells.
std::string metric_row_header();
std::string metric_row_csv(const MetricRow& row);
MetricRow metric_row_from_csv(const std::string& line);

}  // namespace radeval
