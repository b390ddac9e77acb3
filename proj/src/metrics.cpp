#include "radeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace radeval {

int levenshtein_seq(const std::vector<ToolCategory>& a,
                    const std::vector<ToolCategory>& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

int levenshtein_chain(const std::vector<ToolCategory>& pred, const TaskSpec& gt) {
  int best = std::numeric_limits<int>::max();
  for (const auto& lin : gt.category_linearizations())
    best = std::min(best, levenshtein_seq(pred, lin));
  return best;
}

FdrResult fdr(const std::vector<ToolCategory>& pred, const TaskSpec& gt) {
  if (pred.empty()) return {1.0, true};
  std::map<ToolCategory, int> budget;
  for (const auto& unit : gt.canonical_linearization()) ++budget[unit.category];
  int extraneous = 0;
  for (ToolCategory c : pred) {
    auto it = budget.find(c);
    if (it != budget.end() && it->second > 0) --it->second;
    else ++extraneous;
  }
  return {static_cast<double>(extraneous) / static_cast<double>(pred.size()), false};
}

double tma(const std::vector<ToolCategory>& pred, const TaskSpec& gt) {
  double best = 0.0;
  for (const auto& lin : gt.category_linearizations()) {
    int hits = 0;
    const size_t upto = std::min(pred.size(), lin.size());
    for (size_t i = 0; i < upto; ++i)
      if (pred[i] == lin[i]) ++hits;
    best = std::max(best, static_cast<double>(hits) / static_cast<double>(lin.size()));
  }
  return best;
}

OtsStep ots_step(const std::string& tool_name, const ToolSet& toolset,
                 const PatientRecord& record) {
  const ToolCard* used = toolset.find(tool_name);
  if (!used) throw Error("ots_step: unknown tool " + tool_name);
  const ChainUnit unit{used->category, used->variant};
  const auto suitable = toolset.applicable_for(unit, record);
  OtsStep step;
  step.suitable = static_cast<int>(suitable.size());
  // Tied uppers share the best rank.
  int rank = 1;
  for (const auto* card : suitable)
    if (card->performance.upper > used->performance.upper) ++rank;
  step.rank = rank;
  if (step.suitable >= 1)
    step.score = static_cast<double>(step.suitable - step.rank + 1) /
                 static_cast<double>(step.suitable);
  return step;
}

double session_ots(const Transcript& t, const ToolSet& toolset,
                   const PatientRecord& record, std::vector<OtsStep>* per_step) {
  // Builder-injected tools are in the transcript's live set, not the input
  // set; score against the session view including them.
  ToolSet live = toolset;
  if (t.build && t.build->succeeded) {
    for (const auto& step : t.steps)
      if (step.kind == StepKind::Executed && step.tool_name == t.build->injected_tool) {
        ToolCard card = make_tool_card("TOOL0", step.category,
                                       ToolScope{record.anatomy, record.modality},
                                       step.variant);
        card.performance = {0.8, 0.8, 0.0};
        live.append(card);
        break;
      }
  }
  double sum = 0.0;
  int counted = 0;
  for (const auto& [name, category] : t.executed_chain) {
    (void)category;
    OtsStep step;
    if (live.find(name)) step = ots_step(name, live, record);
    if (per_step) per_step->push_back(step);
    if (step.suitable >= 2) {
      sum += step.score;
      ++counted;
    }
  }
  return counted == 0 ? 1.0 : sum / counted;
}

EcrPfsp ecr_pfsp(const Transcript& t, const TaskSpec& gt) {
  EcrPfsp out;
  bool any_io_error = false;
  int executed_before_failure = 0;
  bool counting = true;
  for (const auto& step : t.steps) {
    if (step.kind == StepKind::IOError) {
      any_io_error = true;
      counting = false;
    } else if (step.kind == StepKind::Executed && counting) {
      ++executed_before_failure;
    }
  }
  out.completed = !any_io_error && t.terminal.kind == TerminalKind::Concluded;
  if (!out.completed) {
    const double ratio = static_cast<double>(executed_before_failure) /
                         static_cast<double>(gt.linearized_length());
    out.pre_failure_ratio = std::min(1.0, ratio);
  }
  return out;
}

ThrMhr thr_mhr(const Transcript& t, const TaskSpec& spec) {
  ThrMhr out;
  if (!t.executed_chain.empty() && t.terminal.kind == TerminalKind::Concluded)
    out.target_hit = t.executed_chain.back().second == spec.terminal_category;
  // Bank keys are never removed, so the last snapshot carries the history.
  const MemoryBank* final_bank = nullptr;
  for (auto it = t.steps.rbegin(); it != t.steps.rend(); ++it) {
    final_bank = &it->bank_after;
    break;
  }
  if (final_bank) out.milestone_hit = final_bank->contains(spec.milestone_key);
  return out;
}

std::vector<std::string> tokenize_text(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

namespace {

std::map<std::vector<std::string>, int> ngram_counts(
    const std::vector<std::string>& tokens, size_t n) {
  std::map<std::vector<std::string>, int> counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

}  // namespace

TextScores text_metrics(const std::string& candidate, const std::string& reference) {
  const auto cand = tokenize_text(candidate);
  const auto ref = tokenize_text(reference);
  if (cand.empty() || ref.empty()) throw EmptyText("text metrics need non-empty texts");

  TextScores scores;

  // Clipped unigram overlap for ROUGE and F1.
  auto cand1 = ngram_counts(cand, 1);
  auto ref1 = ngram_counts(ref, 1);
  int overlap = 0;
  for (const auto& [gram, count] : cand1) {
    const auto it = ref1.find(gram);
    if (it != ref1.end()) overlap += std::min(count, it->second);
  }
  const double precision = static_cast<double>(overlap) / cand.size();
  const double recall = static_cast<double>(overlap) / ref.size();
  scores.rouge = recall;
  scores.f1 = (precision + recall) == 0.0
                  ? 0.0
                  : 2.0 * precision * recall / (precision + recall);

  // BLEU-4: modified n-gram precisions, add-one smoothing for n > 1 only so
  // disjoint texts stay at exactly zero, and the brevity penalty.
  double log_sum = 0.0;
  bool zero = false;
  for (size_t n = 1; n <= 4; ++n) {
    const auto cgrams = ngram_counts(cand, n);
    const auto rgrams = ngram_counts(ref, n);
    int matches = 0, total = 0;
    for (const auto& [gram, count] : cgrams) {
      total += count;
      const auto it = rgrams.find(gram);
      if (it != rgrams.end()) matches += std::min(count, it->second);
    }
    double p;
    if (n == 1) {
      p = total == 0 ? 0.0 : static_cast<double>(matches) / total;
    } else {
      p = static_cast<double>(matches + 1) / static_cast<double>(total + 1);
    }
    if (p == 0.0) {
      zero = true;
      break;
    }
    log_sum += std::log(p) / 4.0;
  }
  if (zero) {
    scores.bleu = 0.0;
  } else {
    const double bp = cand.size() >= ref.size()
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(ref.size()) /
                                               static_cast<double>(cand.size()));
    scores.bleu = bp * std::exp(log_sum);
  }
  return scores;
}

Unsolvability unsolvability_assess(const Transcript& t,
                                   const std::optional<GroundTruthGap>& gap) {
  Unsolvability out;
  const bool refused = t.terminal.kind == TerminalKind::NoCallStop;
  if (!gap) {
    out.false_refusal = refused;
    return out;
  }
  out.aware = refused;
  if (!out.aware || !t.terminal.nocall) return out;
  const NoCallMessage& nocall = *t.terminal.nocall;
  const auto kind = parse_gap_kind(nocall.ability);
  if (!kind || *kind != gap->kind) return out;
  if (nocall.category != gap->category) return out;
  if (gap->kind != GapKind::CategoryMissing) {
    if (nocall.anatomy != gap->anatomy || nocall.modality != gap->modality)
      return out;
  }
  out.grounded = true;
  return out;
}

bool task_completion(const Transcript& t, const TaskSpec& spec,
                     const std::optional<GroundTruthGap>& gap) {
  const bool recovered = t.build && t.build->succeeded;
  if (gap && !recovered) {
    const auto u = unsolvability_assess(t, gap);
    return u.aware && u.grounded;
  }
  const auto e = ecr_pfsp(t, spec);
  const auto h = thr_mhr(t, spec);
  return e.completed && h.target_hit;
}

MetricRow score_transcript(const Transcript& t, const PatientRecord& record,
                           const ToolSet& toolset,
                           const std::optional<GroundTruthGap>& gap) {
  const TaskSpec& spec = ground_truth_spec(t.qa.task);
  MetricRow row;
  row.record_id = record.record_id();
  row.task = task_number(t.qa.task);
  row.condition = std::string(to_string(t.condition));
  row.seed = t.toolset_seed;
  row.backend = t.backend_label;
  row.strategy = t.strategy_label;
  row.complexity = std::string(to_string(spec.complexity));

  const auto plan_cats = t.plan.chain_categories();
  const auto exec_cats = t.executed_categories();
  row.plan_degenerate = t.plan_degenerate || plan_cats.empty();
  row.ld_plan = levenshtein_chain(plan_cats, spec);
  row.ld_exec = levenshtein_chain(exec_cats, spec);
  row.ld_plan_exec = levenshtein_seq(plan_cats, exec_cats);
  const auto fdr_p = fdr(plan_cats, spec);
  const auto fdr_e = fdr(exec_cats, spec);
  row.fdr_plan = fdr_p.value;
  row.fdr_exec = fdr_e.value;
  row.tma_plan = tma(plan_cats, spec);
  row.tma_exec = tma(exec_cats, spec);
  row.ots = session_ots(t, toolset, record, &row.ots_steps);

  const auto e = ecr_pfsp(t, spec);
  row.ecr = e.completed;
  row.pfsp = e.pre_failure_ratio;
  const auto h = thr_mhr(t, spec);
  row.thr = h.target_hit;
  row.mhr = h.milestone_hit;
  if (t.terminal.kind == TerminalKind::Concluded && !t.terminal.answer.empty() &&
      !t.qa.answer.empty()) {
    try {
      const auto scores = text_metrics(t.terminal.answer, t.qa.answer);
      row.bleu = scores.bleu;
      row.rouge = scores.rouge;
      row.f1 = scores.f1;
    } catch (const EmptyText&) {
    }
  }
  const auto u = unsolvability_assess(t, gap);
  row.uar = u.aware;
  row.ugr = u.grounded;
  row.false_refusal = u.false_refusal;
  row.completion = task_completion(t, spec, gap);
  row.build_attempted = t.build.has_value();
  row.build_succeeded = t.build && t.build->succeeded;
  row.steps_executed = static_cast<int>(t.executed_chain.size());
  row.tokens_total = t.total_tokens();
  row.terminal = std::string(to_string(t.terminal.kind));
  return row;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

std::string fmt(bool v) { return v ? "1" : "0"; }

}  // namespace

std::string metric_row_header() {
  return "record_id,task,condition,seed,backend,strategy,complexity,"
         "ld_plan,ld_exec,ld_plan_exec,fdr_plan,fdr_exec,tma_plan,tma_exec,ots,"
         "ecr,pfsp,thr,mhr,bleu,rouge,f1,uar,ugr,false_refusal,completion,"
         "plan_degenerate,build_attempted,build_succeeded,steps_executed,"
         "tokens_total,terminal";
}

std::string metric_row_csv(const MetricRow& r) {
  std::ostringstream out;
  out << r.record_id << ',' << r.task << ',' << r.condition << ',' << r.seed << ','
      << r.backend << ',' << r.strategy << ',' << r.complexity << ',' << fmt(r.ld_plan)
      << ',' << fmt(r.ld_exec) << ',' << fmt(r.ld_plan_exec) << ',' << fmt(r.fdr_plan)
      << ',' << fmt(r.fdr_exec) << ',' << fmt(r.tma_plan) << ',' << fmt(r.tma_exec)
      << ',' << fmt(r.ots) << ',' << fmt(r.ecr) << ',' << fmt(r.pfsp) << ','
      << fmt(r.thr) << ',' << fmt(r.mhr) << ',' << fmt(r.bleu) << ',' << fmt(r.rouge)
      << ',' << fmt(r.f1) << ',' << fmt(r.uar) << ',' << fmt(r.ugr) << ','
      << fmt(r.false_refusal) << ',' << fmt(r.completion) << ','
      << fmt(r.plan_degenerate) << ',' << fmt(r.build_attempted) << ','
      << fmt(r.build_succeeded) << ',' << r.steps_executed << ',' << r.tokens_total
      << ',' << r.terminal;
  return out.str();
}

MetricRow metric_row_from_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  if (cells.size() != 32) throw Error("metric row has wrong cell count");
  MetricRow r;
  size_t i = 0;
  auto next = [&]() { return cells.at(i++); };
  auto as_double = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
  auto as_opt = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return as_double(s);
  };
  r.record_id = next();
  r.task = std::atoi(next().c_str());
  r.condition = next();
  r.seed = std::strtoull(next().c_str(), nullptr, 10);
  r.backend = next();
  r.strategy = next();
  r.complexity = next();
  r.ld_plan = as_double(next());
  r.ld_exec = as_double(next());
  r.ld_plan_exec = as_double(next());
  r.fdr_plan = as_double(next());
  r.fdr_exec = as_double(next());
  r.tma_plan = as_double(next());
  r.tma_exec = as_double(next());
  r.ots = as_double(next());
  r.ecr = next() == "1";
  r.pfsp = as_opt(next());
  r.thr = next() == "1";
  r.mhr = next() == "1";
  r.bleu = as_opt(next());
  r.rouge = as_opt(next());
  r.f1 = as_opt(next());
  r.uar = next() == "1";
  r.ugr = next() == "1";
  r.false_refusal = next() == "1";
  r.completion = next() == "1";
  r.plan_degenerate = next() == "1";
  r.build_attempted = next() == "1";
  r.build_succeeded = next() == "1";
  r.steps_executed = std::atoi(next().c_str());
  r.tokens_total = std::atoi(next().c_str());
  r.terminal = next();
  return r;
}

}  // namespace radeval
