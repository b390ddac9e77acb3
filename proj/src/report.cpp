#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "radeval/harness.hpp"

namespace radeval {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Accumulator {
  int n = 0;
  double sum = 0.0;

  void add(double v) {
    ++n;
    sum += v;
  }
  void add(const std::optional<double>& v) {
    if (v) add(*v);
  }
  json mean() const {
    if (n == 0) return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", sum / n);
    return json::parse(buf, nullptr, true);
  }
};

struct GroupStats {
  int cells = 0;
  Accumulator ld_plan, ld_exec, ld_plan_exec, fdr_plan, fdr_exec, tma_plan, tma_exec;
  Accumulator ots, pfsp, bleu, rouge, f1;
  int ecr = 0, thr = 0, mhr = 0, uar = 0, ugr = 0, false_refusal = 0, completion = 0;
  Accumulator tokens;

  void add(const MetricRow& r) {
    ++cells;
    ld_plan.add(r.ld_plan);
    ld_exec.add(r.ld_exec);
    ld_plan_exec.add(r.ld_plan_exec);
    fdr_plan.add(r.fdr_plan);
    fdr_exec.add(r.fdr_exec);
    tma_plan.add(r.tma_plan);
    tma_exec.add(r.tma_exec);
    ots.add(r.ots);
    pfsp.add(r.pfsp);
    bleu.add(r.bleu);
    rouge.add(r.rouge);
    f1.add(r.f1);
    ecr += r.ecr;
    thr += r.thr;
    mhr += r.mhr;
    uar += r.uar;
    ugr += r.ugr;
    false_refusal += r.false_refusal;
    completion += r.completion;
    tokens.add(static_cast<double>(r.tokens_total));
  }

  json to_json() const {
    auto rate = [&](int k) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6g",
                    cells ? static_cast<double>(k) / cells : 0.0);
      return json::parse(buf, nullptr, true);
    };
    json j;
    j["cells"] = cells;
    j["completion"] = rate(completion);
    j["levenshtein_plan"] = ld_plan.mean();
    j["levenshtein_exec"] = ld_exec.mean();
    j["levenshtein_plan_exec"] = ld_plan_exec.mean();
    j["fdr_plan"] = fdr_plan.mean();
    j["fdr_exec"] = fdr_exec.mean();
    j["tma_plan"] = tma_plan.mean();
    j["tma_exec"] = tma_exec.mean();
    j["ots"] = ots.mean();
    j["ecr"] = rate(ecr);
    j["pfsp"] = pfsp.mean();
    j["thr"] = rate(thr);
    j["mhr"] = rate(mhr);
    j["bleu"] = bleu.mean();
    j["rouge"] = rouge.mean();
    j["f1"] = f1.mean();
    j["uar"] = rate(uar);
    j["ugr"] = rate(ugr);
    j["false_refusal"] = rate(false_refusal);
    j["tokens_mean"] = tokens.mean();
    return j;
  }
};

std::vector<MetricRow> load_rows(const fs::path& metrics_path) {
  std::ifstream in(metrics_path);
  if (!in) throw EmptyManifest("no metrics.csv to report on");
  std::vector<MetricRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(metric_row_from_csv(line));
  return rows;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void emit_report(const RunConfig& config) {
  const fs::path out_dir(config.output_dir);
  const auto rows = load_rows(out_dir / "metrics.csv");
  if (rows.empty()) throw EmptyManifest("metrics.csv holds no rows");

  // (backend, strategy, condition) groups, split by task and complexity tier.
  std::map<std::string, GroupStats> groups;
  std::map<std::string, GroupStats> by_task;
  std::map<std::string, GroupStats> by_complexity;
  std::map<std::string, GroupStats> by_condition_tokens;
  for (const auto& r : rows) {
    const std::string g = r.backend + "/" + r.strategy + "/" + r.condition;
    groups[g].add(r);
    by_task[g + "/task" + (r.task < 10 ? "0" : "") + std::to_string(r.task)].add(r);
    by_complexity[g + "/" + r.complexity].add(r);
    by_condition_tokens[r.condition].add(r);
  }

  json summary;
  summary["cells"] = static_cast<int>(rows.size());
  json jgroups;
  for (const auto& [name, stats] : groups) jgroups[name] = stats.to_json();
  summary["groups"] = std::move(jgroups);
  json jtasks;
  for (const auto& [name, stats] : by_task) jtasks[name] = stats.to_json();
  summary["by_task"] = std::move(jtasks);
  json jcomp;
  for (const auto& [name, stats] : by_complexity) jcomp[name] = stats.to_json();
  summary["by_complexity"] = std::move(jcomp);

  // Token-length distribution per condition.
  json jtokens;
  for (const auto& [condition, stats] : by_condition_tokens) {
    std::vector<int> totals;
    for (const auto& r : rows)
      if (r.condition == condition) totals.push_back(r.tokens_total);
    std::sort(totals.begin(), totals.end());
    json t;
    t["cells"] = static_cast<int>(totals.size());
    t["mean"] = stats.tokens.mean();
    t["min"] = totals.front();
    t["median"] = totals[totals.size() / 2];
    t["max"] = totals.back();
    jtokens[condition] = std::move(t);
  }
  summary["tokens_by_condition"] = std::move(jtokens);

  // Paired comparisons for every strategy pair on shared cells.
  std::map<std::string, std::map<std::string, std::pair<double, double>>> per_record;
  std::set<std::string> strategy_names;
  for (const auto& r : rows) {
    strategy_names.insert(r.strategy);
    const std::string shared = r.backend + "|" + r.condition + "|" + r.record_id +
                               "|" + std::to_string(r.task) + "|" +
                               std::to_string(r.seed);
    per_record[r.strategy][shared] = {r.ld_exec, r.completion ? 1.0 : 0.0};
  }
  json jpaired = json::array();
  std::vector<std::string> names(strategy_names.begin(), strategy_names.end());
  for (size_t a = 0; a < names.size(); ++a) {
    for (size_t b = a + 1; b < names.size(); ++b) {
      // Per-record mean Levenshtein on the cells both strategies ran.
      std::map<std::string, std::pair<Accumulator, Accumulator>> ld_by_record;
      std::map<std::string, std::pair<Accumulator, Accumulator>> comp_by_record;
      for (const auto& [shared, va] : per_record[names[a]]) {
        const auto it = per_record[names[b]].find(shared);
        if (it == per_record[names[b]].end()) continue;
        const std::string record_key = shared.substr(0, shared.find('|', shared.find('|') + 1));
        ld_by_record[record_key].first.add(va.first);
        ld_by_record[record_key].second.add(it->second.first);
        comp_by_record[record_key].first.add(va.second);
        comp_by_record[record_key].second.add(it->second.second);
      }
      if (ld_by_record.size() < 2) continue;
      std::vector<double> lda, ldb, ca, cb;
      for (const auto& [key, accs] : ld_by_record) {
        lda.push_back(accs.first.sum / accs.first.n);
        ldb.push_back(accs.second.sum / accs.second.n);
      }
      for (const auto& [key, accs] : comp_by_record) {
        ca.push_back(accs.first.sum / accs.first.n);
        cb.push_back(accs.second.sum / accs.second.n);
      }
      const auto ld_cmp = paired_compare(lda, ldb, true);
      const auto comp_cmp = paired_compare(ca, cb, false);
      json entry;
      entry["a"] = names[a];
      entry["b"] = names[b];
      entry["records"] = static_cast<int>(lda.size());
      entry["levenshtein"] = {{"wins", ld_cmp.wins},
                              {"ties", ld_cmp.ties},
                              {"losses", ld_cmp.losses},
                              {"t", std::isfinite(ld_cmp.t_statistic)
                                        ? json::parse(fmt(ld_cmp.t_statistic))
                                        : json(nullptr)},
                              {"p", json::parse(fmt(ld_cmp.p_value))},
                              {"degenerate", ld_cmp.degenerate}};
      entry["completion"] = {{"wins", comp_cmp.wins},
                             {"ties", comp_cmp.ties},
                             {"losses", comp_cmp.losses},
                             {"t", std::isfinite(comp_cmp.t_statistic)
                                       ? json::parse(fmt(comp_cmp.t_statistic))
                                       : json(nullptr)},
                             {"p", json::parse(fmt(comp_cmp.p_value))},
                             {"degenerate", comp_cmp.degenerate}};
      jpaired.push_back(std::move(entry));
    }
  }
  summary["paired"] = std::move(jpaired);

  std::ofstream summary_out(out_dir / "summary.json", std::ios::binary);
  summary_out << summary.dump(2) << "\n";

  // Flat per-group table.
  std::ofstream agg(out_dir / "aggregates.csv", std::ios::binary);
  agg << "group,cells,completion,ld_plan,ld_exec,fdr_exec,tma_exec,ots,ecr,pfsp,"
         "thr,mhr,bleu,rouge,f1,uar,ugr,false_refusal,tokens_mean\n";
  for (const auto& [name, stats] : groups) {
    const json row = stats.to_json();
    auto cell = [&](const char* key) {
      const auto& v = row.at(key);
      return v.is_null() ? std::string() : v.dump();
    };
    agg << name << ',' << stats.cells << ',' << cell("completion") << ','
        << cell("levenshtein_plan") << ',' << cell("levenshtein_exec") << ','
        << cell("fdr_exec") << ',' << cell("tma_exec") << ',' << cell("ots") << ','
        << cell("ecr") << ',' << cell("pfsp") << ',' << cell("thr") << ','
        << cell("mhr") << ',' << cell("bleu") << ',' << cell("rouge") << ','
        << cell("f1") << ',' << cell("uar") << ',' << cell("ugr") << ','
        << cell("false_refusal") << ',' << cell("tokens_mean") << "\n";
  }
}

}  // namespace radeval
