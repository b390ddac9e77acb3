#include "radeval/toolset.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include "json.hpp"

namespace radeval {

namespace {
using TC = ToolCategory;
using json = nlohmann::ordered_json;
}  // namespace

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Baseline: return "Baseline";
    case Condition::RedundantRegular: return "RedundantRegular";
    case Condition::RedundantMedium: return "RedundantMedium";
    case Condition::RedundantHigh: return "RedundantHigh";
    case Condition::InsufficientConfig1: return "InsufficientConfig1";
    case Condition::InsufficientConfig2: return "InsufficientConfig2";
    case Condition::InsufficientConfig3: return "InsufficientConfig3";
    case Condition::Differentiated: return "Differentiated";
  }
  return "";
}

std::optional<Condition> parse_condition(std::string_view text) {
  for (Condition c : kAllConditions)
    if (text == to_string(c)) return c;
  return std::nullopt;
}

bool is_insufficient(Condition c) {
  return c == Condition::InsufficientConfig1 || c == Condition::InsufficientConfig2 ||
         c == Condition::InsufficientConfig3;
}

std::string_view to_string(GapKind k) {
  switch (k) {
    case GapKind::CategoryMissing: return "CategoryMissing";
    case GapKind::SpecificToolMissing: return "SpecificToolMissing";
    case GapKind::InsufficientCapability: return "InsufficientCapability";
  }
  return "";
}

std::optional<GapKind> parse_gap_kind(std::string_view text) {
  for (GapKind k : {GapKind::CategoryMissing, GapKind::SpecificToolMissing,
                    GapKind::InsufficientCapability})
    if (text == to_string(k)) return k;
  return std::nullopt;
}

const ToolCard* ToolSet::find(const std::string& name) const {
  for (const auto& c : cards)
    if (c.name == name) return &c;
  return nullptr;
}

const ToolCard& ToolSet::append(ToolCard card) {
  card.name = "TOOL" + std::to_string(cards.size() + 1);
  // Rendered texts never embed the name, so renaming is safe here.
  cards.push_back(std::move(card));
  return cards.back();
}

namespace {

bool unit_served_by(const ChainUnit& unit, const ToolCard& card) {
  if (card.category != unit.category) return false;
  if (unit.variant == Variant::None) return true;
  return card.variant == unit.variant || card.variant == Variant::None;
}

int tool_index(const std::string& name) {
  return std::atoi(name.c_str() + 4);
}

}  // namespace

std::vector<const ToolCard*> ToolSet::applicable_for(const ChainUnit& unit,
                                                     const PatientRecord& record) const {
  std::vector<const ToolCard*> out;
  for (const auto& card : cards) {
    if (!unit_served_by(unit, card)) continue;
    const auto need = record.needed_label(card.category, card.variant);
    if (applicability(card, record.anatomy, record.modality, need) ==
        Applicability::Applicable)
      out.push_back(&card);
  }
  std::sort(out.begin(), out.end(), [](const ToolCard* a, const ToolCard* b) {
    if (a->performance.upper != b->performance.upper)
      return a->performance.upper > b->performance.upper;
    return tool_index(a->name) < tool_index(b->name);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace {

struct Builder {
  const PatientRecord& record;
  const TaskSpec& spec;
  SplitMix64 rng;
  std::vector<ToolCard> cards;

  ToolScope record_scope() const {
    return ToolScope{record.anatomy, record.modality};
  }

  void add(ToolCategory cat, ToolScope scope, Variant variant = Variant::None,
           MakeCardOptions opts = {}) {
    cards.push_back(make_tool_card("TOOL0", cat, scope, variant, opts));
  }

  /// Seeded universal-or-record-specific scope for baseline cards.
  ToolScope coin_scope() {
    return rng.bounded(2) ? record_scope() : ToolScope{};
  }

  std::pair<Anatomy, Modality> mismatched_combo() {
    const auto& combos = allowed_combinations();
    while (true) {
      const auto& c = combos[rng.bounded(combos.size())];
      if (c.first != record.anatomy || c.second != record.modality) return c;
    }
  }

  void add_mismatched(ToolCategory cat) {
    const auto [a, m] = mismatched_combo();
    Variant v = Variant::None;
    if (cat == TC::BiomarkerQuantifier || cat == TC::IndicatorEvaluator)
      v = rng.bounded(2) ? Variant::Organ : Variant::Anomaly;
    add(cat, ToolScope{a, m}, v);
  }

  /// Cards, in baseline order, excluding categories in `drop` and (cat,variant)
  /// pairs in `drop_units`.
  void add_baseline(const std::set<TC>& drop = {},
                    const std::set<std::pair<TC, Variant>>& drop_units = {}) {
    auto want = [&](TC cat, Variant v) {
      return !drop.count(cat) && !drop_units.count({cat, v});
    };
    auto add_if = [&](TC cat, ToolScope scope, Variant v = Variant::None) {
      // Scope coin is drawn regardless so the stream stays aligned across
      // drop configurations of the same seed.
      if (want(cat, v)) add(cat, scope, v);
    };
    if (want(TC::AnatomyClassifier, Variant::None)) add(TC::AnatomyClassifier, {});
    if (want(TC::ModalityClassifier, Variant::None)) add(TC::ModalityClassifier, {});
    add_if(TC::OrganSegmentor, coin_scope());
    add_if(TC::AnomalyDetector, coin_scope());
    add_if(TC::ImagingDiagnoser, coin_scope());
    add_if(TC::GroundedDiagnoser, coin_scope());
    add_if(TC::BiomarkerQuantifier, {}, Variant::Organ);
    add_if(TC::BiomarkerQuantifier, {}, Variant::Anomaly);
    add_if(TC::IndicatorEvaluator, {}, Variant::Organ);
    add_if(TC::IndicatorEvaluator, {}, Variant::Anomaly);
    add_if(TC::ReportGenerator, coin_scope());
    add_if(TC::TreatmentPlanner, {});
  }

  /// Pads with scope-mismatched tools of categories outside `exclude`.
  void pad_to(size_t target, const std::set<TC>& exclude) {
    std::vector<TC> pool;
    for (TC cat : kAllCategories)
      if (!exclude.count(cat)) pool.push_back(cat);
    while (cards.size() < target) add_mismatched(pool[rng.bounded(pool.size())]);
  }

  ToolSet finish(Condition condition, uint64_t seed) {
    ToolSet ts;
    ts.condition = condition;
    ts.seed = seed;
    ts.record_id = record.record_id();
    ts.task = spec.task;
    ts.cards = std::move(cards);
    for (size_t i = 0; i < ts.cards.size(); ++i)
      ts.cards[i].name = "TOOL" + std::to_string(i + 1);
    return ts;
  }
};

std::vector<ChainUnit> deduped_units(const TaskSpec& spec, bool exclude_classifiers) {
  std::vector<ChainUnit> units;
  for (const auto& u : spec.canonical_linearization()) {
    if (exclude_classifiers && (u.category == TC::AnatomyClassifier ||
                                u.category == TC::ModalityClassifier))
      continue;
    if (std::find(units.begin(), units.end(), u) == units.end()) units.push_back(u);
  }
  return units;
}

bool chain_has_both_bq_variants(const TaskSpec& spec) {
  bool organ = false, anomaly = false;
  for (const auto& u : spec.canonical_linearization())
    if (u.category == TC::BiomarkerQuantifier) {
      organ |= u.variant == Variant::Organ;
      anomaly |= u.variant == Variant::Anomaly;
    }
  return organ && anomaly;
}

/// Categories Config1 may remove: chain categories minus the classifiers,
/// minus BQ when the chain needs both its variants (a single rebuilt tool
/// could not restore solvability).
std::vector<TC> config1_pool(const TaskSpec& spec) {
  std::vector<TC> pool;
  for (const auto& u : deduped_units(spec, true)) {
    if (u.category == TC::BiomarkerQuantifier && chain_has_both_bq_variants(spec))
      continue;
    if (std::find(pool.begin(), pool.end(), u.category) == pool.end())
      pool.push_back(u.category);
  }
  return pool;
}

std::vector<std::string> capability_decoys(LabelKind kind,
                                           const std::string& needed) {
  static const std::map<LabelKind, std::vector<std::string>> pools = {
      {LabelKind::Organs, {"liver", "heart", "kidney", "spleen"}},
      {LabelKind::Anomalies, {"nodule", "fracture", "calcification", "effusion"}},
      {LabelKind::Diseases, {"pneumothorax", "atelectasis", "osteoporosis", "gallstones"}},
      {LabelKind::Biomarkers, {"number", "length", "size", "volume", "angle",
                               "density", "intensity", "texture"}},
      {LabelKind::Indicators, {"CURB-65 Score", "TNM Staging Score", "BI-RADS Category",
                               "Agatston Score"}},
  };
  std::vector<std::string> out;
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  for (const auto& candidate : pools.at(kind)) {
    if (lower(candidate) == lower(needed)) continue;
    out.push_back(candidate);
    if (out.size() == 2) break;
  }
  return out;
}

void build_baseline(Builder& b) { b.add_baseline(); }

void build_redundant_regular(Builder& b) {
  b.add_baseline();
  const uint64_t extras = b.rng.range(1, 3);
  std::vector<TC> pool(kAllCategories.begin(), kAllCategories.end());
  for (uint64_t i = 0; i < extras; ++i) {
    const size_t at = b.rng.bounded(pool.size());
    b.add_mismatched(pool[at]);
    pool.erase(pool.begin() + static_cast<long>(at));
  }
}

void build_redundant_medium(Builder& b) {
  b.add_baseline();
  for (TC cat : kAllCategories) {
    b.add_mismatched(cat);
    b.add_mismatched(cat);
  }
  const uint64_t thirds = b.rng.bounded(3);
  std::vector<TC> pool(kAllCategories.begin(), kAllCategories.end());
  for (uint64_t i = 0; i < thirds; ++i) {
    const size_t at = b.rng.bounded(pool.size());
    b.add_mismatched(pool[at]);
    pool.erase(pool.begin() + static_cast<long>(at));
  }
}

void build_redundant_high(Builder& b) {
  for (const auto& row : redundant_high_manifest()) {
    MakeCardOptions opts;
    opts.include_optionals = row.include_optionals;
    b.add(row.category, ToolScope{row.anatomy, row.modality}, row.variant, opts);
  }
}

GroundTruthGap build_config1(Builder& b) {
  const auto pool = config1_pool(b.spec);
  if (pool.empty())
    throw TaskConditionMismatch(
        "InsufficientConfig1 has no removable category for this task");
  const TC removed = pool[b.rng.bounded(pool.size())];
  b.add_baseline({removed});
  const uint64_t target = b.rng.range(14, 17);
  b.pad_to(target, {removed});

  GroundTruthGap gap;
  gap.category = removed;
  gap.kind = GapKind::CategoryMissing;
  for (const auto& u : b.spec.canonical_linearization())
    if (u.category == removed) {
      gap.variant = u.variant;
      break;
    }
  return gap;
}

GroundTruthGap build_config2(Builder& b) {
  const auto units = deduped_units(b.spec, true);
  if (units.empty())
    throw TaskConditionMismatch("InsufficientConfig2 has no targetable chain unit");
  const ChainUnit target = units[b.rng.bounded(units.size())];

  // For a variant-free unit (indicator evaluation) every card of the
  // category could serve it, so all of them are withheld.
  std::set<std::pair<TC, Variant>> drop_units;
  if (target.variant == Variant::None &&
      (target.category == TC::BiomarkerQuantifier ||
       target.category == TC::IndicatorEvaluator)) {
    drop_units.insert({target.category, Variant::Organ});
    drop_units.insert({target.category, Variant::Anomaly});
  } else {
    drop_units.insert({target.category, target.variant});
  }
  b.add_baseline({}, drop_units);

  const uint64_t decoys = b.rng.range(2, 3);
  for (uint64_t i = 0; i < decoys; ++i) {
    const auto [a, m] = b.mismatched_combo();
    Variant v = target.variant;
    if (v == Variant::None && (target.category == TC::BiomarkerQuantifier ||
                               target.category == TC::IndicatorEvaluator))
      v = i % 2 ? Variant::Anomaly : Variant::Organ;
    b.add(target.category, ToolScope{a, m}, v);
  }
  const uint64_t size_target = b.rng.range(15, 17);
  b.pad_to(size_target, {target.category});

  GroundTruthGap gap;
  gap.category = target.category;
  gap.anatomy = b.record.anatomy;
  gap.modality = b.record.modality;
  gap.kind = GapKind::SpecificToolMissing;
  gap.variant = target.variant;
  return gap;
}

GroundTruthGap build_config3(Builder& b) {
  std::vector<ChainUnit> eligible;
  for (const auto& u : deduped_units(b.spec, true))
    if (label_kind_for(u.category) != LabelKind::None) eligible.push_back(u);
  if (eligible.empty())
    throw TaskConditionMismatch("InsufficientConfig3 has no labelable chain unit");
  const ChainUnit target = eligible[b.rng.bounded(eligible.size())];
  const auto needed = b.record.needed_label(
      target.category,
      target.variant == Variant::None ? Variant::Organ : target.variant);

  b.add_baseline();
  // Swap every card that could serve the unit for an in-scope card whose
  // capability list excludes the record's target.
  for (auto& card : b.cards) {
    if (!unit_served_by(target, card)) continue;
    MakeCardOptions opts;
    opts.labels = capability_decoys(label_kind_for(card.category),
                                    needed.value_or(""));
    card = make_tool_card(card.name, card.category, card.scope, card.variant, opts);
  }
  b.pad_to(18, {target.category});

  GroundTruthGap gap;
  gap.category = target.category;
  gap.anatomy = b.record.anatomy;
  gap.modality = b.record.modality;
  gap.kind = GapKind::InsufficientCapability;
  gap.missing_label = needed;
  gap.variant = target.variant;
  return gap;
}

void build_differentiated(Builder& b) {
  const auto chain_units = deduped_units(b.spec, true);
  std::vector<ChainUnit> ladders;
  ladders.push_back(chain_units[b.rng.bounded(chain_units.size())]);
  std::vector<ChainUnit> second_pool;
  for (const auto& u : chain_units)
    if (!(u == ladders[0])) second_pool.push_back(u);
  if (second_pool.empty()) {
    // Three-step tasks have one eligible chain category; ladder a distractor
    // category instead (still applicable, never executed).
    std::set<TC> chain_cats;
    for (const auto& u : chain_units) chain_cats.insert(u.category);
    for (TC cat : {TC::ImagingDiagnoser, TC::AnomalyDetector, TC::OrganSegmentor,
                   TC::ReportGenerator})
      if (!chain_cats.count(cat)) second_pool.push_back(ChainUnit{cat, Variant::None});
  }
  ladders.push_back(second_pool[b.rng.bounded(second_pool.size())]);

  std::set<std::pair<TC, Variant>> drop_units;
  for (const auto& u : ladders) {
    if (u.variant == Variant::None && (u.category == TC::BiomarkerQuantifier ||
                                       u.category == TC::IndicatorEvaluator)) {
      drop_units.insert({u.category, Variant::Organ});
      drop_units.insert({u.category, Variant::Anomaly});
    } else {
      drop_units.insert({u.category, u.variant});
    }
  }
  b.add_baseline({}, drop_units);

  // Performance ladder: universal 0.50, modality-specific 0.60,
  // anatomy-modality-specific 0.70, target-specific 0.80.
  for (const auto& u : ladders) {
    Variant v = u.variant;
    if (v == Variant::None && (u.category == TC::BiomarkerQuantifier ||
                               u.category == TC::IndicatorEvaluator))
      v = Variant::Organ;
    const struct {
      ToolScope scope;
      double score;
      bool labeled;
    } rungs[] = {
        {ToolScope{}, 0.5, false},
        {ToolScope{std::nullopt, b.record.modality}, 0.6, false},
        {ToolScope{b.record.anatomy, b.record.modality}, 0.7, false},
        {ToolScope{b.record.anatomy, b.record.modality}, 0.8, true},
    };
    for (const auto& rung : rungs) {
      MakeCardOptions opts;
      opts.include_optionals = false;
      if (rung.labeled)
        if (auto need = b.record.needed_label(u.category, v)) opts.labels = {*need};
      auto card = make_tool_card("TOOL0", u.category, rung.scope, v, opts);
      card.performance = {rung.score, rung.score, 0.0};
      b.cards.push_back(std::move(card));
    }
  }
}

}  // namespace

const std::vector<HighManifestRow>& redundant_high_manifest() {
  static const std::vector<HighManifestRow> manifest = [] {
    std::vector<HighManifestRow> rows;
    auto push = [&](TC cat, std::optional<Anatomy> a, std::optional<Modality> m,
                    Variant v = Variant::None, bool opts = true) {
      rows.push_back({cat, a, m, v, opts});
    };
    push(TC::AnatomyClassifier, std::nullopt, std::nullopt);
    push(TC::ModalityClassifier, std::nullopt, std::nullopt);
    const std::array<TC, 6> scoped = {TC::OrganSegmentor,  TC::AnomalyDetector,
                                      TC::ImagingDiagnoser, TC::GroundedDiagnoser,
                                      TC::ReportGenerator, TC::TreatmentPlanner};
    for (TC cat : scoped)
      for (const auto& [a, m] : allowed_combinations()) push(cat, a, m);
    for (TC cat : scoped) push(cat, std::nullopt, std::nullopt);
    for (TC cat : {TC::BiomarkerQuantifier, TC::IndicatorEvaluator})
      for (Variant v : {Variant::Organ, Variant::Anomaly}) {
        push(cat, std::nullopt, std::nullopt, v, true);
        push(cat, std::nullopt, std::nullopt, v, false);
      }
    for (TC cat : {TC::OrganSegmentor, TC::AnomalyDetector, TC::ImagingDiagnoser,
                   TC::GroundedDiagnoser})
      for (Modality m : kAllModalities) push(cat, std::nullopt, m);
    push(TC::TreatmentPlanner, std::nullopt, std::nullopt, Variant::None, false);
    return rows;
  }();
  return manifest;
}

BuildResult build_toolset(Condition condition, uint64_t seed,
                          const PatientRecord& record, TaskType task) {
  const std::string key = std::string(to_string(condition)) + "|" +
                          std::to_string(seed) + "|" + record.record_id() + "|" +
                          std::to_string(task_number(task));
  Builder b{record, ground_truth_spec(task), SplitMix64(fnv1a64(key)), {}};

  BuildResult result;
  switch (condition) {
    case Condition::Baseline: build_baseline(b); break;
    case Condition::RedundantRegular: build_redundant_regular(b); break;
    case Condition::RedundantMedium: build_redundant_medium(b); break;
    case Condition::RedundantHigh: build_redundant_high(b); break;
    case Condition::InsufficientConfig1: result.gap = build_config1(b); break;
    case Condition::InsufficientConfig2: result.gap = build_config2(b); break;
    case Condition::InsufficientConfig3: result.gap = build_config3(b); break;
    case Condition::Differentiated: build_differentiated(b); break;
  }
  result.toolset = b.finish(condition, seed);
  return result;
}

// ---------------------------------------------------------------------------
// Solvability oracle
// ---------------------------------------------------------------------------

namespace {

uint32_t key_bit(InfoKey k) { return 1u << static_cast<int>(k); }

uint32_t initial_bank_mask() {
  return key_bit(InfoKey::Image) | key_bit(InfoKey::Information);
}

bool comp_satisfied(const ToolCard& card, uint32_t bank) {
  for (InfoKey k : card.compulsory_input)
    if (!(bank & key_bit(k))) return false;
  return true;
}

uint32_t apply_outputs(const ToolCard& card, uint32_t bank) {
  for (InfoKey k : card.output) bank |= key_bit(k);
  return bank;
}

struct OracleSearch {
  const ToolSet& toolset;
  const PatientRecord& record;
  long budget = 1'000'000;
  std::set<std::tuple<size_t, uint32_t, int>> visited;

  std::vector<const ToolCard*> applicable_cards;

  explicit OracleSearch(const ToolSet& ts, const PatientRecord& r)
      : toolset(ts), record(r) {
    for (const auto& card : ts.cards) {
      const auto need = r.needed_label(card.category, card.variant);
      if (applicability(card, r.anatomy, r.modality, need) ==
          Applicability::Applicable)
        applicable_cards.push_back(&card);
    }
  }

  bool dfs(const std::vector<ChainUnit>& lin, size_t pos, uint32_t bank, int extras,
           std::vector<std::string>& witness) {
    if (--budget < 0) throw SearchBudgetExceeded("solvability search budget exhausted");
    if (pos == lin.size()) return true;
    if (!visited.insert({pos, bank, extras}).second) return false;
    for (const ToolCard* card : applicable_cards) {
      if (!unit_served_by(lin[pos], *card) || !comp_satisfied(*card, bank)) continue;
      witness.push_back(card->name);
      if (dfs(lin, pos + 1, apply_outputs(*card, bank), extras, witness)) return true;
      witness.pop_back();
    }
    if (extras > 0) {
      for (const ToolCard* card : applicable_cards) {
        if (!comp_satisfied(*card, bank)) continue;
        const uint32_t next = apply_outputs(*card, bank);
        if (next == bank) continue;
        witness.push_back(card->name);
        if (dfs(lin, pos, next, extras - 1, witness)) return true;
        witness.pop_back();
      }
    }
    return false;
  }
};

GroundTruthGap derive_blocking_gap(const ToolSet& toolset, const PatientRecord& record,
                                   const TaskSpec& spec) {
  uint32_t bank = initial_bank_mask();
  for (const auto& unit : spec.canonical_linearization()) {
    std::vector<const ToolCard*> cat_cards;
    for (const auto& card : toolset.cards)
      if (card.category == unit.category) cat_cards.push_back(&card);

    GroundTruthGap gap;
    gap.category = unit.category;
    gap.variant = unit.variant;
    if (cat_cards.empty()) {
      gap.kind = GapKind::CategoryMissing;
      return gap;
    }
    std::vector<const ToolCard*> unit_cards;
    for (const auto* card : cat_cards)
      if (unit_served_by(unit, *card)) unit_cards.push_back(card);
    gap.anatomy = record.anatomy;
    gap.modality = record.modality;
    bool scope_ok_exists = false;
    bool capable_exists = false;
    const ToolCard* usable = nullptr;
    for (const auto* card : unit_cards) {
      const auto need = record.needed_label(card->category, card->variant);
      const auto result = applicability(*card, record.anatomy, record.modality, need);
      if (result != Applicability::WrongScope) scope_ok_exists = true;
      if (result == Applicability::Applicable) {
        capable_exists = true;
        if (comp_satisfied(*card, bank)) usable = card;
      }
    }
    if (unit_cards.empty() || !scope_ok_exists) {
      gap.kind = GapKind::SpecificToolMissing;
      return gap;
    }
    if (!capable_exists) {
      gap.kind = GapKind::InsufficientCapability;
      gap.missing_label = record.needed_label(
          unit.category,
          unit.variant == Variant::None ? Variant::Organ : unit.variant);
      return gap;
    }
    if (!usable) {
      // Applicable tools exist but their inputs cannot be produced. Does not
      // occur for generated sets; reported as a specific-tool gap.
      gap.kind = GapKind::SpecificToolMissing;
      return gap;
    }
    bank = apply_outputs(*usable, bank);
  }
  // No unit individually blocked; also reported as a specific-tool gap on the
  // terminal category.
  GroundTruthGap gap;
  gap.category = spec.terminal_category;
  gap.anatomy = record.anatomy;
  gap.modality = record.modality;
  gap.kind = GapKind::SpecificToolMissing;
  return gap;
}

}  // namespace

SolvabilityVerdict solvability_oracle(const ToolSet& toolset,
                                      const PatientRecord& record, TaskType task) {
  const TaskSpec& spec = ground_truth_spec(task);
  OracleSearch search(toolset, record);
  SolvabilityVerdict verdict;
  for (const auto& lin : spec.linearizations()) {
    search.visited.clear();
    std::vector<std::string> witness;
    if (search.dfs(lin, 0, initial_bank_mask(), 2, witness)) {
      verdict.solvable = true;
      verdict.witness_chain = std::move(witness);
      return verdict;
    }
  }
  verdict.solvable = false;
  verdict.blocking_gap = derive_blocking_gap(toolset, record, spec);
  return verdict;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string toolset_to_json(const ToolSet& ts, int indent) {
  json j;
  j["condition"] = std::string(to_string(ts.condition));
  j["seed"] = ts.seed;
  j["record_id"] = ts.record_id;
  j["task"] = task_number(ts.task);
  json tools;
  for (const auto& card : ts.cards)
    tools[card.name] = json::parse(tool_card_to_json(card));
  j["tools"] = std::move(tools);
  return j.dump(indent);
}

ToolSet toolset_from_json(const std::string& text) {
  const auto j = json::parse(text);
  ToolSet ts;
  const auto condition = parse_condition(j.at("condition").get<std::string>());
  if (!condition) throw Error("unknown condition in toolset json");
  ts.condition = *condition;
  ts.seed = j.at("seed").get<uint64_t>();
  ts.record_id = j.at("record_id").get<std::string>();
  const auto task = task_from_number(j.at("task").get<int>());
  if (!task) throw Error("unknown task in toolset json");
  ts.task = *task;
  for (const auto& [name, card_json] : j.at("tools").items()) {
    (void)name;
    ts.cards.push_back(tool_card_from_json(card_json.dump()));
  }
  std::sort(ts.cards.begin(), ts.cards.end(), [](const auto& a, const auto& b) {
    return tool_index(a.name) < tool_index(b.name);
  });
  return ts;
}

std::string gap_to_json(const GroundTruthGap& gap, int indent) {
  json j;
  j["kind"] = std::string(to_string(gap.kind));
  j["category"] = std::string(to_string(gap.category));
  j["anatomy"] = gap.anatomy ? json(std::string(to_string(*gap.anatomy))) : json(nullptr);
  j["modality"] =
      gap.modality ? json(std::string(to_string(*gap.modality))) : json(nullptr);
  j["missing_label"] = gap.missing_label ? json(*gap.missing_label) : json(nullptr);
  if (gap.variant == Variant::Organ) j["variant"] = "organ";
  else if (gap.variant == Variant::Anomaly) j["variant"] = "anomaly";
  else j["variant"] = nullptr;
  return j.dump(indent);
}

GroundTruthGap gap_from_json(const std::string& text) {
  const auto j = json::parse(text);
  GroundTruthGap gap;
  const auto kind = parse_gap_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error("unknown gap kind");
  gap.kind = *kind;
  const auto cat = resolve_category(j.at("category").get<std::string>());
  if (!cat) throw Error("unknown gap category");
  gap.category = cat->category;
  if (!j.at("anatomy").is_null())
    gap.anatomy = parse_anatomy(j.at("anatomy").get<std::string>());
  if (!j.at("modality").is_null())
    gap.modality = parse_modality(j.at("modality").get<std::string>());
  if (!j.at("missing_label").is_null())
    gap.missing_label = j.at("missing_label").get<std::string>();
  if (j.contains("variant") && !j.at("variant").is_null()) {
    const auto v = j.at("variant").get<std::string>();
    gap.variant = v == "organ" ? Variant::Organ
                : v == "anomaly" ? Variant::Anomaly : Variant::None;
  }
  return gap;
}

std::string render_toolset_for_prompt(const ToolSet& ts) {
  std::string out;
  for (size_t i = 0; i < ts.cards.size(); ++i) {
    out += "\"" + ts.cards[i].name + "\": ";
    out += tool_card_to_json(ts.cards[i]);
    if (i + 1 < ts.cards.size()) out += ",";
    out += "\n";
  }
  return out;
}

}  // namespace radeval
