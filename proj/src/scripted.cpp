#include <algorithm>
#include <set>

#include "radeval/backend.hpp"
#include "radeval/session.hpp"

namespace radeval {

namespace {

using TC = ToolCategory;

uint32_t key_bit(InfoKey k) { return 1u << static_cast<int>(k); }

bool comp_in_mask(const ToolCard& card, uint32_t mask) {
  for (InfoKey k : card.compulsory_input)
    if (!(mask & key_bit(k))) return false;
  return true;
}

std::string render_key_list(const std::vector<InfoKey>& keys) {
  std::string out = "[";
  for (size_t i = 0; i < keys.size(); ++i) {
    if (i) out += ", ";
    out += "'" + std::string(to_string(keys[i])) + "'";
  }
  return out + "]";
}

/// Capability phrase for a blocked unit; label containment feeds the builder.
std::string blocked_purpose(const ChainUnit& unit,
                            const std::optional<std::string>& label) {
  std::string noun;
  switch (unit.category) {
    case TC::AnatomyClassifier: noun = "anatomy"; break;
    case TC::ModalityClassifier: noun = "modality"; break;
    case TC::OrganSegmentor: noun = "organs"; break;
    case TC::AnomalyDetector: noun = "anomalies"; break;
    case TC::ImagingDiagnoser:
    case TC::GroundedDiagnoser: noun = "disease"; break;
    case TC::BiomarkerQuantifier: noun = "biomarker"; break;
    case TC::IndicatorEvaluator: noun = "indicator"; break;
    case TC::ReportGenerator: noun = "report"; break;
    case TC::TreatmentPlanner: noun = "treatment plan"; break;
  }
  if (label) return noun + " " + *label;
  return noun;
}

struct NoCallFields {
  ToolCategory category;
  std::optional<Anatomy> anatomy;
  std::optional<Modality> modality;
  std::string ability;
  std::string purpose;
};

/// Grounded denial fields for a chain unit no available tool can serve,
/// derived from the tool set the same way the blocked agent would see it.
NoCallFields grounded_denial(const ChainUnit& unit, const SessionView& view) {
  NoCallFields f;
  f.category = unit.category;
  f.ability = "SpecificToolMissing";
  const auto& record = *view.record;
  bool category_present = false;
  bool scope_ok = false;
  for (const auto& card : view.toolset->cards) {
    if (card.category != unit.category) continue;
    category_present = true;
    if (unit.variant != Variant::None && card.variant != unit.variant &&
        card.variant != Variant::None)
      continue;
    if (!card.scope.anatomy || *card.scope.anatomy == record.anatomy)
      if (!card.scope.modality || *card.scope.modality == record.modality)
        scope_ok = true;
  }
  std::optional<std::string> label;
  if (!category_present) {
    f.ability = "CategoryMissing";
  } else if (scope_ok) {
    f.ability = "InsufficientCapability";
    f.anatomy = record.anatomy;
    f.modality = record.modality;
    label = record.needed_label(
        unit.category, unit.variant == Variant::None ? Variant::Organ : unit.variant);
  } else {
    f.anatomy = record.anatomy;
    f.modality = record.modality;
  }
  f.purpose = blocked_purpose(unit, label);
  return f;
}

std::string render_nocall(const NoCallFields& f) {
  std::string out = "<NoCall>\n";
  out += "    <Purpose>" + f.purpose + "</Purpose>\n";
  out += "    <Category>" + std::string(to_string(f.category)) + "</Category>\n";
  out += "    <Anatomy>" +
         (f.anatomy ? std::string(to_string(*f.anatomy)) : "Universal") +
         "</Anatomy>\n";
  out += "    <Modality>" +
         (f.modality ? std::string(to_string(*f.modality)) : "Universal") +
         "</Modality>\n";
  out += "    <Ability>" + f.ability + "</Ability>\n";
  out += "</NoCall>";
  return out;
}

struct PlannedStep {
  const ToolCard* tool = nullptr;  // null when the step is blocked
  ChainUnit unit;
  bool substituted = false;
};

/// Deterministic execution plan against the live tool set: the best applicable
/// tool per chain unit, with optional wrong-category substitution of the last
/// k steps.
std::vector<PlannedStep> plan_steps(const SessionView& view, int deviant_k) {
  const TaskSpec& spec = ground_truth_spec(view.qa->task);
  const auto lin = spec.canonical_linearization();
  std::set<TC> gt_categories;
  for (const auto& u : lin) gt_categories.insert(u.category);

  std::vector<PlannedStep> plan;
  uint32_t mask = key_bit(InfoKey::Image) | key_bit(InfoKey::Information);
  for (size_t idx = 0; idx < lin.size(); ++idx) {
    PlannedStep step;
    step.unit = lin[idx];
    const bool deviate = deviant_k > 0 && idx >= lin.size() - deviant_k;
    if (deviate) {
      // Substitution preference is fixed so runs replay identically.
      for (TC cat : {TC::ImagingDiagnoser, TC::GroundedDiagnoser, TC::OrganSegmentor,
                     TC::AnomalyDetector, TC::ReportGenerator, TC::TreatmentPlanner}) {
        if (gt_categories.count(cat)) continue;
        const auto cands =
            view.toolset->applicable_for(ChainUnit{cat, Variant::None}, *view.record);
        const ToolCard* fit = nullptr;
        for (const auto* c : cands)
          if (comp_in_mask(*c, mask)) { fit = c; break; }
        if (fit) {
          step.tool = fit;
          step.substituted = true;
          break;
        }
      }
    }
    if (!step.tool) {
      const auto cands = view.toolset->applicable_for(step.unit, *view.record);
      for (const auto* c : cands)
        if (comp_in_mask(*c, mask)) { step.tool = c; break; }
      step.substituted = false;
    }
    if (step.tool)
      for (InfoKey k : step.tool->output) mask |= key_bit(k);
    plan.push_back(step);
    if (!step.tool) break;  // blocked; later steps are unreachable
  }
  return plan;
}

enum class PromptKind { Decompose, Step, Conclude };

PromptKind classify_prompt(const ChatHistory& history) {
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (it->role != "user") continue;
    const std::string& text = it->content;
    if (text.find("# Next Step Planning") != std::string::npos)
      return PromptKind::Step;
    if (text.find("Based on your Part 1 analysis plan") != std::string::npos ||
        text.find("\nAnswer:") != std::string::npos)
      return PromptKind::Conclude;
    return PromptKind::Decompose;
  }
  return PromptKind::Decompose;
}

class ScriptedCore : public Backend {
 public:
  explicit ScriptedCore(std::string identity) : identity_(std::move(identity)) {}

  std::string identity() const override { return identity_; }
  bool deterministic() const override { return true; }

  std::string send(const ChatHistory& history, const SessionView& view) override {
    switch (classify_prompt(history)) {
      case PromptKind::Decompose: return decompose(view);
      case PromptKind::Step: return step(view);
      case PromptKind::Conclude: return conclude(view);
    }
    return "";
  }

 protected:
  virtual int deviant_k() const { return 0; }

  virtual std::string decompose(const SessionView& view) {
    const auto plan = plan_steps(view, deviant_k());
    std::string chain;
    for (size_t i = 0; i < plan.size(); ++i) {
      if (i) chain += " -> ";
      const auto& s = plan[i];
      if (s.tool && s.substituted)
        chain += "*" + prompt_tool_name(s.tool->category, s.tool->variant) + "*";
      else
        chain += "*" + prompt_tool_name(s.unit.category, s.unit.variant) + "*";
    }
    return "Known Info: []\nTool Chain: [" + chain + "]";
  }

  virtual std::string step(const SessionView& view) {
    const auto plan = plan_steps(view, deviant_k());
    const size_t idx = static_cast<size_t>(view.executed_steps);
    if (idx >= plan.size())
      return render_nocall(grounded_denial(plan.back().unit, view));
    const auto& planned = plan[idx];
    if (!planned.tool) return render_nocall(grounded_denial(planned.unit, view));
    const bool terminal = idx + 1 == plan.size();
    return render_call(planned, view, terminal, chosen_inputs(planned, view));
  }

  virtual std::string conclude(const SessionView& view) { return view.qa->answer; }

  virtual std::vector<InfoKey> chosen_inputs(const PlannedStep& planned,
                                             const SessionView& view) const {
    std::vector<InfoKey> inputs = planned.tool->compulsory_input;
    for (InfoKey k : planned.tool->optional_input)
      if (view.bank->contains(k)) inputs.push_back(k);
    return inputs;
  }

  std::string render_call(const PlannedStep& planned, const SessionView& view,
                          bool terminal, const std::vector<InfoKey>& inputs) const {
    const char* tag = terminal ? "EndCall" : "Call";
    std::string purpose =
        "Apply the " + std::string(to_string(planned.tool->category)) +
        " to the current case";
    std::string out;
    out += "<Reflection>\n";
    out += "    <Candidates>" + planned.tool->name + "</Candidates>\n";
    out += "    <Reasoning>" + planned.tool->name +
           " is the best scoring applicable tool for this step.</Reasoning>\n";
    out += "    <Constraints>Inputs restricted to the current results "
           "dictionary.</Constraints>\n";
    out += "</Reflection>\n";
    out += std::string("<") + tag + ">\n";
    out += "    <Purpose>" + purpose + "</Purpose>\n";
    out += "    <Tool>" + planned.tool->name + "</Tool>\n";
    out += "    <Input>" + render_key_list(inputs) + "</Input>\n";
    out += std::string("</") + tag + ">";
    (void)view;
    return out;
  }

 private:
  std::string identity_;
};

class DeviantCore : public ScriptedCore {
 public:
  explicit DeviantCore(int k)
      : ScriptedCore("scripted:deviant:" + std::to_string(k)), k_(k) {}

 protected:
  int deviant_k() const override { return k_; }

 private:
  int k_;
};

class ClumsyCore : public ScriptedCore {
 public:
  explicit ClumsyCore(int j)
      : ScriptedCore("scripted:clumsy:" + std::to_string(j)), j_(j) {}

 protected:
  std::string step(const SessionView& view) override {
    if (view.step_prompts_seen != j_) return ScriptedCore::step(view);
    const auto plan = plan_steps(view, 0);
    const size_t idx = static_cast<size_t>(view.executed_steps);
    if (idx >= plan.size() || !plan[idx].tool) return ScriptedCore::step(view);
    // Omit one compulsory input; everything listed still exists in the bank.
    auto inputs = chosen_inputs(plan[idx], view);
    const auto& comp = plan[idx].tool->compulsory_input;
    if (!comp.empty()) {
      const InfoKey omitted = comp.back();
      inputs.erase(std::remove(inputs.begin(), inputs.end(), omitted), inputs.end());
    }
    const bool terminal = idx + 1 == plan.size();
    return render_call(plan[idx], view, terminal, inputs);
  }

 private:
  int j_;
};

class RefuserCore : public ScriptedCore {
 public:
  explicit RefuserCore(RefuserFields fields)
      : ScriptedCore("scripted:refuser"), fields_(std::move(fields)) {}

 protected:
  std::string step(const SessionView& view) override {
    NoCallFields f;
    f.category = fields_.category.value_or(
        ground_truth_spec(view.qa->task).terminal_category);
    f.anatomy = fields_.anatomy;
    f.modality = fields_.modality;
    f.ability = fields_.ability.value_or("CategoryMissing");
    f.purpose = blocked_purpose(ChainUnit{f.category, Variant::None}, std::nullopt);
    return render_nocall(f);
  }

 private:
  RefuserFields fields_;
};

/// Plays like the oracle but reports deliberately wrong denial fields.
class MisgroundedCore : public ScriptedCore {
 public:
  explicit MisgroundedCore(RefuserFields overrides)
      : ScriptedCore("scripted:misgrounded"), overrides_(std::move(overrides)) {}

 protected:
  std::string step(const SessionView& view) override {
    const auto plan = plan_steps(view, 0);
    const size_t idx = static_cast<size_t>(view.executed_steps);
    if (idx < plan.size() && plan[idx].tool) return ScriptedCore::step(view);
    const ChainUnit unit = idx < plan.size() ? plan[idx].unit : plan.back().unit;
    NoCallFields f = grounded_denial(unit, view);
    if (overrides_.category) f.category = *overrides_.category;
    else f.category = wrong_category(f.category);
    if (overrides_.ability) f.ability = *overrides_.ability;
    if (overrides_.anatomy) f.anatomy = overrides_.anatomy;
    if (overrides_.modality) f.modality = overrides_.modality;
    f.purpose = blocked_purpose(ChainUnit{f.category, Variant::None}, std::nullopt);
    return render_nocall(f);
  }

 private:
  static ToolCategory wrong_category(ToolCategory right) {
    const auto next = (static_cast<size_t>(right) + 1) % kAllCategories.size();
    return kAllCategories[next];
  }
  RefuserFields overrides_;
};

class EchoCore : public Backend {
 public:
  std::string identity() const override { return "scripted:echo"; }
  bool deterministic() const override { return true; }
  std::string send(const ChatHistory& history, const SessionView&) override {
    for (auto it = history.rbegin(); it != history.rend(); ++it)
      if (it->role == "user") return it->content;
    return "";
  }
};

}  // namespace

std::unique_ptr<Backend> make_oracle_backend() {
  return std::make_unique<ScriptedCore>("scripted:oracle");
}

std::unique_ptr<Backend> make_deviant_backend(int k) {
  return std::make_unique<DeviantCore>(k);
}

std::unique_ptr<Backend> make_clumsy_backend(int j) {
  return std::make_unique<ClumsyCore>(j);
}

std::unique_ptr<Backend> make_refuser_backend(RefuserFields fields) {
  return std::make_unique<RefuserCore>(std::move(fields));
}

std::unique_ptr<Backend> make_misgrounded_backend(RefuserFields overrides) {
  return std::make_unique<MisgroundedCore>(std::move(overrides));
}

std::unique_ptr<Backend> make_echo_backend() {
  return std::make_unique<EchoCore>();
}

std::unique_ptr<Backend> make_scripted_backend(const std::string& spec) {
  auto field = [&](size_t n) -> std::string {
    size_t start = 0;
    for (size_t i = 0; i < n; ++i) {
      start = spec.find(':', start);
      if (start == std::string::npos) return "";
      ++start;
    }
    const size_t end = spec.find(':', start);
    return spec.substr(start, end == std::string::npos ? std::string::npos
                                                       : end - start);
  };
  const std::string kind = field(1);
  if (kind == "oracle") return make_oracle_backend();
  if (kind == "deviant") return make_deviant_backend(std::max(1, std::atoi(field(2).c_str())));
  if (kind == "clumsy") return make_clumsy_backend(std::max(1, std::atoi(field(2).c_str())));
  if (kind == "refuser") return make_refuser_backend();
  if (kind == "misgrounded") return make_misgrounded_backend({});
  if (kind == "echo") return make_echo_backend();
  throw Error("unknown scripted backend: " + spec);
}

}  // namespace radeval
