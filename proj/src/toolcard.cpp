#include "radeval/toolcard.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"

namespace radeval {

namespace {

using K = InfoKey;
using TC = ToolCategory;

std::string scope_phrase(const ToolScope& scope) {
  // "Head and Neck X-ray", "X-ray" (any anatomy), "Spine" (any modality)
  std::string out;
  if (scope.anatomy) out += std::string(to_string(*scope.anatomy));
  if (scope.modality) {
    if (!out.empty()) out += ' ';
    out += std::string(to_string(*scope.modality));
  }
  return out;
}

std::string variant_category_name(ToolCategory c, Variant v) {
  std::string name;
  if (v == Variant::Organ) name = "Organ ";
  else if (v == Variant::Anomaly) name = "Anomaly ";
  name += std::string(to_string(c));
  return name;
}

std::string join_labels(const std::vector<std::string>& labels) {
  std::string out;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += labels[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(LabelKind k) {
  switch (k) {
    case LabelKind::None: return "";
    case LabelKind::Organs: return "Organs";
    case LabelKind::Anomalies: return "Anomalies";
    case LabelKind::Diseases: return "Diseases";
    case LabelKind::Biomarkers: return "Biomarkers";
    case LabelKind::Indicators: return "Indicators";
  }
  return "";
}

LabelKind label_kind_for(ToolCategory c) {
  switch (c) {
    case TC::OrganSegmentor: return LabelKind::Organs;
    case TC::AnomalyDetector: return LabelKind::Anomalies;
    case TC::ImagingDiagnoser:
    case TC::GroundedDiagnoser: return LabelKind::Diseases;
    case TC::BiomarkerQuantifier: return LabelKind::Biomarkers;
    case TC::IndicatorEvaluator: return LabelKind::Indicators;
    default: return LabelKind::None;
  }
}

CategorySignature category_signature(ToolCategory category, const ToolScope& scope,
                                     Variant variant) {
  const bool universal_io = !scope.anatomy && !scope.modality;
  switch (category) {
    case TC::AnatomyClassifier:
      return {{K::Image}, {}, {K::Anatomy}};
    case TC::ModalityClassifier:
      return {{K::Image}, {}, {K::Modality}};
    case TC::OrganSegmentor:
      if (universal_io)
        return {{K::Image, K::Anatomy, K::Modality}, {}, {K::OrganMask, K::OrganObject}};
      return {{K::Image}, {}, {K::OrganMask, K::OrganObject}};
    case TC::AnomalyDetector:
      if (universal_io)
        return {{K::Image, K::Anatomy, K::Modality}, {}, {K::AnomalyMask, K::AnomalyObject}};
      return {{K::Image}, {}, {K::AnomalyMask, K::AnomalyObject}};
    case TC::ImagingDiagnoser:
      if (universal_io)
        return {{K::Image, K::Anatomy, K::Modality}, {}, {K::Disease}};
      return {{K::Image}, {}, {K::Disease}};
    case TC::GroundedDiagnoser:
      return {{K::Image, K::OrganMask, K::OrganObject, K::AnomalyMask, K::AnomalyObject},
              {},
              {K::Disease}};
    case TC::BiomarkerQuantifier:
      if (variant == Variant::Anomaly)
        return {{K::Image, K::AnomalyObject, K::AnomalyMask},
                {K::Anatomy, K::Modality},
                {K::AnomalyDim, K::AnomalyQuant}};
      return {{K::Image, K::OrganObject, K::OrganMask},
              {K::Anatomy, K::Modality},
              {K::OrganDim, K::OrganQuant}};
    case TC::IndicatorEvaluator:
      if (variant == Variant::Anomaly)
        return {{K::Information, K::AnomalyObject, K::AnomalyQuant},
                {K::AnomalyDim},
                {K::IndicatorName, K::IndicatorValue}};
      return {{K::Information, K::OrganObject, K::OrganQuant},
              {K::OrganDim},
              {K::IndicatorName, K::IndicatorValue}};
    case TC::ReportGenerator: {
      const std::vector<K> opts = {K::Information, K::OrganObject, K::AnomalyObject,
                                   K::Disease,     K::OrganDim,    K::OrganQuant,
                                   K::AnomalyDim,  K::AnomalyQuant, K::IndicatorName,
                                   K::IndicatorValue, K::OrganMask, K::AnomalyMask};
      if (universal_io)
        return {{K::Image, K::Anatomy, K::Modality}, opts, {K::Report}};
      return {{K::Image}, opts, {K::Report}};
    }
    case TC::TreatmentPlanner: {
      const std::vector<K> opts = {K::OrganMask,   K::OrganObject,  K::AnomalyMask,
                                   K::AnomalyObject, K::OrganDim,   K::OrganQuant,
                                   K::AnomalyDim,  K::AnomalyQuant, K::IndicatorName,
                                   K::IndicatorValue, K::Report};
      return {{K::Image, K::Information, K::Modality, K::Anatomy, K::Disease}, opts,
              {K::Treatment}};
    }
  }
  return {};
}

Performance default_performance(ToolCategory category, bool scope_specific) {
  switch (category) {
    case TC::AnatomyClassifier:
    case TC::ModalityClassifier: return {0.95, 0.95, 0.0};
    case TC::OrganSegmentor: return scope_specific ? Performance{0.85, 0.85, 0.0}
                                                   : Performance{0.8, 0.8, 0.0};
    case TC::AnomalyDetector: return scope_specific ? Performance{0.8, 0.8, 0.0}
                                                    : Performance{0.75, 0.75, 0.0};
    case TC::ImagingDiagnoser: return scope_specific ? Performance{0.75, 0.75, 0.0}
                                                     : Performance{0.7, 0.7, 0.0};
    case TC::GroundedDiagnoser: return scope_specific ? Performance{0.8, 0.8, 0.0}
                                                      : Performance{0.75, 0.75, 0.0};
    case TC::BiomarkerQuantifier:
      // Two optional inputs; the range covers exactly step * |optional|.
      return scope_specific ? Performance{0.8, 0.85, 0.025}
                            : Performance{0.75, 0.8, 0.025};
    case TC::IndicatorEvaluator: return scope_specific ? Performance{0.75, 0.8, 0.05}
                                                       : Performance{0.7, 0.75, 0.05};
    case TC::ReportGenerator: return scope_specific ? Performance{0.4, 0.88, 0.04}
                                                    : Performance{0.4, 0.76, 0.03};
    case TC::TreatmentPlanner: return scope_specific ? Performance{0.55, 0.88, 0.03}
                                                     : Performance{0.5, 0.83, 0.03};
  }
  return {};
}

std::string ability_text(ToolCategory category, const ToolScope& scope,
                         Variant variant, const std::vector<std::string>& labels) {
  const bool specific = scope.anatomy || scope.modality;
  const std::string where = scope_phrase(scope);
  std::string text;
  switch (category) {
    case TC::AnatomyClassifier: text = "Determine the anatomy of the Image."; break;
    case TC::ModalityClassifier: text = "Determine the modality of the Image."; break;
    case TC::OrganSegmentor:
      text = specific ? "Given the " + where + " Image, segment the organs."
                      : "Given the modality and anatomy, segment the organs.";
      break;
    case TC::AnomalyDetector:
      text = specific
                 ? "Given the " + where +
                       " Image, determine the location and type of abnormality."
                 : "Given the modality and anatomy, determine the location and "
                   "type of abnormality.";
      break;
    case TC::ImagingDiagnoser:
      text = specific ? "Given the " + where + " Image, diagnose the disease."
                      : "Given the modality and anatomy, diagnose the disease.";
      break;
    case TC::GroundedDiagnoser:
      text = specific ? "Given the " + where +
                            " Image, infer the disease based on organ "
                            "segmentation and anomaly detection results."
                      : "Infer disease based on organ segmentation and anomaly "
                        "detection results.";
      break;
    case TC::BiomarkerQuantifier: {
      const char* kind = variant == Variant::Anomaly ? "anomaly" : "organ";
      text = specific ? "Given the " + where + " Image, measure the " + kind +
                            " biomarker."
                      : std::string("Measure the ") + kind + " biomarker of the Image.";
      break;
    }
    case TC::IndicatorEvaluator: {
      const char* kind = variant == Variant::Anomaly ? "anomaly" : "organ";
      text = std::string("Use prior patient information and ") + kind +
             " biomarker values to calculate the indicator.";
      break;
    }
    case TC::ReportGenerator:
      text = specific ? "Given the " + where +
                            " Image, any other text information and organ/anomaly "
                            "masks and labels, generate a radiology report."
                      : "Given the modality and anatomy, any other text "
                        "information and organ/anomaly masks and labels, "
                        "generate a radiology report.";
      break;
    case TC::TreatmentPlanner:
      text = "Recommend personalized treatment plans based on all results "
             "processed by former tools and the patient's information.";
      break;
  }
  if (!labels.empty()) {
    std::string domain(to_string(label_kind_for(category)));
    std::transform(domain.begin(), domain.end(), domain.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    text += " Supported " + domain + ": " + join_labels(labels) + ".";
  }
  return text;
}

std::string property_text(ToolCategory category, const ToolScope& scope,
                          Variant variant) {
  const std::string name = variant_category_name(category, variant);
  if (scope.universal()) return "Universal " + name;
  std::string text = name + " only suitable for " + scope_phrase(scope) + " image";
  if (category == TC::ReportGenerator) text += " with Text and Mask";
  return text;
}

ToolCard make_tool_card(std::string name, ToolCategory category, ToolScope scope,
                        Variant variant, const MakeCardOptions& opts) {
  ToolCard card;
  card.name = std::move(name);
  card.category = category;
  card.variant = variant;
  card.scope = scope;
  card.capability_labels = opts.labels;
  auto sig = category_signature(category, scope, variant);
  card.compulsory_input = std::move(sig.compulsory);
  card.output = std::move(sig.output);
  if (opts.include_optionals) card.optional_input = std::move(sig.optional);
  const bool specific = scope.anatomy || scope.modality;
  card.performance = default_performance(category, specific);
  if (card.optional_input.empty()) {
    card.performance.upper = card.performance.lower;
    card.performance.step = 0.0;
  }
  card.ability = ability_text(category, scope, variant, card.capability_labels);
  card.property = property_text(category, scope, variant);
  return card;
}

double performance_score(const ToolCard& card, int provided_optional_count) {
  if (provided_optional_count < 0 ||
      provided_optional_count > static_cast<int>(card.optional_input.size()))
    throw Error("CountOutOfRange: optional count " +
                std::to_string(provided_optional_count) + " for " + card.name);
  return std::min(card.performance.upper,
                  card.performance.lower +
                      card.performance.step * provided_optional_count);
}

Applicability applicability(const ToolCard& card, Anatomy anatomy, Modality modality,
                            const std::optional<std::string>& need) {
  if (card.scope.anatomy && *card.scope.anatomy != anatomy)
    return Applicability::WrongScope;
  if (card.scope.modality && *card.scope.modality != modality)
    return Applicability::WrongScope;
  if (need && !card.capability_labels.empty()) {
    const auto match = std::find_if(
        card.capability_labels.begin(), card.capability_labels.end(),
        [&](const std::string& l) {
          return std::equal(l.begin(), l.end(), need->begin(), need->end(),
                            [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                            }) && l.size() == need->size();
        });
    if (match == card.capability_labels.end())
      return Applicability::InsufficientCapability;
  }
  return Applicability::Applicable;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

namespace {

std::string render_key_list(const std::vector<InfoKey>& keys) {
  if (keys.empty()) return "[]";
  std::string out = "[";
  for (size_t i = 0; i < keys.size(); ++i) {
    if (i) out += ", ";
    out += "'";
    out += std::string(to_string(keys[i]));
    out += "'";
  }
  out += "]";
  return out;
}

std::vector<InfoKey> parse_key_list(const std::string& text) {
  std::vector<InfoKey> keys;
  size_t pos = 0;
  while (true) {
    const size_t open = text.find('$', pos);
    if (open == std::string::npos) break;
    const size_t close = text.find('$', open + 1);
    if (close == std::string::npos) break;
    const auto token = text.substr(open, close - open + 1);
    const auto key = parse_info_key(token);
    if (!key) throw Error("unknown info key in list: " + token);
    keys.push_back(*key);
    pos = close + 1;
  }
  return keys;
}

}  // namespace

std::string render_tool_card(const ToolCard& card) {
  std::string out;
  out += "=== Tool Description for " + card.name + " ===\n";
  out += "Name: " + card.name + "\n";
  out += "Category: " + std::string(to_string(card.category)) + "\n";
  out += "Ability: " + card.ability + "\n";
  out += "Property: " + card.property + "\n";
  out += "Compulsory Input: " + render_key_list(card.compulsory_input) + "\n";
  out += "Optional Input: " + render_key_list(card.optional_input) + "\n";
  out += "Output: " + render_key_list(card.output) + "\n";
  out += "Performance: Score from " + format_score(card.performance.lower) +
         " to " + format_score(card.performance.upper) +
         ", increases with optional inputs\n";
  return out;
}

namespace {

// Scope recovery from the canonical property string.
ToolScope scope_from_property(const std::string& property) {
  ToolScope scope;
  if (property.rfind("Universal ", 0) == 0) return scope;
  const std::string marker = " only suitable for ";
  const size_t at = property.find(marker);
  if (at == std::string::npos) return scope;
  size_t start = at + marker.size();
  size_t end = property.find(" image", start);
  if (end == std::string::npos) end = property.size();
  const std::string where = property.substr(start, end - start);
  if (auto m = parse_modality(where)) {
    scope.modality = m;
    return scope;
  }
  if (auto a = parse_anatomy(where)) {
    scope.anatomy = a;
    return scope;
  }
  // "<anatomy> <modality>": modality is the last space-separated token.
  const size_t sp = where.rfind(' ');
  if (sp != std::string::npos) {
    scope.anatomy = parse_anatomy(where.substr(0, sp));
    scope.modality = parse_modality(where.substr(sp + 1));
  }
  return scope;
}

Variant variant_from_property(ToolCategory category, const std::string& property) {
  if (category != TC::BiomarkerQuantifier && category != TC::IndicatorEvaluator)
    return Variant::None;
  if (property.find("Anomaly " + std::string(to_string(category))) != std::string::npos)
    return Variant::Anomaly;
  if (property.find("Organ " + std::string(to_string(category))) != std::string::npos)
    return Variant::Organ;
  return Variant::None;
}

std::vector<std::string> labels_from_ability(const std::string& ability) {
  const size_t at = ability.find("Supported ");
  if (at == std::string::npos) return {};
  const size_t colon = ability.find(": ", at);
  if (colon == std::string::npos) return {};
  std::string body = ability.substr(colon + 2);
  if (!body.empty() && body.back() == '.') body.pop_back();
  std::vector<std::string> labels;
  size_t pos = 0;
  while (pos <= body.size()) {
    const size_t comma = body.find(", ", pos);
    if (comma == std::string::npos) {
      if (pos < body.size()) labels.push_back(body.substr(pos));
      break;
    }
    labels.push_back(body.substr(pos, comma - pos));
    pos = comma + 2;
  }
  return labels;
}

double quantized_step(const Performance& perf, size_t optional_count) {
  if (optional_count == 0 || perf.upper <= perf.lower) return 0.0;
  const double raw = (perf.upper - perf.lower) / static_cast<double>(optional_count);
  return std::round(raw * 1000.0) / 1000.0;
}

}  // namespace

ToolCard parse_tool_card(const std::string& text) {
  auto field = [&](const std::string& label) -> std::string {
    const std::string needle = label + ": ";
    const size_t at = text.find(needle);
    if (at == std::string::npos) throw Error("tool card missing field: " + label);
    const size_t end = text.find('\n', at);
    return text.substr(at + needle.size(),
                       (end == std::string::npos ? text.size() : end) -
                           at - needle.size());
  };

  ToolCard card;
  card.name = field("Name");
  const auto resolved = resolve_category(field("Category"));
  if (!resolved) throw Error("tool card has unknown category");
  card.category = resolved->category;
  card.ability = field("Ability");
  card.property = field("Property");
  card.compulsory_input = parse_key_list(field("Compulsory Input"));
  card.optional_input = parse_key_list(field("Optional Input"));
  card.output = parse_key_list(field("Output"));
  card.scope = scope_from_property(card.property);
  card.variant = variant_from_property(card.category, card.property);
  if (card.variant == Variant::None && resolved->variant != Variant::None)
    card.variant = resolved->variant;
  card.capability_labels = labels_from_ability(card.ability);

  const std::string perf_line = field("Performance");
  double lower = 0, upper = 0;
  if (std::sscanf(perf_line.c_str(), "Score from %lf to %lf", &lower, &upper) != 2)
    throw Error("tool card has malformed performance line: " + perf_line);
  card.performance.lower = lower;
  card.performance.upper = upper;
  card.performance.step = quantized_step(card.performance, card.optional_input.size());
  return card;
}

std::string tool_card_to_json(const ToolCard& card, int indent) {
  nlohmann::ordered_json j;
  j["Name"] = card.name;
  j["Category"] = std::string(to_string(card.category));
  j["Property"] = card.property;
  j["Ability"] = card.ability;
  auto keys = [](const std::vector<InfoKey>& ks) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (auto k : ks) arr.push_back(std::string(to_string(k)));
    return arr;
  };
  j["Compulsory Input"] = keys(card.compulsory_input);
  j["Optional Input"] = keys(card.optional_input);
  j["Output"] = keys(card.output);
  j["lower_bound"] = card.performance.lower;
  j["upper_bound"] = card.performance.upper;
  j["step"] = card.performance.step;
  j["Performance"] = "Score from " + format_score(card.performance.lower) + " to " +
                     format_score(card.performance.upper) +
                     ", increases with optional inputs";
  j["Anatomy"] = card.scope.anatomy
                     ? nlohmann::ordered_json(std::string(to_string(*card.scope.anatomy)))
                     : nlohmann::ordered_json(nullptr);
  j["Modality"] = card.scope.modality
                      ? nlohmann::ordered_json(std::string(to_string(*card.scope.modality)))
                      : nlohmann::ordered_json(nullptr);
  for (LabelKind kind : {LabelKind::Organs, LabelKind::Anomalies, LabelKind::Diseases,
                         LabelKind::Biomarkers, LabelKind::Indicators}) {
    const auto name = std::string(to_string(kind));
    if (!card.capability_labels.empty() && label_kind_for(card.category) == kind)
      j[name] = card.capability_labels;
    else
      j[name] = nullptr;
  }
  if (card.variant == Variant::Organ) j["type"] = "organ";
  else if (card.variant == Variant::Anomaly) j["type"] = "anomaly";
  else j["type"] = nullptr;
  return j.dump(indent);
}

ToolCard tool_card_from_json(const std::string& json_text) {
  const auto j = nlohmann::ordered_json::parse(json_text);
  ToolCard card;
  card.name = j.at("Name").get<std::string>();
  const auto resolved = resolve_category(j.at("Category").get<std::string>());
  if (!resolved) throw Error("tool card json has unknown category");
  card.category = resolved->category;
  card.property = j.at("Property").get<std::string>();
  card.ability = j.at("Ability").get<std::string>();
  auto keys = [&](const char* name) {
    std::vector<InfoKey> ks;
    for (const auto& item : j.at(name)) {
      const auto key = parse_info_key(item.get<std::string>());
      if (!key) throw Error("tool card json has unknown info key");
      ks.push_back(*key);
    }
    return ks;
  };
  card.compulsory_input = keys("Compulsory Input");
  card.optional_input = keys("Optional Input");
  card.output = keys("Output");
  card.performance.lower = j.at("lower_bound").get<double>();
  card.performance.upper = j.at("upper_bound").get<double>();
  card.performance.step = j.at("step").get<double>();
  if (!j.at("Anatomy").is_null())
    card.scope.anatomy = parse_anatomy(j.at("Anatomy").get<std::string>());
  if (!j.at("Modality").is_null())
    card.scope.modality = parse_modality(j.at("Modality").get<std::string>());
  for (const char* name : {"Organs", "Anomalies", "Diseases", "Biomarkers", "Indicators"})
    if (j.contains(name) && !j.at(name).is_null())
      card.capability_labels = j.at(name).get<std::vector<std::string>>();
  if (j.contains("type") && !j.at("type").is_null()) {
    const auto t = j.at("type").get<std::string>();
    card.variant = t == "organ" ? Variant::Organ
                 : t == "anomaly" ? Variant::Anomaly : Variant::None;
  } else {
    card.variant = variant_from_property(card.category, card.property);
  }
  return card;
}

void validate_tool_card(const ToolCard& card) {
  if (card.name.rfind("TOOL", 0) != 0)
    throw Error("tool name must look like TOOLn: " + card.name);
  const auto& perf = card.performance;
  if (perf.lower > perf.upper)
    throw Error(card.name + ": lower bound above upper bound");
  if (perf.lower < 0.0 || perf.upper > 1.0)
    throw Error(card.name + ": performance outside [0,1]");
  if (!card.optional_input.empty() &&
      perf.upper - perf.lower > perf.step * card.optional_input.size() + 1e-9)
    throw Error(card.name + ": range not covered by step * optional count");
  std::set<InfoKey> seen;
  for (const auto* list : {&card.compulsory_input, &card.optional_input, &card.output})
    for (InfoKey k : *list)
      if (!seen.insert(k).second)
        throw Error(card.name + ": IO lists are not pairwise disjoint (" +
                    std::string(to_string(k)) + ")");
}

}  // namespace radeval
