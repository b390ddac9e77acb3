#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace radeval {

// ---------------------------------------------------------------------------
// Anatomy / Modality
// ---------------------------------------------------------------------------

enum class Anatomy { HeadAndNeck, Chest, Breast, AbdomenAndPelvis, Limb, Spine };
enum class Modality { XRay, CT, MRI, Ultrasound, Mammography };

inline constexpr std::array<Anatomy, 6> kAllAnatomies = {
    Anatomy::HeadAndNeck, Anatomy::Chest,  Anatomy::Breast,
    Anatomy::AbdomenAndPelvis, Anatomy::Limb, Anatomy::Spine};

inline constexpr std::array<Modality, 5> kAllModalities = {
    Modality::XRay, Modality::CT, Modality::MRI, Modality::Ultrasound,
    Modality::Mammography};

std::string_view to_string(Anatomy a);
std::string_view to_string(Modality m);
std::optional<Anatomy> parse_anatomy(std::string_view text);
std::optional<Modality> parse_modality(std::string_view text);

/// The 22 allowed anatomy-modality combinations.
bool combination_allowed(Anatomy a, Modality m);
const std::vector<std::pair<Anatomy, Modality>>& allowed_combinations();

// ---------------------------------------------------------------------------
// Information keys (the dollar-wrapped placeholder vocabulary)
// ---------------------------------------------------------------------------

enum class InfoKey : uint8_t {
  Image,
  Information,
  Anatomy,
  Modality,
  Disease,
  OrganObject,
  OrganDim,
  OrganQuant,
  AnomalyObject,
  AnomalyDim,
  AnomalyQuant,
  IndicatorName,
  IndicatorValue,
  Report,
  Treatment,
  OrganMask,
  AnomalyMask,
};

inline constexpr int kInfoKeyCount = 17;

/// Serialized form, always dollar-wrapped ("$Image$").
std::string_view to_string(InfoKey k);
std::optional<InfoKey> parse_info_key(std::string_view dollar_wrapped);

// ---------------------------------------------------------------------------
// Tool categories
// ---------------------------------------------------------------------------

enum class ToolCategory : uint8_t {
  AnatomyClassifier,
  ModalityClassifier,
  OrganSegmentor,
  AnomalyDetector,
  ImagingDiagnoser,
  GroundedDiagnoser,
  BiomarkerQuantifier,
  IndicatorEvaluator,
  ReportGenerator,
  TreatmentPlanner,
};

inline constexpr std::array<ToolCategory, 10> kAllCategories = {
    ToolCategory::AnatomyClassifier,   ToolCategory::ModalityClassifier,
    ToolCategory::OrganSegmentor,      ToolCategory::AnomalyDetector,
    ToolCategory::ImagingDiagnoser,    ToolCategory::GroundedDiagnoser,
    ToolCategory::BiomarkerQuantifier, ToolCategory::IndicatorEvaluator,
    ToolCategory::ReportGenerator,     ToolCategory::TreatmentPlanner,
};

/// Organ/anomaly flavor of Biomarker Quantifier and Indicator Evaluator cards.
enum class Variant : uint8_t { None, Organ, Anomaly };

/// Canonical display name ("Anatomy Classifier", "Imaging Diagnoser", ...).
std::string_view to_string(ToolCategory c);
std::string_view abbrev(ToolCategory c);  // "AC", "MC", ...

struct ResolvedCategory {
  ToolCategory category;
  Variant variant;  // Organ/Anomaly when the alias implies one, else None
};

/// Resolves any category string used in the prompts and case studies
/// ("Disease Inference Tool", "Treatment Recommender", "Organ Biomarker
/// Quantification Tool", ...). Case-insensitive, whitespace-tolerant.
std::optional<ResolvedCategory> resolve_category(std::string_view alias);

/// Starred name used in decomposition prompts, e.g. "Anatomy Classification Tool".
std::string prompt_tool_name(ToolCategory c, Variant v = Variant::None);

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base for every typed error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic RNG (splittable, counter-based; no global state)
// ---------------------------------------------------------------------------

struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, n). n must be > 0.
  uint64_t bounded(uint64_t n) { return next() % n; }

  /// Uniform draw in [lo, hi] inclusive.
  uint64_t range(uint64_t lo, uint64_t hi) { return lo + bounded(hi - lo + 1); }
};

/// FNV-1a, used to derive sub-seeds from string keys.
uint64_t fnv1a64(std::string_view text, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace radeval
