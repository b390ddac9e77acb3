#pragma once

#include <string>
#include <vector>

#include "radeval/types.hpp"

namespace radeval {

/// The session's key-value store of produced information plus per-key
/// performance scores. $Image$ and $Information$ form the immutable fixed
/// bank; keys are never removed.
class MemoryBank {
 public:
  MemoryBank();

  bool contains(InfoKey key) const;
  const std::string& value(InfoKey key) const;
  double score(InfoKey key) const;

  /// Insertion-ordered keys.
  const std::vector<InfoKey>& keys() const { return order_; }

  /// Sets (or overwrites) a non-fixed entry. Throws Error on fixed keys.
  void set(InfoKey key, std::string value, double score);

  static bool is_fixed(InfoKey key) {
    return key == InfoKey::Image || key == InfoKey::Information;
  }

  /// Python-dict style rendering of the value bank, insertion order:
  /// {'$Image$': 'PLACEHOLDER_IMAGE', ...}
  std::string render_values() const;
  /// Same for the score bank: {'$Image$': 1.0, ...}
  std::string render_scores() const;

  bool operator==(const MemoryBank&) const = default;

 private:
  std::vector<InfoKey> order_;
  std::array<std::string, kInfoKeyCount> values_;
  std::array<double, kInfoKeyCount> scores_{};
  std::array<bool, kInfoKeyCount> present_{};
};

/// Python-style float rendering (1.0, 0.95, 0.76).
std::string python_float(double v);

}  // namespace radeval
