#pragma once

#include <vector>

#include "radeval/types.hpp"

namespace radeval {

struct PairedComparison {
  int wins = 0;
  int ties = 0;
  int losses = 0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // zero-variance differences
};

struct DegenerateVariance : Error {
  using Error::Error;
};

/// Two-sided paired t-test plus win/tie/loss counts over equal-length paired
/// series. For distance-like metrics a win means a < b; pass
/// lower_is_better=false for score-like metrics. Zero-variance differences
/// are flagged degenerate: all-zero gives p = 1, constant nonzero gives
/// p = 0 with an infinite t.
PairedComparison paired_compare(const std::vector<double>& series_a,
                                const std::vector<double>& series_b,
                                bool lower_is_better = true);

/// Two-sided p-value for Student's t with the given degrees of freedom.
double student_t_two_sided_p(double t, int dof);

}  // namespace radeval
