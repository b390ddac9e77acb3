#include "radeval/stats.hpp"

#include <cmath>
#include <limits>

namespace radeval {

namespace {

// Regularized incomplete beta function via the Lentz continued fraction.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 200;
  constexpr double kEps = 3e-14;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_two_sided_p(double t, int dof) {
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return incomplete_beta(dof / 2.0, 0.5, x);
}

PairedComparison paired_compare(const std::vector<double>& series_a,
                                const std::vector<double>& series_b,
                                bool lower_is_better) {
  if (series_a.size() != series_b.size())
    throw Error("paired_compare needs equal-length series");
  const size_t n = series_a.size();
  if (n < 2) throw Error("paired_compare needs n >= 2");

  PairedComparison out;
  std::vector<double> diffs(n);
  double mean = 0.0;
  for (size_t i = 0; i < n; ++i) {
    diffs[i] = series_a[i] - series_b[i];
    mean += diffs[i];
    if (series_a[i] == series_b[i]) ++out.ties;
    else if ((series_a[i] < series_b[i]) == lower_is_better) ++out.wins;
    else ++out.losses;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double var = ss / static_cast<double>(n - 1);

  if (var == 0.0) {
    out.degenerate = true;
    if (mean == 0.0) {
      out.t_statistic = 0.0;
      out.p_value = 1.0;
    } else {
      out.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
    }
    return out;
  }
  out.t_statistic = mean / std::sqrt(var / static_cast<double>(n));
  out.p_value = student_t_two_sided_p(out.t_statistic, static_cast<int>(n) - 1);
  return out;
}

}  // namespace radeval
