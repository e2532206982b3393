#pragma once
// One-dimensional minimization helpers shared by the planners.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>

namespace synthmix {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  /// False when the minimum sits on an end of the scanned interval.
  bool interior = true;
};

/// Golden-section search on [lo, hi] for a unimodal f. Stops once the bracket
/// width drops below rel_tol * max(1, |midpoint|).
inline ScalarMinimum golden_section(const std::function<double(double)>& f, double lo, double hi,
                                    double rel_tol = 1e-10, int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter; ++it) {
    if (b - a <= rel_tol * std::max(1.0, std::abs(0.5 * (a + b)))) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? ScalarMinimum{c, fc, true} : ScalarMinimum{d, fd, true};
}

/// Scans `points` equispaced abscissae on [lo, hi], then refines the best
/// bracket by golden section. A minimum on either end is reported as
/// non-interior at that end.
inline ScalarMinimum scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                                      std::size_t points = 481, double rel_tol = 1e-10) {
  const double step = (hi - lo) / static_cast<double>(points - 1);
  std::size_t best = 0;
  double best_value = f(lo);
  for (std::size_t i = 1; i < points; ++i) {
    const double x = (i + 1 == points) ? hi : lo + step * static_cast<double>(i);
    const double v = f(x);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best == 0) return {lo, best_value, false};
  if (best + 1 == points) return {hi, best_value, false};
  const double a = lo + step * static_cast<double>(best - 1);
  const double b = lo + step * static_cast<double>(best + 1);
  auto refined = golden_section(f, a, b, rel_tol);
  if (best_value < refined.value) refined = {lo + step * static_cast<double>(best), best_value, true};
  return refined;
}

}  // namespace synthmix
