#include "synthmix/discrepancy.hpp"

#include <algorithm>
#include <cmath>

#include "synthmix/error.hpp"

namespace synthmix {

DiscrepancyResult discrepancy(const SeriesFunction& f, const SeriesFunction& g) {
  if (!(f.spec() == g.spec())) throw ArgumentError("discrepancy: mismatched eigensystems");
  const int terms = std::max(f.terms(), g.terms());
  double acc = 0.0;
  for (int j = 1; j <= terms; ++j) {
    const double t = (f.coeff(j) - g.coeff(j)) / f.spec().eigenvalue(j);
    acc += t * t;
  }
  return {std::sqrt(acc), terms};
}

double rkhs_norm2(const SeriesFunction& f) {
  double acc = 0.0;
  for (int j = 1; j <= f.terms(); ++j) acc += f.coeff(j) * f.coeff(j) / f.spec().eigenvalue(j);
  return acc;
}

double l2_norm2(const SeriesFunction& f) {
  double acc = 0.0;
  for (double c : f.coeffs()) acc += c * c;
  return acc;
}

SeriesFunction difference(const SeriesFunction& f, const SeriesFunction& g) {
  if (!(f.spec() == g.spec())) throw ArgumentError("difference: mismatched eigensystems");
  const int terms = std::max(f.terms(), g.terms());
  std::vector<double> c(static_cast<std::size_t>(terms));
  for (int j = 1; j <= terms; ++j) c[j - 1] = f.coeff(j) - g.coeff(j);
  return SeriesFunction(f.spec(), std::move(c));
}

}  // namespace synthmix
