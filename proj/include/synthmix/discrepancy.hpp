#pragma once

#include "synthmix/mercer.hpp"

namespace synthmix {

struct DiscrepancyResult {
  double value = 0.0;
  int terms_used = 0;
};

/// D(f, g) = sqrt( sum_j (c_j(f) - c_j(g))^2 / mu_j^2 ) over
/// j = 1..max(T_f, T_g); missing coefficients count as zero.
DiscrepancyResult discrepancy(const SeriesFunction& f, const SeriesFunction& g);

/// sum_j c_j^2 / mu_j
double rkhs_norm2(const SeriesFunction& f);

/// sum_j c_j^2 (coefficient-space L2; the sine basis on an interval of length
/// L has squared norm L/2, so the function-space integral is (L/2) times this).
double l2_norm2(const SeriesFunction& f);

/// Coefficient-wise difference f - g on the shared eigensystem.
SeriesFunction difference(const SeriesFunction& f, const SeriesFunction& g);

}  // namespace synthmix
