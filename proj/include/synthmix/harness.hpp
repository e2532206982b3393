#pragma once
// Desk-scale experiments: lambda sweeps of the modified estimator against a
// known target, Monte Carlo bias/variance sweeps, and bound contour grids.
// Results serialize to CSV and JSON.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "synthmix/bounds.hpp"

namespace synthmix {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct LogGrid {
  double lo_exp = -10.0;
  double hi_exp = 10.0;
  int count = 50;

  /// 10^lo_exp .. 10^hi_exp, log-spaced, ascending.
  std::vector<double> values() const;
};

struct UcurveConfig {
  double r = 2.0;
  double s = 0.8;
  double s_prime = 1.5;
  int t_f = 100;
  int t_g = 10;
  int n = 15;
  double sigma2 = 0.1;
  LogGrid lambda_grid;
  int grid_size = 500;
  std::vector<std::uint64_t> seeds{42, 43, 44};
  double domain_lo = 0.0;
  double domain_hi = 3.0;

  /// Throws ArgumentError naming the offending field.
  void validate() const;
};

struct SweepRow {
  double lambda = 0.0;
  double empirical_error = kMissing;
  double bound_value = kMissing;
  double bias2 = kMissing;
  double variance = kMissing;
  double mc_std_err = kMissing;
};

struct SweepResult {
  std::string kind;  // "ucurve" or "bias_variance"
  UcurveConfig config;
  std::vector<SweepRow> rows;
  double discrepancy = 0.0;
  /// Smallest grid lambda attaining the minimal mean error.
  double lambda_empirical_opt = kMissing;
  double lambda_theory = kMissing;
  PlanStatus theory_status = PlanStatus::kInterior;
  /// per_seed_errors[s][k]: error for config.seeds[s] at rows[k].lambda.
  std::vector<std::vector<double>> per_seed_errors;
  int replicates = 0;
};

/// Samples one training set per seed, fits every grid lambda and averages
/// the L2 errors over seeds. Output does not depend on `jobs`.
SweepResult run_ucurve(const UcurveConfig& cfg, int jobs = 1);

/// Per-lambda Monte Carlo decomposition with the inputs of the first seed
/// held fixed; empirical_error holds the risk.
SweepResult run_bias_variance(const UcurveConfig& cfg, int replicates, int jobs = 1);

/// True when the minimum of `values` lies strictly below both endpoints.
bool has_interior_minimum(const std::vector<double>& values);

enum class ContourKind { kInDomain, kOutDomain };
std::string_view to_string(ContourKind k);
ContourKind contour_kind_from_string(std::string_view s);

struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  int count = 11;
  bool log_spaced = false;

  std::vector<double> values() const;
};

struct ContourSpec {
  ContourKind kind = ContourKind::kInDomain;
  AxisSpec ratio{0.01, 100.0, 41, true};
  /// D_gen for in-domain grids, D_shift for out-of-domain grids.
  AxisSpec discrepancy{0.0, 10.0, 21, false};
  int n = 100;
  double r = 1.0;
  double sigma2 = 1.0;
  /// D_gen held fixed on out-of-domain grids.
  double d_gen = 1.0;
  double mu_max = 1.0;
};

struct ContourGrid {
  ContourSpec spec;
  std::vector<double> x_axis;  // ratio
  std::vector<double> y_axis;  // discrepancy
  /// z[i][j] at y_axis[i], x_axis[j].
  std::vector<std::vector<double>> z;
};

ContourGrid run_contour(const ContourSpec& spec, int jobs = 1);

enum class OutputFormat { kCsv, kJson };
std::string_view to_string(OutputFormat f);
OutputFormat output_format_from_string(std::string_view s);

/// Shortest-safe decimal rendering: 17 significant digits, NaN as "".
std::string format_double(double v);

void write_csv(std::ostream& out, const SweepResult& result);
void write_json(std::ostream& out, const SweepResult& result);
void write_csv(std::ostream& out, const ContourGrid& grid);
void write_json(std::ostream& out, const ContourGrid& grid);

void emit(const SweepResult& result, const std::filesystem::path& path, OutputFormat format);
void emit(const ContourGrid& grid, const std::filesystem::path& path, OutputFormat format);

/// Rows of a sweep CSV; empty cells come back as NaN.
std::vector<SweepRow> read_sweep_csv(std::istream& in);
SweepResult read_sweep_json(std::istream& in);

}  // namespace synthmix
