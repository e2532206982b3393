// Acceptance suite: one PASS/FAIL line per criterion.
//
//   synthmix_acceptance            run every criterion
//   synthmix_acceptance --only 4   run criterion 4

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "synthmix/bounds.hpp"
#include "synthmix/cli.hpp"
#include "synthmix/discrepancy.hpp"
#include "synthmix/harness.hpp"
#include "synthmix/krr.hpp"
#include "synthmix/spectral.hpp"

using namespace synthmix;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> body;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<double> errors_of(const SweepResult& r) {
  std::vector<double> e;
  for (const auto& row : r.rows) e.push_back(row.empirical_error);
  return e;
}

Verdict solver_oracle() {
  double worst_obj = 0.0;
  double worst_res = 0.0;
  bool ok = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto inst = fixtures::random_krr_instance(1 + s);
    const auto sol = fit(inst.spec, inst.train, inst.g, inst.lambda);
    const auto k = kernel_matrix(inst.spec, inst.train.xs);
    const auto y = fixtures::to_eigen(inst.train.ys);
    const auto b = fixtures::to_eigen(sol.beta);
    const auto a = fixtures::to_eigen(sol.alpha);
    const double closed = oracle::krr_objective(k, y, b, inst.lambda, a);
    const double gd = oracle::krr_objective(k, y, b, inst.lambda,
                                            oracle::nesterov_krr(k, y, b, inst.lambda, 500000));
    const double rel = std::abs(closed - gd) / std::max(std::abs(gd), 1e-300);
    const double res = stationarity_residual(k, y, b, inst.lambda, a) / (1.0 + y.norm());
    worst_obj = std::max(worst_obj, rel);
    worst_res = std::max(worst_res, res);
    ok = ok && rel <= 1e-8 && res <= 1e-8;
  }
  return {ok, "20 instances, max objective gap " + sci(worst_obj) + " rel, max residual " +
                  sci(worst_res) + "*(1+|y|)"};
}

Verdict ucurve_mismatch() {
  const auto res = run_ucurve(UcurveConfig{}, 4);
  const bool interior = has_interior_minimum(errors_of(res));
  const double gap = std::abs(std::log10(res.lambda_theory) - std::log10(res.lambda_empirical_opt));
  return {interior && gap <= 2.0,
          std::string("interior minimum ") + (interior ? "yes" : "no") + ", lambda_emp " +
              sci(res.lambda_empirical_opt) + ", lambda_theory " + sci(res.lambda_theory) +
              ", |log10 gap| " + sci(gap) + " (limit 2)"};
}

Verdict ucurve_matched() {
  UcurveConfig cfg;
  cfg.s_prime = cfg.s;
  cfg.t_g = cfg.t_f;
  const auto res = run_ucurve(cfg, 4);
  const double lo = res.rows.front().empirical_error;
  const double hi = res.rows.back().empirical_error;
  return {hi <= lo && res.discrepancy == 0.0,
          "error at 1e10 " + sci(hi) + ", at 1e-10 " + sci(lo) + ", D " + sci(res.discrepancy)};
}

Verdict planner_consistency() {
  std::mt19937_64 eng(2024);
  std::uniform_int_distribution<int> n_dist(1, 2000);
  std::uniform_real_distribution<double> r_dist(0.5, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> log_d(-3.0, 3.0);
  double worst_deriv = 0.0;
  double worst_excess = 0.0;
  bool ok = true;
  for (int t = 0; t < 200; ++t) {
    const KernelBoundInputs in{n_dist(eng), r_dist(eng), unit(eng), std::pow(10.0, log_d(eng)), 0.0};
    const auto plan = lambda_star_numeric(in);
    const double l = plan.lambda_star;
    const double h = 1e-6 * l;
    const double fd = (kernel_bound(in, l + h) - kernel_bound(in, l - h)) / (2.0 * h);
    double grid_min = INFINITY;
    for (int k = 0; k < 1000; ++k) {
      const double ll = std::exp(kLogLambdaMin + (kLogLambdaMax - kLogLambdaMin) * k / 999.0);
      grid_min = std::min(grid_min, kernel_bound(in, ll));
    }
    const double excess = (kernel_bound(in, l) - grid_min) / grid_min;
    worst_deriv = std::max(worst_deriv, std::abs(fd));
    worst_excess = std::max(worst_excess, excess);
    ok = ok && std::abs(fd) <= 1e-6 && excess <= 1e-9 && plan.status == PlanStatus::kInterior;
  }
  return {ok, "200 inputs, max |dB/dlambda| " + sci(worst_deriv) + ", max excess over grid " +
                  sci(worst_excess) + " rel"};
}

Verdict traditional_suite() {
  std::mt19937_64 eng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  bool ok = true;
  for (int t = 0; t < 100; ++t) {
    const double c = 0.1 + 5.0 * unit(eng);
    const double n = std::floor(10.0 + 990.0 * unit(eng));
    const double m = std::floor(n * (1.5 + 200.0 * unit(eng)));
    const double ipm = 1.2 * c / std::sqrt(n) * unit(eng);
    const auto plan = traditional_plan(c, n, m, ipm);
    const double ref = oracle::golden_min([&](double a) { return rho(a, c, n, m, ipm); }, 0.0, 1.0);
    worst = std::max(worst, std::abs(plan.alpha_star - ref));
    ok = ok && std::abs(plan.alpha_star - ref) <= 1e-6;
  }
  int edge_failures = 0;
  for (const auto& [c, n, m] : {std::tuple{1.0, 100.0, 10000.0}, {2.5, 37.0, 900.0}, {0.3, 5.0, 12.0}}) {
    const auto none = traditional_plan(c, n, m, c / std::sqrt(n));
    const auto all = traditional_plan(c, n, m, c / std::sqrt(m));
    const auto bal = traditional_plan(c, n, m, 2.0 * c / std::sqrt(n));
    if (none.decision != MixDecision::kUseNone || none.alpha_rule != 0.0) ++edge_failures;
    if (all.decision != MixDecision::kUseAll || all.alpha_rule != 1.0) ++edge_failures;
    if (bal.m_bal != 0.0) ++edge_failures;
  }
  ok = ok && edge_failures == 0;
  return {ok, "100 random plans, max |alpha - golden| " + sci(worst) + ", edge-case failures " +
                  std::to_string(edge_failures)};
}

Verdict bias_variance_identity() {
  double worst = 0.0;
  bool ok = true;
  for (const double s_prime : {1.5, 0.8}) {
    UcurveConfig cfg;
    cfg.s_prime = s_prime;
    cfg.t_g = s_prime == cfg.s ? cfg.t_f : 10;
    cfg.lambda_grid = {-2.0, 2.0, 3};
    for (const auto& row : run_bias_variance(cfg, 200, 4).rows) {
      const double z = std::abs(row.empirical_error - row.bias2 - row.variance) /
                       std::max(row.mc_std_err, 1e-300);
      worst = std::max(worst, z);
      ok = ok && std::abs(row.empirical_error - row.bias2 - row.variance) <= 3.0 * row.mc_std_err;
    }
  }
  UcurveConfig quiet;
  quiet.sigma2 = 0.0;
  quiet.lambda_grid = {-2.0, 2.0, 3};
  double max_var = 0.0;
  for (const auto& row : run_bias_variance(quiet, 200, 4).rows) max_var = std::max(max_var, row.variance);
  ok = ok && max_var <= 1e-12;
  return {ok, "3 lambdas x 2 configs, max |risk - bias2 - var| " + sci(worst) +
                  " MC std errors; noiseless variance " + sci(max_var)};
}

Verdict stability_shape() {
  const BoundParams p;
  const double n = 100.0;
  const auto m = minimize_mixed_gap(p, n, 2.0, 0.0);
  const double lo_end = mixed_gap_bound(p, 1e-9, n, 2.0, 0.0);
  const double hi_end = mixed_gap_bound(p, 1.0 - 1e-9, n, 2.0, 0.0);
  const bool interior = m.interior && m.value < lo_end && m.value < hi_end;
  bool monotone = true;
  double prev = INFINITY;
  for (int k = 1; k <= 200; ++k) {
    const double v = mixed_gap_bound(p, k / 201.0, n, 0.0, 0.0);
    monotone = monotone && v < prev;
    prev = v;
  }
  return {interior && monotone, "w2 = 2: minimizer " + sci(m.lambda) +
                                    (interior ? " interior" : " not interior") +
                                    "; w2 = 0: " + (monotone ? "decreasing" : "not decreasing")};
}

Verdict domain_shift_ordering() {
  const BoundParams p;
  bool ok = true;
  std::string detail;
  for (const auto& [near, far] : {std::pair{0.2, 1.0}, {0.5, 1.5}, {0.3, 0.9}}) {
    const auto closer = minimize_domain_shift_gap(p, 100.0, near, far, 0.0);
    const auto farther = minimize_domain_shift_gap(p, 100.0, far, near, 0.0);
    ok = ok && closer.lambda > farther.lambda;
    detail += "(" + sci(near) + "," + sci(far) + "): " + sci(closer.lambda) + " vs " +
              sci(farther.lambda) + "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, "minimizing lambda, synthetic closer vs farther " + detail};
}

Verdict spectral_pipeline() {
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) sum += fit_decay_exponent(rapsd(power_law_field(128, 128, 1.0, seed))).r_hat;
  const double r_mean = sum / 20.0;

  std::vector<ImageMatrix> set;
  for (std::uint64_t seed = 0; seed < 3; ++seed) set.push_back(power_law_field(64, 64, 1.2, seed));
  const double d_same = spectral_distance(set, set);

  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const int h = 16 + 8 * t;
    const int w = 64 - 4 * t;
    std::vector<double> px(static_cast<std::size_t>(h) * w);
    for (auto& v : px) v = u(eng);
    double mean = 0.0;
    for (double v : px) mean += v;
    mean /= static_cast<double>(px.size());
    double ss = 0.0;
    for (double v : px) ss += (v - mean) * (v - mean);
    const double total = rapsd(ImageMatrix(h, w, px)).total_power;
    worst = std::max(worst, std::abs(total - ss) / ss);
  }
  const bool ok = std::abs(r_mean - 1.0) <= 0.1 && d_same == 0.0 && worst <= 1e-6;
  return {ok, "mean r_hat " + sci(r_mean) + " (r0 = 1), D(identical) " + sci(d_same) +
                  ", max Parseval error " + sci(worst)};
}

int sign_changes(const std::vector<double>& v) {
  int changes = 0;
  int prev = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double d = v[k] - v[k - 1];
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

Verdict contour_shapes() {
  int bad_rows = 0;
  int rows = 0;
  for (const double sigma2 : {1.0, 0.1}) {
    for (const double r : {0.5, 1.0, 2.0}) {
      ContourSpec spec;
      spec.sigma2 = sigma2;
      spec.r = r;
      const auto g = run_contour(spec, 4);
      for (std::size_t i = 0; i < g.y_axis.size(); ++i) {
        ++rows;
        if (g.y_axis[i] == 0.0) {
          for (std::size_t j = 1; j < g.x_axis.size(); ++j)
            if (!(g.z[i][j] < g.z[i][j - 1])) {
              ++bad_rows;
              break;
            }
        } else if (sign_changes(g.z[i]) != 1) {
          ++bad_rows;
        }
      }
    }
  }
  int bad_cols = 0;
  ContourSpec out;
  out.kind = ContourKind::kOutDomain;
  const auto g = run_contour(out, 4);
  for (std::size_t j = 0; j < g.x_axis.size(); ++j)
    for (std::size_t i = 1; i < g.y_axis.size(); ++i)
      if (g.z[i][j] < g.z[i - 1][j]) {
        ++bad_cols;
        break;
      }
  return {bad_rows == 0 && bad_cols == 0,
          std::to_string(rows) + " in-domain rows, " + std::to_string(bad_rows) + " off-shape; " +
              std::to_string(g.x_axis.size()) + " out-of-domain columns, " +
              std::to_string(bad_cols) + " decreasing"};
}

bool same_bits(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::memcmp(&a, &b, sizeof a) == 0;
}

Verdict reproducibility() {
  auto cli_csv = [](const char* jobs) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::main_entry({"simulate", "--seeds", "42,43,44", "--jobs", jobs, "--out", "-"},
                                     out, err);
    return code == cli::kExitOk ? out.str() : std::string("exit ") + std::to_string(code);
  };
  const std::string one = cli_csv("1");
  const bool jobs_ok = one == cli_csv("3") && one == cli_csv("8");

  UcurveConfig cfg;
  cfg.lambda_grid.count = 20;
  const auto bv = run_bias_variance(cfg, 20, 4);
  std::ostringstream csv;
  write_csv(csv, bv);
  std::istringstream csv_in(csv.str());
  const auto csv_rows = read_sweep_csv(csv_in);
  std::ostringstream js;
  write_json(js, bv);
  std::istringstream js_in(js.str());
  const auto js_res = read_sweep_json(js_in);
  bool lossless = csv_rows.size() == bv.rows.size() && js_res.rows.size() == bv.rows.size();
  for (std::size_t k = 0; lossless && k < bv.rows.size(); ++k) {
    const auto& a = bv.rows[k];
    for (const auto* b : {&csv_rows[k], &js_res.rows[k]}) {
      lossless = lossless && same_bits(a.lambda, b->lambda) &&
                 same_bits(a.empirical_error, b->empirical_error) &&
                 same_bits(a.bound_value, b->bound_value) && same_bits(a.bias2, b->bias2) &&
                 same_bits(a.variance, b->variance);
    }
  }
  return {jobs_ok && lossless, std::string("CLI CSV across --jobs 1/3/8 ") +
                                   (jobs_ok ? "identical" : "differs") + ", CSV/JSON round trip " +
                                   (lossless ? "bitwise" : "lossy")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "Run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "solver-oracle equivalence", 5.0, solver_oracle},
      {2, "u-curve reproduction", 30.0, ucurve_mismatch},
      {3, "matched-generator control", 30.0, ucurve_matched},
      {4, "planner consistency", 10.0, planner_consistency},
      {5, "traditional-bound suite", 5.0, traditional_suite},
      {6, "bias-variance identity", 60.0, bias_variance_identity},
      {7, "stability-bound shape", 5.0, stability_shape},
      {8, "domain-shift ordering", 5.0, domain_shift_ordering},
      {9, "spectral pipeline", 30.0, spectral_pipeline},
      {10, "contour grids", 10.0, contour_shapes},
      {11, "reproducibility and I/O", 60.0, reproducibility},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      v.pass = false;
      v.detail += "; over time budget of " + sci(c.budget_s) + " s";
    }
    if (!v.pass) ++failed;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2f s", secs);
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " " << c.name << ": "
              << v.detail << " [" << timing << "]\n";
  }
  return failed == 0 ? 0 : 1;
}
