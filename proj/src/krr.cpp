#include "synthmix/krr.hpp"

#include <algorithm>
#include <cmath>

#include "synthmix/error.hpp"
#include "synthmix/parallel.hpp"
#include "synthmix/simd.hpp"

namespace synthmix {
namespace {

constexpr double kJitterFactor = 1e-12;
constexpr double kJitterThreshold = 1e-10;

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double solve_jitter(const Eigen::MatrixXd& kn) {
  return kJitterFactor * kn.trace() / static_cast<double>(kn.rows());
}

std::vector<double> generator_coefficients(const Eigen::MatrixXd& kn,
                                           std::span<const double> g_values) {
  if (static_cast<Eigen::Index>(g_values.size()) != kn.rows()) {
    throw ArgumentError("generator values do not match the kernel matrix size");
  }
  Eigen::MatrixXd shifted = kn;
  shifted.diagonal().array() += solve_jitter(kn);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(shifted);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition of K_N failed");
  const Eigen::VectorXd& evals = eig.eigenvalues();
  const double cutoff = std::numeric_limits<double>::epsilon() * static_cast<double>(kn.rows()) *
                        std::max(evals.cwiseAbs().maxCoeff(), 0.0);
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * as_vector(g_values);
  Eigen::VectorXd scaled = Eigen::VectorXd::Zero(proj.size());
  for (Eigen::Index i = 0; i < proj.size(); ++i) {
    if (evals(i) > cutoff) scaled(i) = proj(i) / evals(i);
  }
  return to_std(eig.eigenvectors() * scaled);
}

RegularizedSystem::RegularizedSystem(const Eigen::MatrixXd& kn, double lambda)
    : kn_(kn), lambda_n_(static_cast<double>(kn.rows()) * lambda), shift_(lambda_n_) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("lambda must be finite and >= 0");
  }
  if (lambda_n_ < kJitterThreshold) shift_ = lambda_n_ + solve_jitter(kn);
  Eigen::MatrixXd shifted = kn;
  shifted.diagonal().array() += shift_;
  llt_.compute(shifted);
  if (llt_.info() != Eigen::Success) {
    throw NumericError("regularized kernel system is not positive definite (lambda = " +
                       std::to_string(lambda) + ")");
  }
}

Eigen::VectorXd RegularizedSystem::solve(const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd rhs = y + lambda_n_ * beta;
  Eigen::VectorXd alpha = llt_.solve(rhs);
  const Eigen::VectorXd residual = rhs - (kn_ * alpha + shift_ * alpha);
  alpha += llt_.solve(residual);
  return alpha;
}

KRRSolution fit(const EigenSpec& spec, const TrainingSet& train, const SeriesFunction& g,
                double lambda) {
  if (train.xs.empty()) throw ArgumentError("fit: empty training set");
  if (train.xs.size() != train.ys.size()) throw ArgumentError("fit: xs and ys differ in length");
  if (!(g.spec() == spec)) throw ArgumentError("fit: generator uses a different eigensystem");
  const Eigen::MatrixXd kn = kernel_matrix(spec, train.xs);
  const auto beta = generator_coefficients(kn, series_values(g, train.xs));
  const RegularizedSystem system(kn, lambda);
  const Eigen::VectorXd alpha = system.solve(as_vector(train.ys), as_vector(beta));
  return KRRSolution{to_std(alpha), beta, train.xs, lambda, spec};
}

double predict(const KRRSolution& sol, double x) {
  const double pt[] = {x};
  return predict(sol, pt).front();
}

std::vector<double> predict(const KRRSolution& sol, std::span<const double> points) {
  const Eigen::MatrixXd kx = cross_kernel(sol.spec, points, sol.xs);
  return to_std(kx * as_vector(sol.alpha));
}

double objective(const Eigen::MatrixXd& kn, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                 double lambda, const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd fit_residual = y - kn * alpha;
  const Eigen::VectorXd delta = alpha - beta;
  return fit_residual.squaredNorm() / static_cast<double>(y.size()) +
         lambda * delta.dot(kn * delta);
}

double stationarity_residual(const Eigen::MatrixXd& kn, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta, double lambda,
                             const Eigen::VectorXd& alpha) {
  const double n = static_cast<double>(y.size());
  const Eigen::VectorXd grad =
      (2.0 / n) * (kn * (kn * alpha - y)) + 2.0 * lambda * (kn * (alpha - beta));
  return grad.norm();
}

std::vector<double> population_limit_coeffs(const SeriesFunction& theta,
                                            const SeriesFunction& omega, double lambda) {
  if (!(theta.spec() == omega.spec())) {
    throw ArgumentError("population_limit_coeffs: functions use different eigensystems");
  }
  if (!(lambda >= 0.0)) throw ArgumentError("population_limit_coeffs: lambda must be >= 0");
  const int terms = std::max(theta.terms(), omega.terms());
  std::vector<double> c(static_cast<std::size_t>(terms));
  for (int j = 1; j <= terms; ++j) {
    const double mu = theta.spec().eigenvalue(j);
    const double t = theta.coeff(j);
    const double w = omega.coeff(j);
    if (std::isinf(lambda)) {
      c[j - 1] = w;
    } else {
      c[j - 1] = (mu * t + lambda * w) / (mu + lambda);
    }
  }
  return c;
}

double trapezoid_l2(std::span<const double> a, std::span<const double> b, double lo, double hi) {
  if (a.size() != b.size() || a.size() < 2) throw ArgumentError("trapezoid_l2: bad sample sizes");
  const double h = (hi - lo) / static_cast<double>(a.size() - 1);
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double ends = 0.5 * (diff.front() * diff.front() + diff.back() * diff.back());
  const double inner = simd::sum_squares(std::span<const double>(diff).subspan(1, diff.size() - 2));
  return std::sqrt(h * (inner + ends));
}

double empirical_l2_error(const KRRSolution& sol, const SeriesFunction& f_true, int grid_size) {
  if (grid_size < 2) throw ArgumentError("empirical_l2_error: grid_size must be >= 2");
  const auto grid = uniform_grid(sol.spec, grid_size);
  const auto fitted = predict(sol, grid);
  const auto truth = series_values(f_true, grid);
  return trapezoid_l2(fitted, truth, sol.spec.domain_lo(), sol.spec.domain_hi());
}

BiasVarianceReport bias_variance_mc(const EigenSpec& spec, const SeriesFunction& f_true,
                                    const SeriesFunction& g, int n, double sigma2, double lambda,
                                    int replicates, std::uint64_t seed,
                                    const BiasVarianceOptions& options) {
  if (replicates < 2) throw ArgumentError("bias_variance_mc: replicates must be >= 2");
  if (options.grid_size < 2) throw ArgumentError("bias_variance_mc: grid_size must be >= 2");
  if (!(f_true.spec() == spec) || !(g.spec() == spec)) {
    throw ArgumentError("bias_variance_mc: functions use a different eigensystem");
  }
  const TrainingSet base = sample_training_set(f_true, n, sigma2, seed);
  const Eigen::MatrixXd kn = kernel_matrix(spec, base.xs);
  const auto beta_std = generator_coefficients(kn, series_values(g, base.xs));
  const Eigen::VectorXd beta = as_vector(beta_std);
  const RegularizedSystem system(kn, lambda);

  const auto grid = uniform_grid(spec, options.grid_size);
  const Eigen::MatrixXd kgrid = cross_kernel(spec, grid, base.xs);
  const auto truth_std = series_values(f_true, grid);
  const Eigen::VectorXd truth = as_vector(truth_std);
  const auto clean_std = series_values(f_true, base.xs);
  const Eigen::VectorXd clean = as_vector(clean_std);

  const auto r_count = static_cast<std::size_t>(replicates);
  std::vector<Eigen::VectorXd> fitted(r_count);
  parallel_for(r_count, options.jobs, [&](std::size_t r) {
    const auto eps = gaussian_noise(clean.size(), sigma2, seed, r + 1);
    const Eigen::VectorXd y = clean + as_vector(eps);
    fitted[r] = kgrid * system.solve(y, beta);
  });

  // Trapezoid weights normalized to a uniform average over the domain.
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd weight = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m - 1));
  weight(0) *= 0.5;
  weight(m - 1) *= 0.5;

  // Mean prediction as an offset from the first replicate, so identical
  // replicates give an exactly zero spread.
  Eigen::VectorXd offset = Eigen::VectorXd::Zero(m);
  for (std::size_t r = 1; r < r_count; ++r) offset += fitted[r] - fitted[0];
  const Eigen::VectorXd mean = fitted[0] + offset / static_cast<double>(r_count);

  Eigen::VectorXd spread = Eigen::VectorXd::Zero(m);
  std::vector<double> per_replicate_risk(r_count);
  for (std::size_t r = 0; r < r_count; ++r) {
    spread += (fitted[r] - mean).cwiseAbs2();
    per_replicate_risk[r] = weight.dot((truth - fitted[r]).cwiseAbs2());
  }
  const double reps = static_cast<double>(r_count);

  BiasVarianceReport report;
  report.mc_replicates = replicates;
  report.bias2 = weight.dot((truth - mean).cwiseAbs2());
  report.variance = weight.dot(spread) / reps;
  double risk_sum = 0.0;
  for (double v : per_replicate_risk) risk_sum += v;
  report.risk = risk_sum / reps;
  double ss = 0.0;
  for (double v : per_replicate_risk) ss += (v - report.risk) * (v - report.risk);
  report.mc_std_err = std::sqrt(ss / (reps - 1.0) / reps);
  return report;
}

}  // namespace synthmix
