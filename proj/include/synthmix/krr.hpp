#pragma once
// Kernel ridge regression regularized toward a synthetic generator g:
//
//   minimize (1/N) ||y - K_N a||^2 + lambda (a - b)^T K_N (a - b)
//
// where b are the representer coefficients of g on the training inputs. The
// minimizer solves (K_N + N lambda I) a = y + N lambda b.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "synthmix/mercer.hpp"

namespace synthmix {

struct KRRSolution {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> xs;
  double lambda = 0.0;
  EigenSpec spec;

  /// lambda_N = N * lambda.
  double lambda_n() const { return static_cast<double>(xs.size()) * lambda; }
};

/// Representer coefficients of g on xs: minimum-norm solution of
/// (K_N + jitter I) b = g(xs), jitter = 1e-12 trace(K_N) / N.
std::vector<double> generator_coefficients(const Eigen::MatrixXd& kn,
                                           std::span<const double> g_values);

/// Diagonal jitter added when N lambda falls below 1e-10.
double solve_jitter(const Eigen::MatrixXd& kn);

/// Factored regularized system for one (inputs, lambda) pair. Reusable across
/// many right-hand sides, e.g. noise replicates with fixed inputs.
class RegularizedSystem {
 public:
  /// Throws NumericError when the shifted matrix is not positive definite.
  RegularizedSystem(const Eigen::MatrixXd& kn, double lambda);

  /// alpha for observations y and generator coefficients beta; one step of
  /// iterative refinement is applied to the factored solve.
  Eigen::VectorXd solve(const Eigen::VectorXd& y, const Eigen::VectorXd& beta) const;

  double lambda_n() const { return lambda_n_; }
  double diagonal_shift() const { return shift_; }

 private:
  Eigen::MatrixXd kn_;
  double lambda_n_;
  double shift_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Closed-form fit. lambda >= 0; lambda = 0 interpolates (with jitter).
KRRSolution fit(const EigenSpec& spec, const TrainingSet& train, const SeriesFunction& g,
                double lambda);

/// f_N(x) = sum_n alpha_n K(x, x_n).
double predict(const KRRSolution& sol, double x);

/// f_N on many points at once.
std::vector<double> predict(const KRRSolution& sol, std::span<const double> points);

/// (1/N) ||y - K a||^2 + lambda (a - b)^T K (a - b)
double objective(const Eigen::MatrixXd& kn, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                 double lambda, const Eigen::VectorXd& alpha);

/// Norm of the objective gradient (2/N) K (K a - y) + 2 lambda K (a - b).
double stationarity_residual(const Eigen::MatrixXd& kn, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta, double lambda,
                             const Eigen::VectorXd& alpha);

/// Population-limit coefficients (mu_j theta_j + lambda omega_j) / (mu_j + lambda).
std::vector<double> population_limit_coeffs(const SeriesFunction& theta,
                                            const SeriesFunction& omega, double lambda);

/// sqrt of the trapezoid approximation of the integral of (a - b)^2 over
/// [lo, hi] from samples on a uniform grid.
double trapezoid_l2(std::span<const double> a, std::span<const double> b, double lo, double hi);

/// L2 distance between f_N and f_true on a uniform grid of grid_size points.
double empirical_l2_error(const KRRSolution& sol, const SeriesFunction& f_true, int grid_size);

struct BiasVarianceReport {
  double bias2 = 0.0;
  double variance = 0.0;
  double risk = 0.0;
  int mc_replicates = 0;
  double mc_std_err = 0.0;
};

struct BiasVarianceOptions {
  int grid_size = 500;
  /// Worker threads for the replicate loop; results do not depend on it.
  int jobs = 1;
};

/// Monte Carlo bias / variance / risk with the inputs held fixed and the
/// noise redrawn per replicate. Averages over x are uniform on the domain.
BiasVarianceReport bias_variance_mc(const EigenSpec& spec, const SeriesFunction& f_true,
                                    const SeriesFunction& g, int n, double sigma2, double lambda,
                                    int replicates, std::uint64_t seed,
                                    const BiasVarianceOptions& options = {});

}  // namespace synthmix
