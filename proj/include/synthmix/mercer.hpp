#pragma once
// Truncated spectral kernel on an interval: eigenvalues (j+1)^(-2r) paired
// with sine eigenfunctions sin(pi (j+1) x), j = 1..j_max. Functions in the
// eigenbasis are finite coefficient sequences.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace synthmix {

class EigenSpec {
 public:
  /// Throws ArgumentError unless r >= 0.5, j_max >= 1 and lo < hi.
  EigenSpec(double r, int j_max, double domain_lo = 0.0, double domain_hi = 3.0);

  double r() const { return r_; }
  int j_max() const { return j_max_; }
  double domain_lo() const { return lo_; }
  double domain_hi() const { return hi_; }
  double domain_length() const { return hi_ - lo_; }

  /// mu_j = (j+1)^(-2r), 1-based j.
  double eigenvalue(int j) const;
  /// All eigenvalues mu_1..mu_jmax, index 0 holds mu_1.
  std::span<const double> eigenvalues() const { return mu_; }

  bool contains(double x) const { return x >= lo_ && x <= hi_; }

  friend bool operator==(const EigenSpec& a, const EigenSpec& b) {
    return a.r_ == b.r_ && a.j_max_ == b.j_max_ && a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  double r_;
  int j_max_;
  double lo_;
  double hi_;
  std::vector<double> mu_;
};

/// Finite expansion sum_j c_j phi_j. coeffs()[0] holds c_1.
class SeriesFunction {
 public:
  SeriesFunction(EigenSpec spec, std::vector<double> coeffs);

  const EigenSpec& spec() const { return spec_; }
  std::span<const double> coeffs() const { return coeffs_; }
  int terms() const { return static_cast<int>(coeffs_.size()); }
  /// c_j with c_j = 0 beyond the stored terms.
  double coeff(int j) const;

 private:
  EigenSpec spec_;
  std::vector<double> coeffs_;
};

struct TrainingSet {
  std::vector<double> xs;
  std::vector<double> ys;
  double sigma2 = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return xs.size(); }
};

/// phi_j(x) = sin(pi (j+1) x).
double basis_eval(const EigenSpec& spec, int j, double x);

double series_eval(const SeriesFunction& f, double x);

/// Coefficients c_j = (j+1)^(-r s) for j = 1..terms.
SeriesFunction make_series(const EigenSpec& spec, double s, int terms);

/// Row-major N x j_max matrix of phi_j(x_i). Rows are the per-point feature
/// vectors that every kernel evaluation contracts against the eigenvalues.
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> feature_matrix(
    const EigenSpec& spec, std::span<const double> xs);

/// Cross-kernel matrix K(a_i, b_k) for two point sets.
Eigen::MatrixXd cross_kernel(const EigenSpec& spec, std::span<const double> a,
                             std::span<const double> b);

/// Empirical kernel matrix (K_N)_{ik} = K(x_i, x_k).
Eigen::MatrixXd kernel_matrix(const EigenSpec& spec, std::span<const double> xs);

/// Uniform inputs on the domain and y = f(x) + N(0, sigma2) noise; the same
/// seed reproduces the same set bit for bit within a build.
TrainingSet sample_training_set(const SeriesFunction& f, int n, double sigma2,
                                std::uint64_t seed);

/// Zero-mean Gaussian draws of variance sigma2 from the stream identified by
/// (seed, stream). Independent streams let replicate loops run in any order.
std::vector<double> gaussian_noise(std::size_t n, double sigma2, std::uint64_t seed,
                                   std::uint64_t stream = 0);

/// Values of f at each point.
std::vector<double> series_values(const SeriesFunction& f, std::span<const double> xs);

/// n equispaced points covering the closed domain interval.
std::vector<double> uniform_grid(const EigenSpec& spec, int n);

}  // namespace synthmix
