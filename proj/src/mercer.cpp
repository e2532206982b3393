#include "synthmix/mercer.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "synthmix/error.hpp"
#include "synthmix/simd.hpp"

namespace synthmix {
namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// Stream ids used by sample_training_set; replicate streams start at 1.
constexpr std::uint64_t kInputStream = 0xA11CE;
constexpr std::uint64_t kNoiseStream = 0;

}  // namespace

EigenSpec::EigenSpec(double r, int j_max, double domain_lo, double domain_hi)
    : r_(r), j_max_(j_max), lo_(domain_lo), hi_(domain_hi) {
  if (!(r >= 0.5) || !std::isfinite(r)) {
    throw ArgumentError("EigenSpec: decay exponent r must be >= 0.5, got " + std::to_string(r));
  }
  if (j_max < 1) throw ArgumentError("EigenSpec: j_max must be >= 1");
  if (!(domain_lo < domain_hi) || !std::isfinite(domain_lo) || !std::isfinite(domain_hi)) {
    throw ArgumentError("EigenSpec: domain_lo must be < domain_hi");
  }
  mu_.resize(static_cast<std::size_t>(j_max));
  for (int j = 1; j <= j_max; ++j) mu_[j - 1] = std::pow(static_cast<double>(j + 1), -2.0 * r);
}

double EigenSpec::eigenvalue(int j) const {
  if (j < 1 || j > j_max_) throw ArgumentError("eigenvalue index out of range");
  return mu_[j - 1];
}

SeriesFunction::SeriesFunction(EigenSpec spec, std::vector<double> coeffs)
    : spec_(std::move(spec)), coeffs_(std::move(coeffs)) {
  if (static_cast<int>(coeffs_.size()) > spec_.j_max()) {
    throw ArgumentError("SeriesFunction: more coefficients than j_max");
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw ArgumentError("SeriesFunction: non-finite coefficient");
  }
}

double SeriesFunction::coeff(int j) const {
  if (j < 1) throw ArgumentError("coefficient index must be >= 1");
  return j <= terms() ? coeffs_[j - 1] : 0.0;
}

double basis_eval(const EigenSpec& spec, int j, double x) {
  if (j < 1 || j > spec.j_max()) {
    throw ArgumentError("basis index " + std::to_string(j) + " outside 1.." +
                        std::to_string(spec.j_max()));
  }
  if (!spec.contains(x)) throw ArgumentError("basis_eval: point outside the domain");
  return std::sin(std::numbers::pi * (j + 1) * x);
}

double series_eval(const SeriesFunction& f, double x) {
  if (!f.spec().contains(x)) throw ArgumentError("series_eval: point outside the domain");
  double acc = 0.0;
  const auto c = f.coeffs();
  for (int j = 1; j <= f.terms(); ++j) acc += c[j - 1] * std::sin(std::numbers::pi * (j + 1) * x);
  return acc;
}

SeriesFunction make_series(const EigenSpec& spec, double s, int terms) {
  if (!(s > 0.0)) throw ArgumentError("make_series: smoothness s must be > 0");
  if (terms < 1 || terms > spec.j_max()) {
    throw ArgumentError("make_series: truncation " + std::to_string(terms) + " outside 1.." +
                        std::to_string(spec.j_max()));
  }
  std::vector<double> c(static_cast<std::size_t>(terms));
  for (int j = 1; j <= terms; ++j) c[j - 1] = std::pow(static_cast<double>(j + 1), -spec.r() * s);
  return SeriesFunction(spec, std::move(c));
}

Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> feature_matrix(
    const EigenSpec& spec, std::span<const double> xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> phi(n, spec.j_max());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!spec.contains(xs[i])) throw ArgumentError("kernel input outside the domain");
    for (int j = 1; j <= spec.j_max(); ++j) {
      phi(i, j - 1) = std::sin(std::numbers::pi * (j + 1) * xs[i]);
    }
  }
  return phi;
}

Eigen::MatrixXd cross_kernel(const EigenSpec& spec, std::span<const double> a,
                             std::span<const double> b) {
  const auto fa = feature_matrix(spec, a);
  const auto fb = feature_matrix(spec, b);
  const auto width = static_cast<std::size_t>(spec.j_max());
  const auto mu = spec.eigenvalues();
  Eigen::MatrixXd k(fa.rows(), fb.rows());
  for (Eigen::Index i = 0; i < fa.rows(); ++i) {
    const std::span<const double> row_a(fa.row(i).data(), width);
    for (Eigen::Index m = 0; m < fb.rows(); ++m) {
      k(i, m) = simd::weighted_dot(mu, row_a, std::span<const double>(fb.row(m).data(), width));
    }
  }
  return k;
}

Eigen::MatrixXd kernel_matrix(const EigenSpec& spec, std::span<const double> xs) {
  if (xs.empty()) throw ArgumentError("kernel_matrix: empty point set");
  const auto phi = feature_matrix(spec, xs);
  const auto width = static_cast<std::size_t>(spec.j_max());
  const auto mu = spec.eigenvalues();
  const auto n = phi.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::span<const double> row_i(phi.row(i).data(), width);
    for (Eigen::Index m = i; m < n; ++m) {
      const double v = simd::weighted_dot(mu, row_i, std::span<const double>(phi.row(m).data(), width));
      k(i, m) = v;
      k(m, i) = v;
    }
  }
  return k;
}

std::vector<double> gaussian_noise(std::size_t n, double sigma2, std::uint64_t seed,
                                   std::uint64_t stream) {
  if (!(sigma2 >= 0.0)) throw ArgumentError("noise variance must be >= 0");
  auto engine = make_engine(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(sigma2);
  std::vector<double> eps(n);
  for (auto& e : eps) e = sd * normal(engine);
  return eps;
}

TrainingSet sample_training_set(const SeriesFunction& f, int n, double sigma2,
                                std::uint64_t seed) {
  if (n < 1) throw ArgumentError("sample_training_set: N must be >= 1");
  if (!(sigma2 >= 0.0)) throw ArgumentError("sample_training_set: sigma2 must be >= 0");
  const auto& spec = f.spec();
  auto engine = make_engine(seed, kInputStream);
  std::uniform_real_distribution<double> uniform(spec.domain_lo(), spec.domain_hi());
  TrainingSet set;
  set.sigma2 = sigma2;
  set.seed = seed;
  set.xs.resize(static_cast<std::size_t>(n));
  for (auto& x : set.xs) x = uniform(engine);
  const auto eps = gaussian_noise(set.xs.size(), sigma2, seed, kNoiseStream);
  set.ys = series_values(f, set.xs);
  for (std::size_t i = 0; i < set.ys.size(); ++i) set.ys[i] += eps[i];
  return set;
}

std::vector<double> series_values(const SeriesFunction& f, std::span<const double> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = series_eval(f, xs[i]);
  return out;
}

std::vector<double> uniform_grid(const EigenSpec& spec, int n) {
  if (n < 2) throw ArgumentError("grid needs at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double lo = spec.domain_lo();
  const double step = spec.domain_length() / (n - 1);
  for (int i = 0; i < n; ++i) grid[i] = lo + step * i;
  grid.back() = spec.domain_hi();
  return grid;
}

}  // namespace synthmix
