#pragma once
// Shared random problem generators for the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "synthmix/krr.hpp"
#include "synthmix/mercer.hpp"

namespace fixtures {

struct KrrInstance {
  synthmix::EigenSpec spec;
  synthmix::SeriesFunction f;
  synthmix::SeriesFunction g;
  synthmix::TrainingSet train;
  double lambda;
};

/// N in [5, 20], T in [10, 50], r in [0.5, 3], lambda log-uniform in [1e-4, 10].
inline KrrInstance random_krr_instance(std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_int_distribution<int> n_dist(5, 20);
  std::uniform_int_distribution<int> t_dist(10, 50);
  std::uniform_real_distribution<double> r_dist(0.5, 3.0);
  std::uniform_real_distribution<double> log_lambda(-4.0, 1.0);
  std::normal_distribution<double> nd;
  const int n = n_dist(eng);
  const int t = t_dist(eng);
  const double r = r_dist(eng);
  const double lambda = std::pow(10.0, log_lambda(eng));
  synthmix::EigenSpec spec(r, t);
  std::vector<double> fc(static_cast<std::size_t>(t));
  std::vector<double> gc(static_cast<std::size_t>(t));
  for (int j = 1; j <= t; ++j) {
    const double scale = std::pow(j + 1.0, -r);
    fc[j - 1] = scale * nd(eng);
    gc[j - 1] = scale * nd(eng);
  }
  synthmix::SeriesFunction f(spec, fc);
  synthmix::SeriesFunction g(spec, gc);
  auto train = synthmix::sample_training_set(f, n, 0.1, seed + 1000);
  return KrrInstance{spec, f, g, train, lambda};
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace fixtures
