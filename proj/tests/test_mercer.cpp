#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "synthmix/error.hpp"
#include "synthmix/mercer.hpp"

using namespace synthmix;

TEST_SUITE("mercer") {
  TEST_CASE("spec validation and eigenvalues") {
    CHECK_THROWS_AS(EigenSpec(0.4, 10), ArgumentError);
    CHECK_THROWS_AS(EigenSpec(1.0, 0), ArgumentError);
    CHECK_THROWS_AS(EigenSpec(1.0, 5, 1.0, 1.0), ArgumentError);
    const EigenSpec spec(2.0, 100);
    CHECK(spec.eigenvalue(1) == doctest::Approx(0.0625));
    for (int j = 1; j < spec.j_max(); ++j) {
      CHECK(spec.eigenvalue(j) > spec.eigenvalue(j + 1));
      CHECK(spec.eigenvalue(j + 1) > 0.0);
    }
    CHECK_THROWS_AS(spec.eigenvalue(0), ArgumentError);
    CHECK_THROWS_AS(spec.eigenvalue(101), ArgumentError);
  }

  TEST_CASE("basis values") {
    const EigenSpec spec(2.0, 10);
    CHECK(basis_eval(spec, 1, 0.0) == 0.0);
    CHECK(basis_eval(spec, 1, 0.25) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(basis_eval(spec, 3, 1.0 / 3.0) == doctest::Approx(-0.8660254037844386).epsilon(1e-12));
    CHECK_THROWS_AS(basis_eval(spec, 11, 0.5), ArgumentError);
    CHECK_THROWS_AS(basis_eval(spec, 1, 3.5), ArgumentError);
  }

  TEST_CASE("series construction and evaluation") {
    const EigenSpec spec(2.0, 100);
    const auto f1 = make_series(spec, 0.8, 1);
    CHECK(f1.coeff(1) == doctest::Approx(0.329876977693224).epsilon(1e-12));
    CHECK(f1.coeff(2) == 0.0);
    const auto g = make_series(spec, 1.5, 10);
    CHECK(g.coeff(10) == doctest::Approx(1.0 / 1331.0).epsilon(1e-12));
    CHECK_THROWS_AS(make_series(spec, 0.8, 101), ArgumentError);
    CHECK_THROWS_AS(make_series(spec, 0.0, 5), ArgumentError);

    const auto steep = make_series(spec, 100.0, 20);
    for (int j = 1; j <= 20; ++j) CHECK(steep.coeff(j) <= std::pow(2.0, -200.0));

    CHECK(series_eval(SeriesFunction(spec, {0.0, 0.0, 0.0}), 1.3) == 0.0);
    CHECK(series_eval(SeriesFunction(spec, {1.0}), 0.25) == doctest::Approx(1.0));

    const auto f = make_series(spec, 0.8, 100);
    const double want = static_cast<double>(oracle::series_value(2.0, 0.8, 100, 0.5));
    CHECK(std::abs(series_eval(f, 0.5) - want) <= 1e-13);
    // Extended-precision summation, 25 digits.
    CHECK(std::abs(series_eval(f, 0.5) - -0.1230054868992914856872771) <= 1e-13);
  }

  TEST_CASE("series evaluation is linear") {
    const EigenSpec spec(1.5, 40);
    std::mt19937_64 eng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a(40);
      std::vector<double> b(40);
      std::vector<double> sum(40);
      for (int j = 0; j < 40; ++j) {
        a[j] = nd(eng);
        b[j] = nd(eng);
        sum[j] = a[j] + b[j];
      }
      const double x = 3.0 * (trial + 0.5) / 20.0;
      const double lhs = series_eval(SeriesFunction(spec, sum), x);
      const double rhs = series_eval(SeriesFunction(spec, a), x) + series_eval(SeriesFunction(spec, b), x);
      CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
  }

  TEST_CASE("kernel matrix against a brute-force summation") {
    const EigenSpec spec(2.0, 100);
    const std::vector<double> xs{0.0, 0.75, 1.5, 2.25, 3.0};
    const auto k = kernel_matrix(spec, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t m = 0; m < xs.size(); ++m) {
        const double want = static_cast<double>(oracle::kernel_entry(2.0, 100, xs[i], xs[m]));
        CHECK(std::abs(k(i, m) - want) <= 1e-12);
      }
    }
    CHECK(kernel_matrix(spec, std::vector<double>{0.0})(0, 0) == 0.0);
    const auto dup = kernel_matrix(spec, std::vector<double>{1.1, 1.1});
    CHECK(dup(0, 0) == dup(0, 1));
    CHECK(dup(1, 0) == dup(1, 1));
  }

  TEST_CASE("kernel matrix is symmetric PSD and obeys the truncation tail bound") {
    const EigenSpec spec(2.0, 100);
    const EigenSpec wide(2.0, 200);
    const auto ts = sample_training_set(make_series(spec, 0.8, 100), 25, 0.0, 3);
    const auto k = kernel_matrix(spec, ts.xs);
    const auto k2 = kernel_matrix(wide, ts.xs);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * k.trace());
    double tail = 0.0;
    for (int j = 101; j <= 200; ++j) tail += wide.eigenvalue(j);
    CHECK((k2 - k).cwiseAbs().maxCoeff() <= tail + 1e-15);
  }

  TEST_CASE("training sets are reproducible and correctly distributed") {
    const EigenSpec spec(2.0, 100);
    const auto f = make_series(spec, 0.8, 100);
    const auto a = sample_training_set(f, 15, 0.1, 42);
    const auto b = sample_training_set(f, 15, 0.1, 42);
    CHECK(a.xs == b.xs);
    CHECK(a.ys == b.ys);
    for (double x : a.xs) CHECK(spec.contains(x));

    const auto clean = sample_training_set(f, 15, 0.0, 42);
    for (std::size_t i = 0; i < clean.size(); ++i) CHECK(clean.ys[i] == series_eval(f, clean.xs[i]));

    const auto big = sample_training_set(f, 10000, 0.1, 5);
    double mean = 0.0;
    for (std::size_t i = 0; i < big.size(); ++i) mean += big.ys[i] - series_eval(f, big.xs[i]);
    mean /= 10000.0;
    double var = 0.0;
    for (std::size_t i = 0; i < big.size(); ++i) {
      const double e = big.ys[i] - series_eval(f, big.xs[i]) - mean;
      var += e * e;
    }
    var /= 9999.0;
    CHECK(var >= 0.09);
    CHECK(var <= 0.11);
    CHECK_THROWS_AS(sample_training_set(f, 0, 0.1, 1), ArgumentError);
  }

  TEST_CASE("uniform grid includes both endpoints") {
    const EigenSpec spec(1.0, 5);
    const auto g = uniform_grid(spec, 500);
    CHECK(g.size() == 500);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 3.0);
  }
}
