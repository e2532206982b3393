#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "synthmix/bounds.hpp"
#include "synthmix/error.hpp"

using namespace synthmix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

KernelBoundInputs h1_inputs(double d = 1.0) { return {15, 2.0, 0.1, d, 0.0}; }

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("kernel bound values") {
    CHECK(kernel_bound({1, 1.0, 1.0, 0.0, 0.0}, 1.0) == doctest::Approx(1.0));
    CHECK(kernel_bound({100, 2.0, 0.0, 1.0, 0.0}, 1.0) == doctest::Approx(1.01));
    CHECK(kernel_bound({10, 1.0, 0.5, 0.0, 0.0}, 2.0) == doctest::Approx(0.5 / 40.0));
    CHECK_THROWS_AS(kernel_bound(h1_inputs(), 0.0), ArgumentError);
    CHECK_THROWS_AS(kernel_bound(h1_inputs(), -1.0), ArgumentError);
    CHECK_THROWS_AS(kernel_bound({0, 2.0, 0.1, 1.0, 0.0}, 1.0), ArgumentError);
    CHECK_THROWS_AS(kernel_bound({15, 0.4, 0.1, 1.0, 0.0}, 1.0), ArgumentError);
  }

  TEST_CASE("Beta constant against quadrature") {
    for (double r : {0.5, 1.0, 2.0, 3.0, 4.5}) {
      CAPTURE(r);
      const double a = 1.0 / (2.0 * r);
      const double b = 2.0 - a;
      // B(a, b) with t = u^(1/a) removes the endpoint singularity.
      const double integral = oracle::simpson(
          [&](double u) { return std::pow(1.0 - std::pow(u, 1.0 / a), b - 1.0) / a; }, 0.0, 1.0,
          200000);
      CHECK(beta_constant(r) == doctest::Approx(std::sqrt(integral / (2.0 * r))).epsilon(1e-8));
    }
    CHECK(beta_constant(0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(beta_constant(2.0) == doctest::Approx(0.9127105515467067675).epsilon(1e-14));
    const KernelBoundInputs in{100, 2.0, 0.0, 1.0, 0.0};
    KernelBoundOptions opt;
    opt.include_beta_constant = true;
    CHECK(kernel_bound(in, 1.0, opt) == doctest::Approx(0.01 + beta_constant(2.0)));
  }

  TEST_CASE("H.1 bound is U-shaped over a log grid") {
    const KernelBoundInputs in{15, 2.0, 0.1, 273535.07015757693, 0.0};
    int sign_changes = 0;
    double prev_value = kernel_bound(in, 1e-10);
    double prev_diff = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double v = kernel_bound(in, std::pow(10.0, -10.0 + 20.0 * k / 199.0));
      const double d = v - prev_value;
      if (k > 1 && (d > 0.0) != (prev_diff > 0.0)) ++sign_changes;
      prev_diff = d;
      prev_value = v;
    }
    CHECK(sign_changes == 1);
  }

  TEST_CASE("closed-form plan") {
    const auto p = lambda_star_closed_form(h1_inputs());
    // (8r (D + s2) / ((8r - 1) N D))^(4r / (16r + 1)) at extended precision.
    CHECK(p.lambda_star == doctest::Approx(0.5391584299098057975656093).epsilon(1e-14));
    CHECK(p.m_star == doctest::Approx(15.0 * p.lambda_star));
    CHECK(p.m_star_rounded() == 9.0);
    CHECK(p.lambda_tilde == doctest::Approx(p.lambda_star / (1.0 + p.lambda_star)));
    CHECK(p.source == PlanSource::kClosedForm);
    CHECK(p.status == PlanStatus::kInterior);

    const double noiseless = std::pow(16.0 / (15.0 * 15.0), 8.0 / 33.0);
    CHECK(lambda_star_closed_form({15, 2.0, 0.0, 3.0, 0.0}).lambda_star ==
          doctest::Approx(noiseless).epsilon(1e-14));
    double prev = kInf;
    for (double d : {0.1, 1.0, 10.0, 100.0, 1e4, 1e8}) {
      const double l = lambda_star_closed_form({15, 2.0, 0.1, d, 0.0}).lambda_star;
      CHECK(l < prev);
      CHECK(l > noiseless);
      prev = l;
    }
    const auto unbounded = lambda_star_closed_form(h1_inputs(0.0));
    CHECK(unbounded.status == PlanStatus::kUnbounded);
    CHECK(std::isinf(unbounded.lambda_star));
    CHECK(unbounded.lambda_tilde == 1.0);

    const auto rate = lambda_star_closed_form(h1_inputs(), ClosedFormVariant::kRateOnly);
    CHECK(rate.lambda_star == doctest::Approx(std::pow(1.1 / 15.0, 8.0 / 33.0)));
    const auto noise = lambda_star_closed_form(h1_inputs(), ClosedFormVariant::kNoiseRatio);
    CHECK(noise.lambda_star == doctest::Approx(std::pow(0.1 / 15.0, 8.0 / 17.0)));
  }

  TEST_CASE("numeric plan sits at the stationary point of the bound") {
    const auto in = h1_inputs();
    const auto p = lambda_star_numeric(in);
    CHECK(p.source == PlanSource::kNumeric);
    CHECK(p.status == PlanStatus::kInterior);
    // Root of the derivative: (8r (D + s2) / ((8r - 1) N D))^(4r / (16r - 1)).
    CHECK(p.lambda_star == doctest::Approx(0.5180930668442350159079963).epsilon(1e-12));
    const double h = 1e-5 * p.lambda_star;
    const double fd = (kernel_bound(in, p.lambda_star + h) - kernel_bound(in, p.lambda_star - h)) / (2 * h);
    CHECK(std::abs(fd) <= 1e-6);
    CHECK(kernel_bound(in, p.lambda_star) <= kernel_bound(in, lambda_star_closed_form(in).lambda_star));

    const auto flat = lambda_star_numeric(h1_inputs(0.0));
    CHECK(flat.status == PlanStatus::kBoundary);
    CHECK(flat.lambda_star == doctest::Approx(std::exp(kLogLambdaMax)));
  }

  TEST_CASE("analytic derivative matches central differences") {
    const KernelBoundInputs in{40, 1.5, 0.3, 2.0, 0.0};
    for (double l : {0.01, 0.3, 1.0, 7.0}) {
      const double h = 1e-6 * l;
      const double fd = (kernel_bound(in, l + h) - kernel_bound(in, l - h)) / (2 * h);
      CHECK(kernel_bound_derivative(in, l) == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  TEST_CASE("domain-shift kernel bound") {
    CHECK(domain_shift_kernel_bound({10, 1.0, 0.5, 0.0, 0.0}, 2.0) == doctest::Approx(0.5 / 40.0));
    CHECK(domain_shift_kernel_bound({1, 1.0, 0.0, 0.5, 0.5}, 1.0) == doctest::Approx(2.0));
    const KernelBoundInputs in{100, 1.0, 0.1, 1.0, 2.0};
    const auto m = minimize_domain_shift_kernel_bound(in);
    CHECK(m.interior);
    const double best = oracle::golden_min(
        [&](double t) { return domain_shift_kernel_bound(in, std::exp(t)); }, -12.0, 12.0);
    CHECK(m.lambda == doctest::Approx(std::exp(best)).epsilon(1e-6));
    for (double l : {0.1, 1.0, 3.0}) {
      KernelBoundInputs more = in;
      more.d_shift += 0.5;
      CHECK(domain_shift_kernel_bound(more, l) > domain_shift_kernel_bound(in, l));
      more = in;
      more.d_gen += 0.5;
      CHECK(domain_shift_kernel_bound(more, l) > domain_shift_kernel_bound(in, l));
    }
    CHECK_THROWS_AS(domain_shift_kernel_bound(in, 0.0), ArgumentError);
  }

  TEST_CASE("stability constant") {
    const BoundParams p;
    CHECK(stability_constant(p, 0.5, 1e12, 0.0) <= 1e-5);
    const BoundParams flat(1.0, 2.0, 3.0, 1.5, 2.0, 0.0, 0.7);
    const double l = 0.3;
    const double n = 50.0;
    const double r = 0.2;
    const double expect = r / l + 0.7 * flat.xi() *
                                      (flat.eta() * r / (2.25 * l) +
                                       flat.tau() * (1 - l) / (2.25 * l * n));
    CHECK(stability_constant(flat, l, n, r) == doctest::Approx(expect).epsilon(1e-14));
    for (double lam : {0.9, 0.5, 0.2, 0.05}) {
      CHECK(stability_constant(p, lam / 2.0, 20.0, 0.3) > stability_constant(p, lam, 20.0, 0.3));
    }
    CHECK_THROWS_AS(stability_constant(p, 0.0, 10.0, 0.1), ArgumentError);
    CHECK_THROWS_AS(stability_constant(p, 1.0, 10.0, 0.1), ArgumentError);
    CHECK_THROWS_AS(BoundParams(0.0, 1, 1, 1, 1, 1), ArgumentError);
  }

  TEST_CASE("mixed gap bound") {
    const BoundParams p;
    CHECK(mixed_gap_bound(p, 1.0 - 1e-12, 10.0, 0.7, 0.1) == doctest::Approx(p.xi() * 0.49).epsilon(1e-6));
    CHECK(mixed_gap_bound(p, 0.5, 1e15, 0.0, 0.0) <= 1e-6);
    const auto m = minimize_mixed_gap(p, 100.0, 2.0, 0.0);
    CHECK(m.interior);
    CHECK(m.lambda > 0.0);
    CHECK(m.lambda < 1.0);
    const double grid_best = [&] {
      double best = kInf;
      for (int i = 1; i < 2000; ++i) best = std::min(best, mixed_gap_bound(p, i / 2000.0, 100.0, 2.0, 0.0));
      return best;
    }();
    CHECK(m.value <= grid_best + 1e-12);
  }

  TEST_CASE("domain-shift gap bound") {
    const BoundParams p;
    CHECK(domain_shift_gap_bound(p, 1.0 - 1e-13, 10.0, 0.0, 0.8, 0.1) <= 1e-5);
    for (double l : {0.25, 0.75}) {
      const double w = 0.6;
      const BoundParams zero_c(1, 1, 1, 1, 1, 1, 1e-300);
      CHECK(domain_shift_gap_bound(zero_c, l, 10.0, w, w, 0.0) ==
            doctest::Approx(zero_c.xi() * w * w).epsilon(1e-12));
    }
    const auto closer = minimize_domain_shift_gap(p, 100.0, 0.2, 1.0, 0.0);
    const auto farther = minimize_domain_shift_gap(p, 100.0, 1.0, 0.2, 0.0);
    CHECK(closer.lambda > farther.lambda);
  }

  TEST_CASE("traditional bound") {
    CHECK(rho(0.0, 1.0, 100.0, 10000.0, 0.02) == doctest::Approx(0.1));
    CHECK(rho(1.0, 1.0, 100.0, 10000.0, 0.02) == doctest::Approx(0.01 + 0.02));
    CHECK(rho(0.5, 1.0, 100.0, 10000.0, 0.02) == doctest::Approx(1.0 / std::sqrt(5050.0) + 0.01).epsilon(1e-12));
    CHECK(rho(0.5, 1.0, 100.0, 10000.0, 0.02) == doctest::Approx(0.024072).epsilon(1e-5));
    CHECK(effective_sample_size(0.25, 100.0, 500.0) == doctest::Approx(200.0));

    const auto t = traditional_plan(1.0, 100.0, 10000.0, 0.02);
    const double oracle_alpha = oracle::golden_min(
        [](double a) { return rho(a, 1.0, 100.0, 10000.0, 0.02); }, 0.0, 1.0);
    CHECK(t.alpha_star == doctest::Approx(oracle_alpha).epsilon(1e-6));
    CHECK(t.decision == MixDecision::kMix);
    CHECK(t.alpha_rule == t.alpha_star);

    const auto none = traditional_plan(1.0, 100.0, 10000.0, 1.0 / std::sqrt(100.0));
    CHECK(none.decision == MixDecision::kUseNone);
    CHECK(none.alpha_rule == 0.0);
    const auto all = traditional_plan(1.0, 100.0, 10000.0, 1.0 / std::sqrt(10000.0));
    CHECK(all.decision == MixDecision::kUseAll);
    CHECK(all.alpha_rule == 1.0);
    const auto bal = traditional_plan(1.3, 100.0, 10000.0, 2.0 * 1.3 / std::sqrt(100.0));
    CHECK(bal.m_bal == 0.0);

    const auto free = traditional_plan(1.0, 100.0, 10000.0, 0.0);
    CHECK(free.decision == MixDecision::kUseAll);
    CHECK(free.alpha_star == 1.0);
    CHECK(std::isinf(free.n_star));
    const auto same = traditional_plan(1.0, 100.0, 100.0, 0.05);
    CHECK(same.degenerate);
    const auto fewer = traditional_plan(1.0, 100.0, 50.0, 0.0);
    CHECK(fewer.alpha_star == 0.0);
    CHECK_THROWS_AS(traditional_plan(0.0, 100.0, 200.0, 0.1), ArgumentError);
  }

  TEST_CASE("ratio conversions") {
    CHECK(ratio_to_tilde(0.0) == 0.0);
    CHECK(ratio_to_tilde(1.0) == 0.5);
    CHECK(ratio_to_tilde(kInf) == 1.0);
    CHECK(tilde_to_ratio(0.5) == 1.0);
    CHECK(std::isinf(tilde_to_ratio(1.0)));
    for (double l : {1e-6, 0.3, 2.0, 1e5}) CHECK(tilde_to_ratio(ratio_to_tilde(l)) == doctest::Approx(l).epsilon(1e-10));
    CHECK_THROWS_AS(ratio_to_tilde(-1.0), ArgumentError);
    CHECK_THROWS_AS(tilde_to_ratio(1.5), ArgumentError);
  }
}
