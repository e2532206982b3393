#include "synthmix/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "synthmix/error.hpp"
#include "synthmix/minimize.hpp"

namespace synthmix {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("lambda must be finite and > 0, got " + std::to_string(lambda));
  }
}

void require_unit_open(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ArgumentError("lambda must lie in (0, 1), got " + std::to_string(lambda));
  }
}

double bias_exponent(double r) { return 2.0 - 1.0 / (4.0 * r); }

double bias_scale(const KernelBoundInputs& in, const KernelBoundOptions& opt) {
  return opt.include_beta_constant ? beta_constant(in.r) : 1.0;
}

RatioPlan plan_from_lambda(double lambda, int n, PlanSource source, PlanStatus status) {
  RatioPlan plan;
  plan.lambda_star = lambda;
  plan.m_star = std::isinf(lambda) ? kInf : static_cast<double>(n) * lambda;
  plan.lambda_tilde = ratio_to_tilde(lambda);
  plan.source = source;
  plan.status = status;
  return plan;
}

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

void KernelBoundInputs::validate() const {
  if (n < 1) throw ArgumentError("N must be >= 1");
  if (!(r >= 0.5) || !std::isfinite(r)) throw ArgumentError("r must be >= 0.5");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ArgumentError("sigma2 must be >= 0");
  if (!(d_gen >= 0.0) || !std::isfinite(d_gen)) throw ArgumentError("D_gen must be >= 0");
  if (!(d_shift >= 0.0) || !std::isfinite(d_shift)) throw ArgumentError("D_shift must be >= 0");
}

double beta_constant(double r) {
  if (!(r >= 0.5)) throw ArgumentError("beta_constant: r must be >= 0.5");
  const double a = 1.0 / (2.0 * r);
  return std::sqrt(std::beta(a, 2.0 - a) / (2.0 * r));
}

double kernel_bound(const KernelBoundInputs& in, double lambda, const KernelBoundOptions& opt) {
  in.validate();
  require_positive_lambda(lambda);
  const double n = static_cast<double>(in.n);
  const double variance = (in.d_gen + in.sigma2) / (n * lambda * lambda);
  if (in.d_gen == 0.0) return variance;
  return variance + bias_scale(in, opt) * std::pow(lambda, bias_exponent(in.r)) * in.d_gen;
}

double kernel_bound_derivative(const KernelBoundInputs& in, double lambda,
                               const KernelBoundOptions& opt) {
  in.validate();
  require_positive_lambda(lambda);
  const double n = static_cast<double>(in.n);
  const double p = bias_exponent(in.r);
  return -2.0 * (in.d_gen + in.sigma2) / (n * lambda * lambda * lambda) +
         bias_scale(in, opt) * p * std::pow(lambda, p - 1.0) * in.d_gen;
}

double domain_shift_kernel_bound(const KernelBoundInputs& in, double lambda) {
  in.validate();
  require_positive_lambda(lambda);
  const double inv = 1.0 / (static_cast<double>(in.n) * lambda * lambda);
  return (std::pow(lambda, in.r + 1.0) + inv) * (in.d_shift + in.d_gen) + in.sigma2 * inv;
}

std::string_view to_string(PlanSource s) {
  return s == PlanSource::kClosedForm ? "closed_form" : "numeric";
}

std::string_view to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::kInterior:
      return "interior";
    case PlanStatus::kUnbounded:
      return "unbounded";
    case PlanStatus::kBoundary:
      return "boundary";
  }
  return "unknown";
}

double RatioPlan::m_star_rounded() const { return std::ceil(m_star); }

RatioPlan lambda_star_closed_form(const KernelBoundInputs& in, ClosedFormVariant variant) {
  in.validate();
  if (in.d_gen == 0.0) {
    return plan_from_lambda(kInf, in.n, PlanSource::kClosedForm, PlanStatus::kUnbounded);
  }
  const double r = in.r;
  const double n = static_cast<double>(in.n);
  const double d = in.d_gen;
  double lambda = 0.0;
  switch (variant) {
    case ClosedFormVariant::kWithConstant:
      lambda = std::pow(8.0 * r * (d + in.sigma2) / ((8.0 * r - 1.0) * n * d),
                        4.0 * r / (16.0 * r + 1.0));
      break;
    case ClosedFormVariant::kRateOnly:
      lambda = std::pow((d + in.sigma2) / (n * d), 4.0 * r / (16.0 * r + 1.0));
      break;
    case ClosedFormVariant::kNoiseRatio:
      lambda = std::pow(in.sigma2 / (n * d), 4.0 * r / (8.0 * r + 1.0));
      break;
  }
  const PlanStatus status = lambda > 0.0 ? PlanStatus::kInterior : PlanStatus::kBoundary;
  return plan_from_lambda(lambda, in.n, PlanSource::kClosedForm, status);
}

RatioPlan lambda_star_numeric(const KernelBoundInputs& in, const KernelBoundOptions& opt) {
  in.validate();
  auto objective = [&](double t) { return kernel_bound(in, std::exp(t), opt); };
  const ScalarMinimum coarse = scan_then_golden(objective, kLogLambdaMin, kLogLambdaMax);
  if (!coarse.interior || in.d_gen == 0.0) {
    const double edge = coarse.interior ? kLogLambdaMax : coarse.x;
    return plan_from_lambda(std::exp(edge), in.n, PlanSource::kNumeric, PlanStatus::kBoundary);
  }
  // Golden section resolves t only to ~sqrt(eps); finish on the derivative sign.
  auto slope = [&](double t) { return kernel_bound_derivative(in, std::exp(t), opt); };
  double lo = coarse.x;
  double hi = coarse.x;
  double width = 1e-6;
  while (slope(lo) > 0.0 && lo > kLogLambdaMin) lo = std::max(kLogLambdaMin, lo - (width *= 2.0));
  width = 1e-6;
  while (slope(hi) < 0.0 && hi < kLogLambdaMax) hi = std::min(kLogLambdaMax, hi + (width *= 2.0));
  double t = coarse.x;
  if (slope(lo) <= 0.0 && slope(hi) >= 0.0) {
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    t = objective(lo) <= objective(hi) ? lo : hi;
    if (objective(coarse.x) < objective(t)) t = coarse.x;
  }
  return plan_from_lambda(std::exp(t), in.n, PlanSource::kNumeric, PlanStatus::kInterior);
}

LambdaMinimum minimize_domain_shift_kernel_bound(const KernelBoundInputs& in) {
  in.validate();
  const ScalarMinimum m = scan_then_golden(
      [&](double t) { return domain_shift_kernel_bound(in, std::exp(t)); }, kLogLambdaMin,
      kLogLambdaMax);
  return {std::exp(m.x), m.value, m.interior};
}

BoundParams::BoundParams(double m, double m1, double m2, double lipschitz, double diameter,
                         double d_star, double c)
    : m_(m), m1_(m1), m2_(m2), l_(lipschitz), diam_(diameter), d_star_(d_star), c_(c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError(std::string(name) + " must be > 0");
  };
  positive(m, "m");
  positive(m1, "M1");
  positive(m2, "M2");
  positive(lipschitz, "L");
  positive(diameter, "D (diameter)");
  positive(c, "C");
  if (!(d_star >= 0.0) || !std::isfinite(d_star)) throw ArgumentError("d_star must be >= 0");
}

double stability_constant(const BoundParams& p, double lambda, double n, double mixed_risk) {
  require_unit_open(lambda);
  if (!(mixed_risk >= 0.0)) throw ArgumentError("mixed risk must be >= 0");
  if (!(n > 0.0)) throw ArgumentError("N must be > 0");
  const double l2 = p.lipschitz() * p.lipschitz();
  const double inner =
      p.eta() * mixed_risk / (l2 * lambda) + p.tau() * (1.0 - lambda) / (l2 * lambda * n);
  return mixed_risk / lambda + p.c() * p.xi() * std::pow(inner, 1.0 / (p.d_star() + 1.0));
}

double mixed_gap_bound(const BoundParams& p, double lambda, double n, double w2, double r_star) {
  require_unit_open(lambda);
  if (!(w2 >= 0.0) || !(r_star >= 0.0)) throw ArgumentError("w2 and R* must be >= 0");
  if (!(n > 0.0)) throw ArgumentError("N must be > 0");
  const double l2 = p.lipschitz() * p.lipschitz();
  const double xi = p.xi();
  const double w2sq = w2 * w2;
  const double inner = p.eta() * r_star / (l2 * lambda) + p.eta() * xi * w2sq / l2 +
                       p.tau() * (1.0 - lambda) / (l2 * lambda * n);
  return lambda * xi * w2sq +
         p.c() * (1.0 - lambda) * xi * std::pow(inner, 1.0 / (p.d_star() + 1.0));
}

double domain_shift_gap_bound(const BoundParams& p, double lambda, double n,
                              double w2_target_synth, double w2_target_source, double r_star) {
  require_unit_open(lambda);
  if (!(w2_target_synth >= 0.0) || !(w2_target_source >= 0.0) || !(r_star >= 0.0)) {
    throw ArgumentError("Wasserstein distances and R* must be >= 0");
  }
  if (!(n > 0.0)) throw ArgumentError("N must be > 0");
  const double l2 = p.lipschitz() * p.lipschitz();
  const double xi = p.xi();
  const double synth_sq = w2_target_synth * w2_target_synth;
  const double source_sq = w2_target_source * w2_target_source;
  // No eta factor in this bracket, unlike mixed_gap_bound.
  const double inner = r_star / (l2 * lambda) + xi * source_sq / l2 +
                       p.tau() * (1.0 - lambda) / (l2 * lambda * n);
  return lambda * xi * synth_sq + (1.0 - lambda) * xi * source_sq +
         p.c() * (1.0 - lambda) * xi * std::pow(inner, 1.0 / (p.d_star() + 1.0));
}

LambdaMinimum minimize_on_unit_interval(const std::function<double(double)>& bound) {
  const ScalarMinimum m =
      scan_then_golden([&](double t) { return bound(logistic(t)); }, -30.0, 30.0, 1201);
  return {logistic(m.x), m.value, m.interior};
}

LambdaMinimum minimize_mixed_gap(const BoundParams& p, double n, double w2, double r_star) {
  return minimize_on_unit_interval(
      [&](double lambda) { return mixed_gap_bound(p, lambda, n, w2, r_star); });
}

LambdaMinimum minimize_domain_shift_gap(const BoundParams& p, double n, double w2_target_synth,
                                        double w2_target_source, double r_star) {
  return minimize_on_unit_interval([&](double lambda) {
    return domain_shift_gap_bound(p, lambda, n, w2_target_synth, w2_target_source, r_star);
  });
}

double rho(double alpha, double c, double n, double m, double ipm) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
  if (!(n >= 1.0) || !(m >= 1.0)) throw ArgumentError("N and M must be >= 1");
  if (!(c >= 0.0) || !(ipm >= 0.0)) throw ArgumentError("c and IPM must be >= 0");
  return c / std::sqrt(effective_sample_size(alpha, n, m)) + alpha * ipm;
}

double effective_sample_size(double alpha, double n, double m) {
  return (1.0 - alpha) * n + alpha * m;
}

std::string_view to_string(MixDecision d) {
  switch (d) {
    case MixDecision::kUseNone:
      return "use_none";
    case MixDecision::kUseAll:
      return "use_all";
    case MixDecision::kMix:
      return "mix";
  }
  return "unknown";
}

TraditionalPlan traditional_plan(double c, double n, double m, double ipm) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError("c must be > 0");
  if (!(n >= 1.0) || !(m >= 1.0)) throw ArgumentError("N and M must be >= 1");
  if (!(ipm >= 0.0) || !std::isfinite(ipm)) throw ArgumentError("IPM must be >= 0");

  TraditionalPlan plan;
  const double delta = m - n;
  plan.degenerate = (delta == 0.0);

  if (delta <= 0.0) {
    // M <= N: rho is nondecreasing in alpha.
    plan.n_star = n;
    plan.alpha_star = 0.0;
  } else if (ipm == 0.0) {
    plan.n_star = kInf;
    plan.alpha_star = 1.0;
  } else {
    plan.n_star = std::pow(c * delta / (2.0 * ipm), 2.0 / 3.0);
    plan.alpha_star = std::clamp((plan.n_star - n) / delta, 0.0, 1.0);
  }

  if (ipm >= c / std::sqrt(n)) {
    plan.decision = MixDecision::kUseNone;
    plan.alpha_rule = 0.0;
  } else if (ipm <= c / std::sqrt(m)) {
    plan.decision = MixDecision::kUseAll;
    plan.alpha_rule = 1.0;
  } else {
    plan.decision = MixDecision::kMix;
    plan.alpha_rule = plan.alpha_star;
  }

  if (ipm == 0.0) {
    plan.m_bal = kInf;
  } else {
    const double ratio = (2.0 * c / std::sqrt(n)) / ipm;
    plan.m_bal = std::max(0.0, ratio * ratio - 1.0) * n;
  }
  return plan;
}

double ratio_to_tilde(double lambda) {
  if (!(lambda >= 0.0)) throw ArgumentError("ratio must be >= 0");
  if (std::isinf(lambda)) return 1.0;
  return lambda / (1.0 + lambda);
}

double tilde_to_ratio(double lambda_tilde) {
  if (!(lambda_tilde >= 0.0 && lambda_tilde <= 1.0)) {
    throw ArgumentError("mixing weight must lie in [0, 1]");
  }
  if (lambda_tilde == 1.0) return kInf;
  return lambda_tilde / (1.0 - lambda_tilde);
}

}  // namespace synthmix
