#pragma once
// Closed-form generalization bounds and the synthetic-to-real ratio
// planners built on them. Asymptotic statements are evaluated with unit
// leading constants unless a constant is named explicitly.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string_view>

namespace synthmix {

struct KernelBoundInputs {
  int n = 1;             // real samples
  double r = 1.0;        // eigendecay exponent
  double sigma2 = 0.0;   // label noise variance
  double d_gen = 0.0;    // discrepancy between target and generator
  double d_shift = 0.0;  // discrepancy between target and source (0 in-domain)

  /// Throws ArgumentError unless n >= 1, r >= 0.5 and the rest are >= 0.
  void validate() const;
};

struct KernelBoundOptions {
  /// Multiply the bias term by sqrt(B(1/2r, 2 - 1/2r) / 2r).
  bool include_beta_constant = false;
};

/// sqrt(B(1/(2r), 2 - 1/(2r)) / (2r))
double beta_constant(double r);

/// (D + sigma^2) / (N lambda^2) + lambda^(2 - 1/(4r)) D
double kernel_bound(const KernelBoundInputs& in, double lambda, const KernelBoundOptions& opt = {});

/// d/dlambda of kernel_bound.
double kernel_bound_derivative(const KernelBoundInputs& in, double lambda,
                               const KernelBoundOptions& opt = {});

/// (lambda^(r+1) + 1/(N lambda^2)) (D_shift + D_gen) + sigma^2 / (N lambda^2)
double domain_shift_kernel_bound(const KernelBoundInputs& in, double lambda);

enum class PlanSource { kClosedForm, kNumeric };

enum class PlanStatus {
  kInterior,   // finite optimum
  kUnbounded,  // optimum at lambda -> infinity: no limit on synthetic data
  kBoundary,   // numeric optimum pinned to the edge of the search interval
};

std::string_view to_string(PlanSource s);
std::string_view to_string(PlanStatus s);

struct RatioPlan {
  double lambda_star = 0.0;
  double m_star = 0.0;  // N * lambda_star
  double lambda_tilde = 0.0;
  PlanSource source = PlanSource::kNumeric;
  PlanStatus status = PlanStatus::kInterior;

  /// M* rounded up to a whole number of synthetic samples.
  double m_star_rounded() const;
};

/// Closed-form variants of the optimal-lambda formula.
enum class ClosedFormVariant {
  kWithConstant,  // (8r (D + s2) / ((8r - 1) N D))^(4r / (16r + 1))
  kRateOnly,      // ((D + s2) / (N D))^(4r / (16r + 1))
  kNoiseRatio,    // (s2 / (N D))^(4r / (8r + 1))
};

/// D_gen = 0 yields status kUnbounded with lambda_star = +inf.
RatioPlan lambda_star_closed_form(const KernelBoundInputs& in,
                                  ClosedFormVariant variant = ClosedFormVariant::kWithConstant);

/// Search interval for the numeric planners, in natural-log lambda.
inline constexpr double kLogLambdaMin = -12.0;
inline constexpr double kLogLambdaMax = 12.0;

/// Minimizes kernel_bound over log(lambda) in [-12, 12]: bracket scan, golden
/// section at relative tolerance 1e-10, then bisection on the sign of the
/// analytic derivative inside the final bracket. A monotone bound returns
/// status kBoundary at the edge value.
RatioPlan lambda_star_numeric(const KernelBoundInputs& in, const KernelBoundOptions& opt = {});

struct LambdaMinimum {
  double lambda = 0.0;
  double value = 0.0;
  bool interior = true;
};

/// Numeric minimizer of domain_shift_kernel_bound over the same interval.
LambdaMinimum minimize_domain_shift_kernel_bound(const KernelBoundInputs& in);

class BoundParams {
 public:
  BoundParams() = default;
  /// Throws ArgumentError unless m, M1, M2, L, diameter > 0, d_star >= 0, C > 0.
  BoundParams(double m, double m1, double m2, double lipschitz, double diameter, double d_star,
              double c = 1.0);

  double m() const { return m_; }
  double m1() const { return m1_; }
  double m2() const { return m2_; }
  double lipschitz() const { return l_; }
  double diameter() const { return diam_; }
  double d_star() const { return d_star_; }
  double c() const { return c_; }

  double xi() const { return m1_ * l_ * l_ + m2_; }
  double eta() const { return m1_ / (m_ * m_); }
  double tau() const { return diam_ * diam_ * std::sqrt(m1_ * m2_) / m_; }

 private:
  double m_ = 1.0;
  double m1_ = 1.0;
  double m2_ = 1.0;
  double l_ = 1.0;
  double diam_ = 1.0;
  double d_star_ = 1.0;
  double c_ = 1.0;
};

/// Uniform-stability constant of the mixed-loss minimizer; lambda in (0, 1).
double stability_constant(const BoundParams& p, double lambda, double n, double mixed_risk);

/// Mixed-data generalization gap; w2 is the Wasserstein-2 distance between
/// real and synthetic inputs, r_star the best achievable population risk.
double mixed_gap_bound(const BoundParams& p, double lambda, double n, double w2, double r_star);

/// Generalization gap on a shifted target: w2_target_synth = W2(target,
/// synthetic), w2_target_source = W2(target, real source).
double domain_shift_gap_bound(const BoundParams& p, double lambda, double n,
                              double w2_target_synth, double w2_target_source, double r_star);

/// Minimizes a bound over lambda in (0, 1): scan in logit(lambda) on
/// [-30, 30], then golden section.
LambdaMinimum minimize_on_unit_interval(const std::function<double(double)>& bound);

LambdaMinimum minimize_mixed_gap(const BoundParams& p, double n, double w2, double r_star);

LambdaMinimum minimize_domain_shift_gap(const BoundParams& p, double n, double w2_target_synth,
                                        double w2_target_source, double r_star);

// Uniform-convergence view of mixing with weight alpha.

/// rho(alpha) = c / sqrt((1 - alpha) N + alpha M) + alpha IPM
double rho(double alpha, double c, double n, double m, double ipm);

/// (1 - alpha) N + alpha M
double effective_sample_size(double alpha, double n, double m);

enum class MixDecision { kUseNone, kUseAll, kMix };

std::string_view to_string(MixDecision d);

struct TraditionalPlan {
  /// clip_[0,1]((n* - N) / (M - N)): the minimizer of rho over [0, 1].
  double alpha_star = 0.0;
  /// Weight prescribed by the threshold rule: 0 for use_none, 1 for use_all,
  /// alpha_star otherwise.
  double alpha_rule = 0.0;
  double n_star = 0.0;
  double m_bal = 0.0;
  MixDecision decision = MixDecision::kMix;
  /// M == N: the weight does not change the sample size.
  bool degenerate = false;
};

TraditionalPlan traditional_plan(double c, double n, double m, double ipm);

/// lambda / (1 + lambda); +inf maps to 1.
double ratio_to_tilde(double lambda);
/// lambda_tilde / (1 - lambda_tilde); lambda_tilde = 1 maps to +inf.
double tilde_to_ratio(double lambda_tilde);

}  // namespace synthmix
