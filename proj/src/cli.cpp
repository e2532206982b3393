#include "synthmix/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"
#include "synthmix/config.hpp"
#include "synthmix/error.hpp"

namespace synthmix::cli {
namespace {

template <class T>
struct Flag {
  T value{};
  CLI::Option* opt = nullptr;
  bool given() const { return opt != nullptr && opt->count() > 0; }
};

// Options accepted both before and after the subcommand name.
struct GlobalFlags {
  std::vector<CLI::Option*> config_opts, out_opts, format_opts, seed_opts, seeds_opts, jobs_opts;
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 42;
  std::string seeds_text;
  int jobs = 1;

  void attach(CLI::App& app) {
    config_opts.push_back(app.add_option("--config", config_path,
                                    "Experiment config file with [mercer], [experiment], [grid]")
                         ->check(CLI::ExistingFile));
    out_opts.push_back(app.add_option("--out", out_path, "Machine-readable output path, '-' for stdout"));
    format_opts.push_back(app.add_option("--format", format, "Output format")
                         ->check(CLI::IsMember({"csv", "json"})));
    seed_opts.push_back(app.add_option("--seed", seed, "Single random seed"));
    seeds_opts.push_back(app.add_option("--seeds", seeds_text, "Comma-separated random seeds"));
    jobs_opts.push_back(app.add_option("--jobs", jobs, "Worker threads (fallback: SYNTHMIX_JOBS)"));
  }

  static std::size_t count(const std::vector<CLI::Option*>& opts) {
    std::size_t n = 0;
    for (const auto* o : opts) n += o->count();
    return n;
  }
};

// Shortest round-trip rendering for summaries.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw UsageError(key + ": " + what);
}

void require_finite(double v, const std::string& key) {
  require(std::isfinite(v), key, "must be a finite number");
}

void require_positive(double v, const std::string& key) {
  require_finite(v, key);
  require(v > 0.0, key, "must be > 0 (got " + num(v) + ")");
}

void require_nonnegative(double v, const std::string& key) {
  require_finite(v, key);
  require(v >= 0.0, key, "must be >= 0 (got " + num(v) + ")");
}

// Flag value if given, else config value, else fallback.
double resolve(const Flag<double>& f, const ConfigFile* file, const char* section, const char* key,
               double fallback) {
  if (f.given()) return f.value;
  if (file != nullptr) {
    if (auto v = file->get_double(section, key)) return *v;
  }
  return fallback;
}

int resolve(const Flag<int>& f, const ConfigFile* file, const char* section, const char* key,
            int fallback) {
  if (f.given()) return f.value;
  if (file != nullptr) {
    if (auto v = file->get_int(section, key)) return *v;
  }
  return fallback;
}

bool available(const Flag<double>& f, const ConfigFile* file, const char* section,
               const char* key) {
  return f.given() || (file != nullptr && file->has(section, key));
}

int jobs_from_env() {
  const char* env = std::getenv("SYNTHMIX_JOBS");
  if (env == nullptr || *env == '\0') return 1;
  int v = 0;
  try {
    v = parse_int(env, "SYNTHMIX_JOBS");
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  require(v >= 1, "SYNTHMIX_JOBS", "must be >= 1");
  return v;
}

const std::map<std::string, Theorem>& theorem_names() {
  static const std::map<std::string, Theorem> names{
      {"kernel", Theorem::kKernel},
      {"2.2", Theorem::kKernel},
      {"domain-shift-kernel", Theorem::kDomainShiftKernel},
      {"5.1", Theorem::kDomainShiftKernel},
      {"mixed-gap", Theorem::kMixedGap},
      {"stability", Theorem::kMixedGap},
      {"3.1", Theorem::kMixedGap},
      {"domain-shift-gap", Theorem::kDomainShiftGap},
      {"5.2", Theorem::kDomainShiftGap},
      {"rho", Theorem::kRho},
      {"traditional", Theorem::kRho},
  };
  return names;
}

ClosedFormVariant variant_from_string(const std::string& s) {
  if (s == "with-constant") return ClosedFormVariant::kWithConstant;
  if (s == "rate-only") return ClosedFormVariant::kRateOnly;
  if (s == "noise-ratio") return ClosedFormVariant::kNoiseRatio;
  throw UsageError("closed-form: expected with-constant, rate-only or noise-ratio");
}

}  // namespace

Theorem theorem_from_string(const std::string& s) {
  const auto it = theorem_names().find(s);
  if (it == theorem_names().end()) {
    throw UsageError("theorem: unknown bound '" + s +
                     "' (expected kernel, domain-shift-kernel, mixed-gap, domain-shift-gap, rho)");
  }
  return it->second;
}

std::string_view to_string(Theorem t) {
  switch (t) {
    case Theorem::kKernel:
      return "kernel";
    case Theorem::kDomainShiftKernel:
      return "domain-shift-kernel";
    case Theorem::kMixedGap:
      return "mixed-gap";
    case Theorem::kDomainShiftGap:
      return "domain-shift-gap";
    case Theorem::kRho:
      return "rho";
  }
  return "?";
}

CliConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Plan and evaluate mixtures of real and synthetic training data.", "synthmix"};
  app.require_subcommand(1, 1);
  GlobalFlags globals;
  globals.attach(app);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Lambda sweep of the generator-regularized estimator");
  globals.attach(*sim);
  std::string sim_mode = "ucurve";
  sim->add_option("--mode", sim_mode, "ucurve or bias_variance")
      ->check(CLI::IsMember({"ucurve", "bias_variance"}));
  Flag<double> sim_r, sim_s, sim_sp, sim_sigma2, sim_lo, sim_hi;
  Flag<int> sim_tf, sim_tg, sim_n, sim_count, sim_grid, sim_reps;
  sim_r.opt = sim->add_option("--r", sim_r.value, "Eigendecay exponent");
  sim_s.opt = sim->add_option("--s", sim_s.value, "Target smoothness exponent");
  sim_sp.opt = sim->add_option("--s-prime", sim_sp.value, "Generator smoothness exponent");
  sim_tf.opt = sim->add_option("--t-f", sim_tf.value, "Target truncation");
  sim_tg.opt = sim->add_option("--t-g", sim_tg.value, "Generator truncation");
  sim_n.opt = sim->add_option("--n", sim_n.value, "Real sample count");
  sim_sigma2.opt = sim->add_option("--sigma2", sim_sigma2.value, "Label noise variance");
  sim_lo.opt = sim->add_option("--lambda-lo-exp", sim_lo.value, "Smallest lambda as a power of 10");
  sim_hi.opt = sim->add_option("--lambda-hi-exp", sim_hi.value, "Largest lambda as a power of 10");
  sim_count.opt = sim->add_option("--lambda-count", sim_count.value, "Number of grid lambdas");
  sim_grid.opt = sim->add_option("--grid-size", sim_grid.value, "Test grid points");
  sim_reps.opt = sim->add_option("--replicates", sim_reps.value, "Monte Carlo replicates");

  // bound
  auto* bnd = app.add_subcommand("bound", "Evaluate one generalization bound");
  globals.attach(*bnd);
  std::string theorem;
  bnd->add_option("--theorem", theorem,
                  "kernel, domain-shift-kernel, mixed-gap, domain-shift-gap or rho")
      ->required();
  Flag<double> b_lambda, b_r, b_sigma2, b_d, b_dshift, b_m, b_m1, b_m2, b_l, b_diam, b_dstar, b_c,
      b_w2, b_rstar, b_w2ts, b_w2tsrc, b_alpha, b_msynth, b_ipm;
  Flag<int> b_n;
  bool b_beta = false;
  b_lambda.opt = bnd->add_option("--lambda", b_lambda.value, "Synthetic-to-real ratio or weight");
  b_n.opt = bnd->add_option("--n", b_n.value, "Real sample count");
  b_r.opt = bnd->add_option("--r", b_r.value, "Eigendecay exponent");
  b_sigma2.opt = bnd->add_option("--sigma2", b_sigma2.value, "Label noise variance");
  b_d.opt = bnd->add_option("--d", b_d.value, "Generator discrepancy");
  b_dshift.opt = bnd->add_option("--d-shift", b_dshift.value, "Source-target discrepancy");
  bnd->add_flag("--beta-constant", b_beta, "Multiply the bias term by the Beta-function constant");
  b_m.opt = bnd->add_option("--m", b_m.value, "Strong convexity m");
  b_m1.opt = bnd->add_option("--m1", b_m1.value, "Loss bound M1");
  b_m2.opt = bnd->add_option("--m2", b_m2.value, "Smoothness M2");
  b_l.opt = bnd->add_option("--lipschitz", b_l.value, "Lipschitz constant L");
  b_diam.opt = bnd->add_option("--diameter", b_diam.value, "Domain diameter");
  b_dstar.opt = bnd->add_option("--d-star", b_dstar.value, "Upper packing dimension");
  b_c.opt = bnd->add_option("--c", b_c.value, "Leading constant (C, or c for rho)");
  b_w2.opt = bnd->add_option("--w2", b_w2.value, "W2 distance between real and synthetic");
  b_rstar.opt = bnd->add_option("--r-star", b_rstar.value, "Best achievable population risk");
  b_w2ts.opt = bnd->add_option("--w2-target-synth", b_w2ts.value, "W2(target, synthetic)");
  b_w2tsrc.opt = bnd->add_option("--w2-target-source", b_w2tsrc.value, "W2(target, source)");
  b_alpha.opt = bnd->add_option("--alpha", b_alpha.value, "Synthetic weight for rho");
  b_msynth.opt = bnd->add_option("--m-synth", b_msynth.value, "Synthetic sample count M");
  b_ipm.opt = bnd->add_option("--ipm", b_ipm.value, "Integral probability metric");

  // plan
  auto* pln = app.add_subcommand("plan", "Optimal synthetic-to-real ratio");
  globals.attach(*pln);
  Flag<double> p_r, p_sigma2, p_d, p_c, p_msynth, p_ipm;
  Flag<int> p_n;
  bool p_beta = false;
  bool p_trad = false;
  std::string p_variant = "with-constant";
  p_n.opt = pln->add_option("--n", p_n.value, "Real sample count");
  p_r.opt = pln->add_option("--r", p_r.value, "Eigendecay exponent");
  p_sigma2.opt = pln->add_option("--sigma2", p_sigma2.value, "Label noise variance");
  p_d.opt = pln->add_option("--d", p_d.value, "Generator discrepancy");
  pln->add_flag("--beta-constant", p_beta, "Include the Beta-function constant in the bound");
  pln->add_option("--closed-form", p_variant, "with-constant, rate-only or noise-ratio")
      ->check(CLI::IsMember({"with-constant", "rate-only", "noise-ratio"}));
  pln->add_flag("--compare-traditional", p_trad, "Also print the uniform-convergence plan");
  p_c.opt = pln->add_option("--c", p_c.value, "Traditional-bound constant c");
  p_msynth.opt = pln->add_option("--m-synth", p_msynth.value, "Available synthetic samples M");
  p_ipm.opt = pln->add_option("--ipm", p_ipm.value, "Integral probability metric");

  // estimate
  auto* est = app.add_subcommand("estimate", "Plan from real and synthetic image folders");
  globals.attach(*est);
  std::string real_dir;
  std::string synth_dir;
  Flag<double> e_sigma2, e_lo, e_hi;
  Flag<int> e_n;
  bool e_pixels = false;
  est->add_option("--real-dir", real_dir, "Folder of real images (.png, .csv)")
      ->required()
      ->check(CLI::ExistingDirectory);
  est->add_option("--synth-dir", synth_dir, "Folder of synthetic images (.png, .csv)")
      ->required()
      ->check(CLI::ExistingDirectory);
  e_n.opt = est->add_option("--n", e_n.value, "Real sample count (default: real image count)");
  e_sigma2.opt = est->add_option("--sigma2", e_sigma2.value, "Label noise variance");
  auto* e_pix = est->add_flag("--sigma2-from-pixels", e_pixels,
                              "Use the pooled pixel variance of the real set as sigma2");
  e_pix->excludes(e_sigma2.opt);
  e_lo.opt = est->add_option("--fit-lo", e_lo.value, "Lowest radius in the decay fit");
  e_hi.opt = est->add_option("--fit-hi", e_hi.value, "Highest radius in the decay fit");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Bound contour grid over ratio and discrepancy");
  globals.attach(*swp);
  std::string kind = "in_domain";
  swp->add_option("--kind", kind, "in_domain or out_domain")
      ->check(CLI::IsMember({"in_domain", "out_domain"}));
  Flag<double> s_rlo, s_rhi, s_dlo, s_dhi, s_r, s_sigma2, s_dgen;
  Flag<int> s_rcount, s_dcount, s_n;
  bool s_linear = false;
  s_rlo.opt = swp->add_option("--ratio-lo", s_rlo.value, "Smallest ratio");
  s_rhi.opt = swp->add_option("--ratio-hi", s_rhi.value, "Largest ratio");
  s_rcount.opt = swp->add_option("--ratio-count", s_rcount.value, "Ratio axis points");
  swp->add_flag("--ratio-linear", s_linear, "Space the ratio axis linearly");
  s_dlo.opt = swp->add_option("--d-lo", s_dlo.value, "Smallest discrepancy");
  s_dhi.opt = swp->add_option("--d-hi", s_dhi.value, "Largest discrepancy");
  s_dcount.opt = swp->add_option("--d-count", s_dcount.value, "Discrepancy axis points");
  s_n.opt = swp->add_option("--n", s_n.value, "Real sample count");
  s_r.opt = swp->add_option("--r", s_r.value, "Eigendecay exponent");
  s_sigma2.opt = swp->add_option("--sigma2", s_sigma2.value, "Label noise variance");
  s_dgen.opt = swp->add_option("--d-gen", s_dgen.value, "Fixed generator discrepancy (out_domain)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream out;
    std::ostringstream err;
    app.exit(e, out, err);
    throw HelpRequested{out.str()};
  } catch (const CLI::CallForAllHelp& e) {
    std::ostringstream out;
    std::ostringstream err;
    app.exit(e, out, err);
    throw HelpRequested{out.str()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CliConfig cfg;

  // Globals.
  require(GlobalFlags::count(globals.seed_opts) == 0 || GlobalFlags::count(globals.seeds_opts) == 0, "seed",
          "give either --seed or --seeds, not both");
  std::optional<ConfigFile> file;
  try {
    if (GlobalFlags::count(globals.config_opts) > 0) file = ConfigFile::load(globals.config_path);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const ConfigFile* cf = file ? &*file : nullptr;
  if (GlobalFlags::count(globals.out_opts) > 0) cfg.out = globals.out_path;
  cfg.format = output_format_from_string(globals.format);
  if (GlobalFlags::count(globals.jobs_opts) > 0) {
    require(globals.jobs >= 1, "jobs", "must be >= 1");
    cfg.jobs = globals.jobs;
  } else {
    cfg.jobs = jobs_from_env();
  }

  try {
    if (sim->parsed()) {
      cfg.command = Command::kSimulate;
      bool seeds_in_file = false;
      UcurveConfig u = cf ? apply_config(*cf, UcurveConfig{}, &seeds_in_file) : UcurveConfig{};
      if (sim_r.given()) u.r = sim_r.value;
      if (sim_s.given()) u.s = sim_s.value;
      if (sim_sp.given()) u.s_prime = sim_sp.value;
      if (sim_tf.given()) u.t_f = sim_tf.value;
      if (sim_tg.given()) u.t_g = sim_tg.value;
      if (sim_n.given()) u.n = sim_n.value;
      if (sim_sigma2.given()) u.sigma2 = sim_sigma2.value;
      if (sim_lo.given()) u.lambda_grid.lo_exp = sim_lo.value;
      if (sim_hi.given()) u.lambda_grid.hi_exp = sim_hi.value;
      if (sim_count.given()) u.lambda_grid.count = sim_count.value;
      if (sim_grid.given()) u.grid_size = sim_grid.value;
      if (GlobalFlags::count(globals.seed_opts) > 0) {
        u.seeds = {globals.seed};
      } else if (GlobalFlags::count(globals.seeds_opts) > 0) {
        u.seeds = parse_seed_list(globals.seeds_text, "seeds");
      } else if (!seeds_in_file) {
        u.seeds = {42};
        cfg.warnings.push_back("no seed given; defaulting to 42");
      }
      u.validate();
      cfg.simulate.ucurve = u;
      cfg.simulate.bias_variance = sim_mode == "bias_variance";
      cfg.simulate.replicates = resolve(sim_reps, cf, "experiment", "replicates", 200);
      if (cfg.simulate.bias_variance) {
        require(cfg.simulate.replicates >= 10, "replicates", "must be >= 10");
      }
    } else if (bnd->parsed()) {
      cfg.command = Command::kBound;
      auto& q = cfg.bound;
      q.theorem = theorem_from_string(theorem);
      q.kernel.n = resolve(b_n, cf, "experiment", "n", 15);
      q.kernel.r = resolve(b_r, cf, "mercer", "r", 2.0);
      q.kernel.sigma2 = resolve(b_sigma2, cf, "experiment", "sigma2", 0.1);
      q.kernel.d_gen = resolve(b_d, cf, "experiment", "d_gen", 0.0);
      q.kernel.d_shift = resolve(b_dshift, cf, "experiment", "d_shift", 0.0);
      q.options.include_beta_constant = b_beta;
      require(q.kernel.n >= 1, "n", "must be >= 1");
      switch (q.theorem) {
        case Theorem::kKernel:
        case Theorem::kDomainShiftKernel:
          require(b_lambda.given(), "lambda", "required for this bound");
          require_positive(b_lambda.value, "lambda");
          require_finite(q.kernel.r, "r");
          require(q.kernel.r >= 0.5, "r", "must be >= 0.5");
          require_nonnegative(q.kernel.sigma2, "sigma2");
          require(available(b_d, cf, "experiment", "d_gen"), "d", "required for this bound");
          require_nonnegative(q.kernel.d_gen, "d");
          require_nonnegative(q.kernel.d_shift, "d-shift");
          break;
        case Theorem::kMixedGap:
        case Theorem::kDomainShiftGap: {
          require(b_lambda.given(), "lambda", "required for this bound");
          require_positive(b_lambda.value, "lambda");
          require(b_lambda.value < 1.0, "lambda", "must lie in (0, 1) for this bound");
          const BoundParams def;
          auto pick = [](const Flag<double>& f, double d) { return f.given() ? f.value : d; };
          const double m = pick(b_m, def.m());
          const double m1 = pick(b_m1, def.m1());
          const double m2 = pick(b_m2, def.m2());
          const double l = pick(b_l, def.lipschitz());
          const double diam = pick(b_diam, def.diameter());
          const double dstar = pick(b_dstar, def.d_star());
          const double c = pick(b_c, def.c());
          require_positive(m, "m");
          require_positive(m1, "m1");
          require_positive(m2, "m2");
          require_positive(l, "lipschitz");
          require_positive(diam, "diameter");
          require_nonnegative(dstar, "d-star");
          require_positive(c, "c");
          q.params = BoundParams(m, m1, m2, l, diam, dstar, c);
          q.r_star = pick(b_rstar, 0.0);
          require_nonnegative(q.r_star, "r-star");
          if (q.theorem == Theorem::kMixedGap) {
            require(b_w2.given(), "w2", "required for this bound");
            require_nonnegative(b_w2.value, "w2");
            q.w2 = b_w2.value;
          } else {
            require(b_w2ts.given(), "w2-target-synth", "required for this bound");
            require(b_w2tsrc.given(), "w2-target-source", "required for this bound");
            require_nonnegative(b_w2ts.value, "w2-target-synth");
            require_nonnegative(b_w2tsrc.value, "w2-target-source");
            q.w2_target_synth = b_w2ts.value;
            q.w2_target_source = b_w2tsrc.value;
          }
          break;
        }
        case Theorem::kRho:
          require(b_alpha.given(), "alpha", "required for rho");
          require_finite(b_alpha.value, "alpha");
          require(b_alpha.value >= 0.0 && b_alpha.value <= 1.0, "alpha", "must lie in [0, 1]");
          require(b_msynth.given(), "m-synth", "required for rho");
          require(b_ipm.given(), "ipm", "required for rho");
          q.c = b_c.given() ? b_c.value : 1.0;
          require_positive(q.c, "c");
          require_finite(b_msynth.value, "m-synth");
          require(b_msynth.value >= 1.0, "m-synth", "must be >= 1");
          require_nonnegative(b_ipm.value, "ipm");
          q.m_synth = b_msynth.value;
          q.ipm = b_ipm.value;
          break;
      }
      q.lambda = b_lambda.value;
      q.alpha = b_alpha.value;
    } else if (pln->parsed()) {
      cfg.command = Command::kPlan;
      auto& p = cfg.plan;
      p.inputs.n = resolve(p_n, cf, "experiment", "n", 15);
      p.inputs.r = resolve(p_r, cf, "mercer", "r", 2.0);
      p.inputs.sigma2 = resolve(p_sigma2, cf, "experiment", "sigma2", 0.1);
      require(available(p_d, cf, "experiment", "d_gen"), "d", "required");
      p.inputs.d_gen = resolve(p_d, cf, "experiment", "d_gen", 0.0);
      require(p.inputs.n >= 1, "n", "must be >= 1");
      require_finite(p.inputs.r, "r");
      require(p.inputs.r >= 0.5, "r", "must be >= 0.5");
      require_nonnegative(p.inputs.sigma2, "sigma2");
      require_nonnegative(p.inputs.d_gen, "d");
      p.options.include_beta_constant = p_beta;
      p.variant = variant_from_string(p_variant);
      p.compare_traditional = p_trad;
      if (p_trad) {
        p.c = p_c.given() ? p_c.value : 1.0;
        require_positive(p.c, "c");
        require(p_msynth.given(), "m-synth", "required with --compare-traditional");
        require(p_ipm.given(), "ipm", "required with --compare-traditional");
        require_finite(p_msynth.value, "m-synth");
        require(p_msynth.value >= 1.0, "m-synth", "must be >= 1");
        require_nonnegative(p_ipm.value, "ipm");
        p.m_synth = p_msynth.value;
        p.ipm = p_ipm.value;
      }
    } else if (est->parsed()) {
      cfg.command = Command::kEstimate;
      auto& e = cfg.estimate;
      e.real_dir = real_dir;
      e.synth_dir = synth_dir;
      if (e_n.given() || (cf != nullptr && cf->has("experiment", "n"))) {
        e.n = resolve(e_n, cf, "experiment", "n", 1);
        require(*e.n >= 1, "n", "must be >= 1");
      }
      e.options.sigma2_from_pixels = e_pixels;
      e.options.sigma2 = resolve(e_sigma2, cf, "experiment", "sigma2", 0.0);
      require_nonnegative(e.options.sigma2, "sigma2");
      e.options.jobs = cfg.jobs;
      if (e_lo.given()) {
        require_nonnegative(e_lo.value, "fit-lo");
        e.options.range.lo = e_lo.value;
      }
      if (e_hi.given()) {
        require_positive(e_hi.value, "fit-hi");
        require(e_hi.value > e.options.range.lo, "fit-hi", "must exceed fit-lo");
        e.options.range.hi = e_hi.value;
      }
    } else if (swp->parsed()) {
      cfg.command = Command::kSweep;
      auto& s = cfg.sweep;
      s.kind = contour_kind_from_string(kind);
      if (s_rlo.given()) s.ratio.lo = s_rlo.value;
      if (s_rhi.given()) s.ratio.hi = s_rhi.value;
      if (s_rcount.given()) s.ratio.count = s_rcount.value;
      s.ratio.log_spaced = !s_linear;
      if (s_dlo.given()) s.discrepancy.lo = s_dlo.value;
      if (s_dhi.given()) s.discrepancy.hi = s_dhi.value;
      if (s_dcount.given()) s.discrepancy.count = s_dcount.value;
      s.n = resolve(s_n, cf, "experiment", "n", s.n);
      s.r = resolve(s_r, cf, "mercer", "r", s.r);
      s.sigma2 = resolve(s_sigma2, cf, "experiment", "sigma2", s.sigma2);
      s.d_gen = resolve(s_dgen, cf, "experiment", "d_gen", s.d_gen);
      require_positive(s.ratio.lo, "ratio-lo");
      require_finite(s.ratio.hi, "ratio-hi");
      require(s.ratio.hi > s.ratio.lo, "ratio-hi", "must exceed ratio-lo");
      require(s.ratio.count >= 2, "ratio-count", "must be >= 2");
      require_nonnegative(s.discrepancy.lo, "d-lo");
      require_finite(s.discrepancy.hi, "d-hi");
      require(s.discrepancy.hi > s.discrepancy.lo, "d-hi", "must exceed d-lo");
      require(s.discrepancy.count >= 2, "d-count", "must be >= 2");
      require(s.n >= 1, "n", "must be >= 1");
      require_finite(s.r, "r");
      require(s.r >= 0.5, "r", "must be >= 0.5");
      require_nonnegative(s.sigma2, "sigma2");
      require_nonnegative(s.d_gen, "d-gen");
    }
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

namespace {

// Ordered key/value record for the scalar-valued subcommands.
class Record {
 public:
  void add(std::string key, double v) { items_.emplace_back(std::move(key), v); }
  void add(std::string key, std::string v) { items_.emplace_back(std::move(key), std::move(v)); }

  void write(std::ostream& out, OutputFormat format) const {
    if (format == OutputFormat::kCsv) {
      out << "key,value\n";
      for (const auto& [k, v] : items_) {
        out << k << ',';
        if (const auto* d = std::get_if<double>(&v)) {
          out << format_double(*d);
        } else {
          out << std::get<std::string>(v);
        }
        out << '\n';
      }
      return;
    }
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : items_) {
      if (const auto* d = std::get_if<double>(&v)) {
        if (std::isfinite(*d)) {
          j[k] = *d;
        } else {
          j[k] = format_double(*d);
        }
      } else {
        j[k] = std::get<std::string>(v);
      }
    }
    out << j.dump(2) << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::variant<double, std::string>>> items_;
};

// Where the human summary and the machine output go.
struct Sinks {
  std::ostream* summary;
  std::optional<std::filesystem::path> file;
  bool to_stdout = false;
};

Sinks make_sinks(const CliConfig& cfg, std::ostream& out, std::ostream& err,
                 const std::optional<std::string>& default_name) {
  Sinks s{&out, std::nullopt, false};
  std::optional<std::filesystem::path> path = cfg.out;
  if (!path && default_name) path = *default_name + "." + std::string(to_string(cfg.format));
  if (path && path->string() == "-") {
    s.to_stdout = true;
    s.summary = &err;
  } else {
    s.file = path;
  }
  return s;
}

template <class Writer>
void write_machine(const Sinks& sinks, std::ostream& out, Writer&& writer) {
  if (sinks.to_stdout) {
    writer(out);
    out.flush();
    return;
  }
  if (!sinks.file) return;
  std::ofstream f(*sinks.file, std::ios::binary);
  if (!f) throw IoError("cannot open " + sinks.file->string() + " for writing");
  writer(f);
  f.flush();
  if (!f) throw IoError("write failed: " + sinks.file->string());
  *sinks.summary << "wrote: " << sinks.file->string() << '\n';
}

std::string plan_value(double v) { return std::isfinite(v) ? num(v) : "unbounded"; }

void print_plan(std::ostream& os, const char* title, const RatioPlan& plan) {
  os << title << '\n';
  os << "  lambda_star: " << plan_value(plan.lambda_star) << '\n';
  os << "  lambda_tilde: " << num(plan.lambda_tilde) << '\n';
  os << "  M_star: " << plan_value(plan.m_star_rounded()) << '\n';
  os << "  status: " << to_string(plan.status) << '\n';
}

void add_plan(Record& rec, const std::string& prefix, const RatioPlan& plan) {
  rec.add(prefix + "lambda_star", plan.lambda_star);
  rec.add(prefix + "lambda_tilde", plan.lambda_tilde);
  rec.add(prefix + "m_star", plan.m_star_rounded());
  rec.add(prefix + "status", std::string(to_string(plan.status)));
}

constexpr const char* kUnboundedNote =
    "unbounded regularization: the generator matches the target, so synthetic data can be "
    "added without limit";

int run_simulate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto& sp = cfg.simulate;
  const auto res = sp.bias_variance ? run_bias_variance(sp.ucurve, sp.replicates, cfg.jobs)
                                    : run_ucurve(sp.ucurve, cfg.jobs);
  const Sinks sinks = make_sinks(cfg, out, err, res.kind);
  auto& os = *sinks.summary;
  const auto& u = sp.ucurve;
  os << res.kind << " sweep: " << res.rows.size() << " lambdas, "
     << (sp.bias_variance ? std::to_string(sp.replicates) + " replicates"
                          : std::to_string(u.seeds.size()) + " seeds")
     << '\n';
  os << "  r: " << num(u.r) << ", s: " << num(u.s)
     << ", s_prime: " << num(u.s_prime) << ", t_f: " << u.t_f << ", t_g: " << u.t_g
     << ", n: " << u.n << ", sigma2: " << num(u.sigma2) << '\n';
  os << "discrepancy: " << num(res.discrepancy) << '\n';
  os << "lambda_empirical_opt: " << num(res.lambda_empirical_opt) << '\n';
  os << "lambda_theory: " << num(res.lambda_theory) << " ("
     << to_string(res.theory_status) << ")\n";
  std::vector<double> errors;
  for (const auto& row : res.rows) errors.push_back(row.empirical_error);
  os << "interior_minimum: " << (has_interior_minimum(errors) ? "yes" : "no") << '\n';
  write_machine(sinks, out, [&](std::ostream& s) {
    if (cfg.format == OutputFormat::kCsv) {
      write_csv(s, res);
    } else {
      write_json(s, res);
    }
  });
  return kExitOk;
}

int run_bound(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto& q = cfg.bound;
  double value = 0.0;
  switch (q.theorem) {
    case Theorem::kKernel:
      value = kernel_bound(q.kernel, q.lambda, q.options);
      break;
    case Theorem::kDomainShiftKernel:
      value = domain_shift_kernel_bound(q.kernel, q.lambda);
      break;
    case Theorem::kMixedGap:
      value = mixed_gap_bound(q.params, q.lambda, q.kernel.n, q.w2, q.r_star);
      break;
    case Theorem::kDomainShiftGap:
      value = domain_shift_gap_bound(q.params, q.lambda, q.kernel.n, q.w2_target_synth,
                                     q.w2_target_source, q.r_star);
      break;
    case Theorem::kRho:
      value = rho(q.alpha, q.c, q.kernel.n, q.m_synth, q.ipm);
      break;
  }
  const Sinks sinks = make_sinks(cfg, out, err, std::nullopt);
  auto& os = *sinks.summary;
  os << "bound: " << to_string(q.theorem) << '\n';
  if (q.theorem == Theorem::kRho) {
    os << "  alpha: " << num(q.alpha) << '\n';
  } else {
    os << "  lambda: " << num(q.lambda) << '\n';
  }
  os << "  value: " << num(value) << '\n';
  Record rec;
  rec.add("theorem", std::string(to_string(q.theorem)));
  rec.add(q.theorem == Theorem::kRho ? "alpha" : "lambda",
          q.theorem == Theorem::kRho ? q.alpha : q.lambda);
  rec.add("value", value);
  write_machine(sinks, out, [&](std::ostream& s) { rec.write(s, cfg.format); });
  return kExitOk;
}

int run_plan(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto& p = cfg.plan;
  const auto numeric = lambda_star_numeric(p.inputs, p.options);
  const auto closed = lambda_star_closed_form(p.inputs, p.variant);
  const Sinks sinks = make_sinks(cfg, out, err, std::nullopt);
  auto& os = *sinks.summary;
  os << "inputs: n " << p.inputs.n << ", r " << num(p.inputs.r) << ", sigma2 "
     << num(p.inputs.sigma2) << ", d " << num(p.inputs.d_gen) << '\n';
  print_plan(os, "numeric plan", numeric);
  print_plan(os, "closed-form plan", closed);
  if (p.inputs.d_gen == 0.0) os << kUnboundedNote << '\n';
  Record rec;
  add_plan(rec, "numeric_", numeric);
  add_plan(rec, "closed_form_", closed);
  if (p.compare_traditional) {
    const auto t = traditional_plan(p.c, p.inputs.n, p.m_synth, p.ipm);
    os << "traditional plan\n";
    os << "  alpha_star: " << num(t.alpha_star) << '\n';
    os << "  alpha_rule: " << num(t.alpha_rule) << '\n';
    os << "  n_star: " << plan_value(t.n_star) << '\n';
    os << "  M_bal: " << plan_value(t.m_bal) << '\n';
    os << "  decision: " << to_string(t.decision) << '\n';
    rec.add("traditional_alpha_star", t.alpha_star);
    rec.add("traditional_alpha_rule", t.alpha_rule);
    rec.add("traditional_n_star", t.n_star);
    rec.add("traditional_m_bal", t.m_bal);
    rec.add("traditional_decision", std::string(to_string(t.decision)));
  }
  write_machine(sinks, out, [&](std::ostream& s) { rec.write(s, cfg.format); });
  return kExitOk;
}

int run_estimate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto& e = cfg.estimate;
  const auto real = load_image_dir(e.real_dir);
  const auto synth = load_image_dir(e.synth_dir);
  const int n = e.n.value_or(static_cast<int>(real.size()));
  const auto sp = plan_from_images(real, synth, n, e.options);
  const Sinks sinks = make_sinks(cfg, out, err, std::nullopt);
  auto& os = *sinks.summary;
  os << "real images: " << real.size() << ", synthetic images: " << synth.size() << '\n';
  os << "D: " << num(sp.distance) << '\n';
  os << "r_hat: " << num(sp.fit.r_hat) << '\n';
  os << "fit range: [" << num(sp.fit.fit_lo) << ", " << num(sp.fit.fit_hi)
     << "], bins " << sp.fit.bins_used << ", residual rms " << num(sp.fit.residual_rms)
     << '\n';
  os << "sigma2: " << num(sp.sigma2) << '\n';
  os << "n: " << sp.n << '\n';
  print_plan(os, "plan", sp.plan);
  if (sp.plan.status == PlanStatus::kUnbounded) os << kUnboundedNote << '\n';
  Record rec;
  rec.add("d", sp.distance);
  rec.add("r_hat", sp.fit.r_hat);
  rec.add("fit_lo", sp.fit.fit_lo);
  rec.add("fit_hi", sp.fit.fit_hi);
  rec.add("residual_rms", sp.fit.residual_rms);
  rec.add("sigma2", sp.sigma2);
  rec.add("n", static_cast<double>(sp.n));
  add_plan(rec, "", sp.plan);
  write_machine(sinks, out, [&](std::ostream& s) { rec.write(s, cfg.format); });
  return kExitOk;
}

int run_sweep(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto grid = run_contour(cfg.sweep, cfg.jobs);
  const Sinks sinks =
      make_sinks(cfg, out, err, "contour_" + std::string(to_string(cfg.sweep.kind)));
  auto& os = *sinks.summary;
  os << "contour " << to_string(cfg.sweep.kind) << ": " << grid.y_axis.size() << " x "
     << grid.x_axis.size() << " (n " << cfg.sweep.n << ", r " << num(cfg.sweep.r)
     << ", sigma2 " << num(cfg.sweep.sigma2) << ")\n";
  write_machine(sinks, out, [&](std::ostream& s) {
    if (cfg.format == OutputFormat::kCsv) {
      write_csv(s, grid);
    } else {
      write_json(s, grid);
    }
  });
  return kExitOk;
}

}  // namespace

int run(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  for (const auto& w : cfg.warnings) err << "synthmix: warning: " << w << '\n';
  try {
    switch (cfg.command) {
      case Command::kSimulate:
        return run_simulate(cfg, out, err);
      case Command::kBound:
        return run_bound(cfg, out, err);
      case Command::kPlan:
        return run_plan(cfg, out, err);
      case Command::kEstimate:
        return run_estimate(cfg, out, err);
      case Command::kSweep:
        return run_sweep(cfg, out, err);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "synthmix: error: " << msg << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const UsageError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "synthmix: usage error: " << msg << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "synthmix: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return run(cfg, out, err);
}

}  // namespace synthmix::cli
