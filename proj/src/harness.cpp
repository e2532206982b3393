#include "synthmix/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "synthmix/discrepancy.hpp"
#include "synthmix/error.hpp"
#include "synthmix/krr.hpp"
#include "synthmix/mercer.hpp"
#include "synthmix/parallel.hpp"

namespace synthmix {

using nlohmann::json;

std::vector<double> LogGrid::values() const {
  if (!(lo_exp < hi_exp)) throw ArgumentError("lambda grid: lo exponent must be below hi");
  if (count < 3) throw ArgumentError("lambda grid: count must be >= 3");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = (hi_exp - lo_exp) / (count - 1);
  for (int k = 0; k < count; ++k) out[k] = std::pow(10.0, lo_exp + step * k);
  return out;
}

void UcurveConfig::validate() const {
  auto need = [](bool ok, const char* field, const std::string& what) {
    if (!ok) throw ArgumentError(std::string(field) + ": " + what);
  };
  need(r >= 0.5 && std::isfinite(r), "r", "must be >= 0.5");
  need(s > 0.0 && std::isfinite(s), "s", "must be > 0");
  need(s_prime > 0.0 && std::isfinite(s_prime), "s_prime", "must be > 0");
  need(t_f >= 1, "t_f", "must be >= 1");
  need(t_g >= 1, "t_g", "must be >= 1");
  need(n >= 1, "n", "must be >= 1");
  need(sigma2 >= 0.0 && std::isfinite(sigma2), "sigma2", "must be >= 0");
  need(lambda_grid.lo_exp < lambda_grid.hi_exp, "lambda_lo_exp", "must be below lambda_hi_exp");
  need(lambda_grid.count >= 3, "lambda_count", "must be >= 3");
  need(grid_size >= 2, "grid_size", "must be >= 2");
  need(!seeds.empty(), "seeds", "must be nonempty");
  need(domain_lo < domain_hi, "domain_lo", "must be below domain_hi");
}

namespace {

struct Problem {
  EigenSpec spec;
  SeriesFunction f;
  SeriesFunction g;
};

Problem make_problem(const UcurveConfig& cfg) {
  EigenSpec spec(cfg.r, std::max(cfg.t_f, cfg.t_g), cfg.domain_lo, cfg.domain_hi);
  return Problem{spec, make_series(spec, cfg.s, cfg.t_f), make_series(spec, cfg.s_prime, cfg.t_g)};
}

std::string lambda_context(double lambda) {
  return "lambda = " + format_double(lambda);
}

void attach_theory(SweepResult& res, const UcurveConfig& cfg, const Problem& p) {
  res.discrepancy = discrepancy(p.f, p.g).value;
  const KernelBoundInputs in{cfg.n, cfg.r, cfg.sigma2, res.discrepancy, 0.0};
  const auto plan = lambda_star_numeric(in);
  res.lambda_theory = plan.lambda_star;
  res.theory_status = plan.status;
  for (auto& row : res.rows) row.bound_value = kernel_bound(in, row.lambda);
}

}  // namespace

SweepResult run_ucurve(const UcurveConfig& cfg, int jobs) {
  cfg.validate();
  const Problem p = make_problem(cfg);
  const auto lambdas = cfg.lambda_grid.values();
  const std::size_t n_seeds = cfg.seeds.size();
  const std::size_t n_lambda = lambdas.size();

  std::vector<TrainingSet> train(n_seeds);
  for (std::size_t s = 0; s < n_seeds; ++s) {
    train[s] = sample_training_set(p.f, cfg.n, cfg.sigma2, cfg.seeds[s]);
  }

  std::vector<double> errors(n_seeds * n_lambda);
  parallel_for(errors.size(), jobs, [&](std::size_t task) {
    const std::size_t s = task / n_lambda;
    const std::size_t k = task % n_lambda;
    try {
      const auto sol = fit(p.spec, train[s], p.g, lambdas[k]);
      errors[task] = empirical_l2_error(sol, p.f, cfg.grid_size);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (" + lambda_context(lambdas[k]) + ")");
    }
  });

  SweepResult res;
  res.kind = "ucurve";
  res.config = cfg;
  res.per_seed_errors.assign(n_seeds, std::vector<double>(n_lambda));
  res.rows.resize(n_lambda);
  for (std::size_t k = 0; k < n_lambda; ++k) {
    double sum = 0.0;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      res.per_seed_errors[s][k] = errors[s * n_lambda + k];
      sum += errors[s * n_lambda + k];
    }
    res.rows[k].lambda = lambdas[k];
    res.rows[k].empirical_error = sum / static_cast<double>(n_seeds);
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < n_lambda; ++k) {
    if (res.rows[k].empirical_error < res.rows[best].empirical_error) best = k;
  }
  res.lambda_empirical_opt = res.rows[best].lambda;
  attach_theory(res, cfg, p);
  return res;
}

SweepResult run_bias_variance(const UcurveConfig& cfg, int replicates, int jobs) {
  cfg.validate();
  if (replicates < 10) throw ArgumentError("replicates: must be >= 10");
  const Problem p = make_problem(cfg);
  const auto lambdas = cfg.lambda_grid.values();

  SweepResult res;
  res.kind = "bias_variance";
  res.config = cfg;
  res.replicates = replicates;
  res.rows.resize(lambdas.size());
  BiasVarianceOptions opt;
  opt.grid_size = cfg.grid_size;
  opt.jobs = jobs;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    BiasVarianceReport rep;
    try {
      rep = bias_variance_mc(p.spec, p.f, p.g, cfg.n, cfg.sigma2, lambdas[k], replicates,
                             cfg.seeds.front(), opt);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (" + lambda_context(lambdas[k]) + ")");
    }
    auto& row = res.rows[k];
    row.lambda = lambdas[k];
    row.empirical_error = rep.risk;
    row.bias2 = rep.bias2;
    row.variance = rep.variance;
    row.mc_std_err = rep.mc_std_err;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < res.rows.size(); ++k) {
    if (res.rows[k].empirical_error < res.rows[best].empirical_error) best = k;
  }
  res.lambda_empirical_opt = res.rows[best].lambda;
  attach_theory(res, cfg, p);
  return res;
}

bool has_interior_minimum(const std::vector<double>& values) {
  if (values.size() < 3) return false;
  const auto it = std::min_element(values.begin(), values.end());
  return *it < values.front() && *it < values.back();
}

std::string_view to_string(ContourKind k) {
  return k == ContourKind::kInDomain ? "in_domain" : "out_domain";
}

ContourKind contour_kind_from_string(std::string_view s) {
  if (s == "in_domain") return ContourKind::kInDomain;
  if (s == "out_domain") return ContourKind::kOutDomain;
  throw ArgumentError("kind: expected in_domain or out_domain, got '" + std::string(s) + "'");
}

std::vector<double> AxisSpec::values() const {
  if (count < 2) throw ArgumentError("axis: count must be >= 2");
  if (!(lo < hi)) throw ArgumentError("axis: lo must be below hi");
  if (log_spaced && !(lo > 0.0)) throw ArgumentError("axis: log-spaced axis needs lo > 0");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    out[k] = log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                        : lo + t * (hi - lo);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

ContourGrid run_contour(const ContourSpec& spec, int jobs) {
  ContourGrid grid;
  grid.spec = spec;
  grid.x_axis = spec.ratio.values();
  grid.y_axis = spec.discrepancy.values();
  if (!(grid.x_axis.front() > 0.0)) throw ArgumentError("ratio axis must be positive");
  if (grid.y_axis.front() < 0.0) throw ArgumentError("discrepancy axis must be >= 0");
  const std::size_t nx = grid.x_axis.size();
  const std::size_t ny = grid.y_axis.size();
  grid.z.assign(ny, std::vector<double>(nx));
  parallel_for(nx * ny, jobs, [&](std::size_t task) {
    const std::size_t i = task / nx;
    const std::size_t j = task % nx;
    KernelBoundInputs in{spec.n, spec.r, spec.sigma2, grid.y_axis[i], 0.0};
    if (spec.kind == ContourKind::kInDomain) {
      grid.z[i][j] = kernel_bound(in, grid.x_axis[j]);
    } else {
      in.d_gen = spec.d_gen;
      in.d_shift = grid.y_axis[i];
      grid.z[i][j] = domain_shift_kernel_bound(in, grid.x_axis[j]);
    }
  });
  return grid;
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::kCsv ? "csv" : "json"; }

OutputFormat output_format_from_string(std::string_view s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "json") return OutputFormat::kJson;
  throw ArgumentError("format: expected csv or json, got '" + std::string(s) + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double number_from(const json& j) {
  return j.is_null() ? kMissing : j.get<double>();
}

json config_json(const UcurveConfig& c) {
  return json{{"r", c.r},
              {"s", c.s},
              {"s_prime", c.s_prime},
              {"t_f", c.t_f},
              {"t_g", c.t_g},
              {"n", c.n},
              {"sigma2", c.sigma2},
              {"lambda_lo_exp", c.lambda_grid.lo_exp},
              {"lambda_hi_exp", c.lambda_grid.hi_exp},
              {"lambda_count", c.lambda_grid.count},
              {"grid_size", c.grid_size},
              {"domain_lo", c.domain_lo},
              {"domain_hi", c.domain_hi}};
}

UcurveConfig config_from_json(const json& j) {
  UcurveConfig c;
  c.r = j.at("r").get<double>();
  c.s = j.at("s").get<double>();
  c.s_prime = j.at("s_prime").get<double>();
  c.t_f = j.at("t_f").get<int>();
  c.t_g = j.at("t_g").get<int>();
  c.n = j.at("n").get<int>();
  c.sigma2 = j.at("sigma2").get<double>();
  c.lambda_grid.lo_exp = j.at("lambda_lo_exp").get<double>();
  c.lambda_grid.hi_exp = j.at("lambda_hi_exp").get<double>();
  c.lambda_grid.count = j.at("lambda_count").get<int>();
  c.grid_size = j.at("grid_size").get<int>();
  c.domain_lo = j.at("domain_lo").get<double>();
  c.domain_hi = j.at("domain_hi").get<double>();
  return c;
}

PlanStatus plan_status_from_string(std::string_view s) {
  for (auto st : {PlanStatus::kInterior, PlanStatus::kUnbounded, PlanStatus::kBoundary}) {
    if (to_string(st) == s) return st;
  }
  throw IoError("unknown plan status '" + std::string(s) + "'");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

double parse_cell(const std::string& cell, std::size_t line) {
  if (cell.empty()) return kMissing;
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw IoError("CSV line " + std::to_string(line) + ": bad number '" + cell + "'");
  }
  return v;
}

}  // namespace

void write_csv(std::ostream& out, const SweepResult& result) {
  out << "lambda,empirical_error,bound_value,bias2,variance\n";
  for (const auto& row : result.rows) {
    out << format_double(row.lambda) << ',' << format_double(row.empirical_error) << ','
        << format_double(row.bound_value) << ',' << format_double(row.bias2) << ','
        << format_double(row.variance) << '\n';
  }
}

void write_json(std::ostream& out, const SweepResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    rows.push_back({{"lambda", row.lambda},
                    {"empirical_error", number_or_null(row.empirical_error)},
                    {"bound_value", number_or_null(row.bound_value)},
                    {"bias2", number_or_null(row.bias2)},
                    {"variance", number_or_null(row.variance)},
                    {"mc_std_err", number_or_null(row.mc_std_err)}});
  }
  json j{{"kind", result.kind},
         {"meta", config_json(result.config)},
         {"seeds", result.config.seeds},
         {"discrepancy", result.discrepancy},
         {"lambda_empirical_opt", number_or_null(result.lambda_empirical_opt)},
         {"lambda_theory", number_or_null(result.lambda_theory)},
         {"theory_status", std::string(to_string(result.theory_status))},
         {"replicates", result.replicates},
         {"per_seed_errors", result.per_seed_errors},
         {"rows", rows}};
  out << j.dump(2) << '\n';
}

void write_csv(std::ostream& out, const ContourGrid& grid) {
  out << "ratio,d_gen,d_shift,bound_value\n";
  const bool in_domain = grid.spec.kind == ContourKind::kInDomain;
  for (std::size_t i = 0; i < grid.y_axis.size(); ++i) {
    const double d_gen = in_domain ? grid.y_axis[i] : grid.spec.d_gen;
    const double d_shift = in_domain ? 0.0 : grid.y_axis[i];
    for (std::size_t j = 0; j < grid.x_axis.size(); ++j) {
      out << format_double(grid.x_axis[j]) << ',' << format_double(d_gen) << ','
          << format_double(d_shift) << ',' << format_double(grid.z[i][j]) << '\n';
    }
  }
}

void write_json(std::ostream& out, const ContourGrid& grid) {
  const auto& s = grid.spec;
  json j{{"kind", std::string(to_string(s.kind))},
         {"meta",
          {{"n", s.n}, {"r", s.r}, {"sigma2", s.sigma2}, {"d_gen", s.d_gen}, {"mu_max", s.mu_max}}},
         {"x_axis", grid.x_axis},
         {"y_axis", grid.y_axis},
         {"z", grid.z}};
  out << j.dump(2) << '\n';
}

void emit(const SweepResult& result, const std::filesystem::path& path, OutputFormat format) {
  auto out = open_out(path);
  if (format == OutputFormat::kCsv) {
    write_csv(out, result);
  } else {
    write_json(out, result);
  }
  finish(out, path);
}

void emit(const ContourGrid& grid, const std::filesystem::path& path, OutputFormat format) {
  auto out = open_out(path);
  if (format == OutputFormat::kCsv) {
    write_csv(out, grid);
  } else {
    write_json(out, grid);
  }
  finish(out, path);
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "lambda,empirical_error,bound_value,bias2,variance") {
    throw IoError("sweep CSV: unexpected header");
  }
  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) {
      throw IoError("CSV line " + std::to_string(line_no) + ": expected 5 cells");
    }
    SweepRow row;
    row.lambda = parse_cell(cells[0], line_no);
    row.empirical_error = parse_cell(cells[1], line_no);
    row.bound_value = parse_cell(cells[2], line_no);
    row.bias2 = parse_cell(cells[3], line_no);
    row.variance = parse_cell(cells[4], line_no);
    rows.push_back(row);
  }
  return rows;
}

SweepResult read_sweep_json(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(std::string("sweep JSON: ") + e.what());
  }
  try {
    SweepResult res;
    res.kind = j.at("kind").get<std::string>();
    res.config = config_from_json(j.at("meta"));
    res.config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    res.discrepancy = j.at("discrepancy").get<double>();
    res.lambda_empirical_opt = number_from(j.at("lambda_empirical_opt"));
    res.lambda_theory = number_from(j.at("lambda_theory"));
    res.theory_status = plan_status_from_string(j.at("theory_status").get<std::string>());
    res.replicates = j.at("replicates").get<int>();
    res.per_seed_errors = j.at("per_seed_errors").get<std::vector<std::vector<double>>>();
    for (const auto& r : j.at("rows")) {
      SweepRow row;
      row.lambda = r.at("lambda").get<double>();
      row.empirical_error = number_from(r.at("empirical_error"));
      row.bound_value = number_from(r.at("bound_value"));
      row.bias2 = number_from(r.at("bias2"));
      row.variance = number_from(r.at("variance"));
      row.mc_std_err = number_from(r.at("mc_std_err"));
      res.rows.push_back(row);
    }
    return res;
  } catch (const json::exception& e) {
    throw IoError(std::string("sweep JSON: ") + e.what());
  }
}

}  // namespace synthmix
