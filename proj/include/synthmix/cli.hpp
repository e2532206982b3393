#pragma once
// Command-line front end: argument parsing into a validated CliConfig, and
// dispatch to the library. Exit codes: 0 success, 1 runtime error, 2 usage.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthmix/bounds.hpp"
#include "synthmix/harness.hpp"
#include "synthmix/spectral.hpp"

namespace synthmix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by parse_args for --help; carries the rendered text.
struct HelpRequested {
  std::string text;
};

enum class Command { kSimulate, kBound, kPlan, kEstimate, kSweep };

enum class Theorem { kKernel, kDomainShiftKernel, kMixedGap, kDomainShiftGap, kRho };

/// Accepts descriptive names and the short numeric aliases.
Theorem theorem_from_string(const std::string& s);
std::string_view to_string(Theorem t);

struct SimulateParams {
  UcurveConfig ucurve;
  bool bias_variance = false;
  int replicates = 200;
};

struct BoundQuery {
  Theorem theorem = Theorem::kKernel;
  double lambda = 0.0;
  KernelBoundInputs kernel;
  KernelBoundOptions options;
  BoundParams params;
  double w2 = 0.0;
  double r_star = 0.0;
  double w2_target_synth = 0.0;
  double w2_target_source = 0.0;
  double alpha = 0.0;
  double c = 1.0;
  double m_synth = 0.0;
  double ipm = 0.0;
};

struct PlanParams {
  KernelBoundInputs inputs;
  KernelBoundOptions options;
  ClosedFormVariant variant = ClosedFormVariant::kWithConstant;
  bool compare_traditional = false;
  double c = 1.0;
  double m_synth = 0.0;
  double ipm = 0.0;
};

struct EstimateParams {
  std::filesystem::path real_dir;
  std::filesystem::path synth_dir;
  /// Unset: the number of real images.
  std::optional<int> n;
  SpectralPlanOptions options;
};

struct CliConfig {
  Command command = Command::kPlan;
  /// Unset: no machine output (bound, plan, estimate) or a default file name
  /// (simulate, sweep). "-" writes to standard output.
  std::optional<std::filesystem::path> out;
  OutputFormat format = OutputFormat::kCsv;
  int jobs = 1;
  std::vector<std::string> warnings;

  SimulateParams simulate;
  BoundQuery bound;
  PlanParams plan;
  EstimateParams estimate;
  ContourSpec sweep;
};

/// args excludes the program name. Throws UsageError or HelpRequested.
CliConfig parse_args(const std::vector<std::string>& args);

/// Executes a parsed configuration; runtime failures print one line to err
/// and return kExitRuntime.
int run(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_args + run with the exit-code contract applied.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synthmix::cli
