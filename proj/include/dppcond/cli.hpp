#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dppcond/functionals.hpp"
#include "dppcond/kernels.hpp"
#include "dppcond/sampler.hpp"
#include "json.hpp"

namespace dppcond::cli {

using json = nlohmann::ordered_json;

/// Invalid config text, unknown key, wrong type or out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KernelSpec {
  std::string type;  ///< sine | bessel | hermite-cd | jacobi-cd
  double s = 0.0;
  int n = 0;
};

struct GridSpec {
  int n = 300;
  std::string spacing = "uniform";  ///< uniform | power
  double exponent = 0.0;            ///< power spacing; 0 picks the best of 2, 3, 4
  std::vector<double> breaks;
};

struct ExperimentConfig {
  std::string command;
  json resolved;  ///< full config after defaults and overrides, echoed into every artifact
  KernelSpec kernel;
  Interval window;
  GridSpec grid;
  LambdaRegularizer lambda = LambdaRegularizer::zero();
  SamplerConfig sampler;
  json experiment;
  std::string out_dir;
};

/// Parses config text; syntax errors are reported as `source:line:column: message`.
json parse_config_text(const std::string& text, const std::string& source);

/// Applies `a.b.c=value`; the value is read as JSON when possible and as a string otherwise.
void apply_override(json& config, const std::string& assignment);

/// Fills defaults for `command`, rejects unknown keys and checks types and ranges.
ExperimentConfig resolve_config(const std::string& command, const json& user);

/// Reads `path` (may be empty for all defaults) and applies the overrides in order.
ExperimentConfig load_config(const std::string& command, const std::string& path,
                             const std::vector<std::string>& overrides);

KernelPtr make_kernel(const KernelSpec& spec);
DiscretizedKernel make_discretization(const Kernel& kernel, const ExperimentConfig& cfg);

struct CommandInfo {
  std::string name;
  std::string summary;
  std::string csv_columns;
};

const std::vector<CommandInfo>& commands();

enum ExitCode : int { kPass = 0, kCriterionFailed = 1, kConfigError = 2, kNumericalError = 3 };

/// Runs one subcommand, writes `<out>/<command>.csv` and `<out>/<command>.json`, and returns the exit code.
int run(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace dppcond::cli
