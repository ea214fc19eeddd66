#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wplap/weights.hpp"

namespace wplap::cli {

inline constexpr const char* kSchemaVersion = "1.0";

enum ExitCode : int { kOk = 0, kInvalid = 1, kNonconvergent = 2 };

/// Unreadable, malformed or out-of-range configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { check_weights, eigen, amp_scan, shoot, verify_inequalities };
std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct MeshConfig {
  std::size_t elements = 400;
  /// "log" (uniform in ln r) or "graded" (geometric with `grading`).
  std::string spacing = "log";
  double grading = 1.0;
};

struct EigenConfig {
  /// "nonlinear" (minimize_rayleigh) or "oracle" (dense p = 2 pencil).
  std::string method = "nonlinear";
  std::size_t max_iterations = 5000;
  bool truncation_study = false;
  double truncation_rel_tol = 1e-4;
  double elements_per_decade = 60.0;
};

struct AmpConfig {
  /// Window as multiples of lambda_1 when `relative`, absolute otherwise.
  double lambda_lo = 0.5;
  double lambda_hi = 1.3;
  bool relative = true;
  std::size_t steps = 16;
  std::pair<double, double> E{0.1, 0.5};
  WeightFunction load = WeightFunction::indicator(0.1, 0.5);
  std::optional<std::pair<double, double>> load_support = std::make_pair(0.1, 0.5);
  double refine_rel = 1e-3;
};

struct ShootConfig {
  std::size_t steps = 4000;
  /// Outer radius; defaults to the spec's truncation R.
  std::optional<double> R_big;
  std::optional<std::pair<double, double>> bracket;
  bool compare_fem = true;
};

struct InequalityConfig {
  std::size_t trials = 1000;
  std::vector<std::string> checks = {"ckn_basic", "ckn_generalized", "embedding", "picone"};
};

struct ExperimentConfig {
  Command command = Command::eigen;
  /// The "spec" object as given; `spec` is built from it.
  nlohmann::json spec_source;
  ProblemSpec spec;
  MeshConfig mesh;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "wplap_out";
  bool svg = false;
  std::size_t admissibility_grid = 64;
  EigenConfig eigen;
  AmpConfig amp;
  ShootConfig shoot;
  InequalityConfig inequalities;
};

/// Flat `key = value` lines; dotted keys nest, values are JSON when they
/// parse as JSON and strings otherwise, `#` starts a comment.
nlohmann::json parse_key_value(const std::string& text);

/// JSON if the text starts with '{', key=value otherwise.
nlohmann::json parse_config_text(const std::string& text);

/// Sets a dotted key inside `j`, creating objects on the way.
void set_dotted(nlohmann::json& j, const std::string& key, nlohmann::json value);

/// Validates every field against the preconditions of the target command.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

/// ProblemSpec from {"family": "derived"|"remark"|"custom", ...}.
ProblemSpec spec_from_json(const nlohmann::json& j);

struct RunResult {
  int exit_code = kOk;
  nlohmann::json report;
  std::vector<std::filesystem::path> files;
};

/// Runs the command, then writes report.json, CSV series and optional SVG
/// charts into `out_dir`. Throws ConfigError before writing anything when
/// the output directory is unusable.
RunResult run(const ExperimentConfig& config, std::ostream& log);

/// Copy of a report without the timing block, for determinism comparisons.
nlohmann::json without_timing(nlohmann::json report);

}  // namespace wplap::cli
