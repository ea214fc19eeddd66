// wplap: command-line driver for the weighted p-Laplacian toolkit.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wplap/cli_report.hpp"

using nlohmann::json;
namespace cli = wplap::cli;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  bool svg = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "JSON or key=value config file");
  sub->add_option("-o,--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--tol", c.tol, "solver tolerance");
  sub->add_option("--set", c.sets, "override a config key, e.g. --set spec.R=200");
  sub->add_flag("--svg", c.svg, "also write SVG charts");
}

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw cli::ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return cli::parse_config_text(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted p-Laplacian eigenvalue, AMP and inequality experiments"};
  app.set_version_flag("--version", std::string(WPLAP_VERSION_STRING));
  app.require_subcommand(1);

  Common common;
  json overrides = json::object();
  auto opt = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help,
                 auto tag) {
    using T = decltype(tag);
    sub->add_option_function<T>(flag, [&overrides, key](const T& v) { cli::set_dotted(overrides, key, v); },
                                help);
  };

  auto* cw = app.add_subcommand("check-weights", "admissibility of the weights and the embedding constant");
  opt(cw, "--grid", "admissibility.grid", "points of the log grid", std::size_t{});

  auto* eg = app.add_subcommand("eigen", "principal eigenpair by finite elements");
  opt(eg, "--elements", "mesh.elements", "number of elements", std::size_t{});
  opt(eg, "--method", "eigen.method", "nonlinear or oracle", std::string{});
  eg->add_flag_callback("--truncation-study", [&] { cli::set_dotted(overrides, "eigen.truncation_study", true); },
                        "grow the truncation until lambda_1 settles");

  auto* am = app.add_subcommand("amp-scan", "scan the perturbed problem across lambda_1");
  opt(am, "--steps", "amp.steps", "grid intervals", std::size_t{});
  opt(am, "--lambda-lo", "amp.lambda_lo", "window start (times lambda_1)", double{});
  opt(am, "--lambda-hi", "amp.lambda_hi", "window end (times lambda_1)", double{});

  auto* sh = app.add_subcommand("shoot", "radial shooting for p = N = 2");
  opt(sh, "--steps", "shoot.steps", "RK4 steps", std::size_t{});
  opt(sh, "--R-big", "shoot.R_big", "outer radius", double{});

  auto* vi = app.add_subcommand("verify-inequalities", "randomized checks of the functional inequalities");
  opt(vi, "--trials", "inequalities.trials", "trial functions per check", std::size_t{});

  for (auto* sub : {cw, eg, am, sh, vi}) add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kInvalid;
  }

  try {
    json j = common.config.empty() ? json::object() : load_config(common.config);
    const CLI::App* chosen = app.get_subcommands().front();
    j["command"] = chosen->get_name();
    j.merge_patch(overrides);
    for (const auto& s : common.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw cli::ConfigError("--set expects key=value, got '" + s + "'");
      const std::string raw = s.substr(eq + 1);
      json value = json::parse(raw, nullptr, false);
      if (value.is_discarded()) value = raw;
      cli::set_dotted(j, s.substr(0, eq), value);
    }
    if (!common.out.empty()) j["out"] = common.out;
    if (common.seed) j["seed"] = *common.seed;
    if (common.tol) j["tol"] = *common.tol;
    if (common.svg) j["svg"] = true;

    const auto config = cli::config_from_json(j);
    const auto result = cli::run(config, std::cerr);
    return result.exit_code;
  } catch (const cli::ConfigError& e) {
    std::cerr << "wplap: invalid configuration: " << e.what() << '\n';
    return cli::kInvalid;
  }
}
