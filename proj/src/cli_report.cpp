#include "wplap/cli_report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "wplap/amp.hpp"
#include "wplap/eigensolver.hpp"
#include "wplap/inequalities.hpp"
#include "wplap/shooting.hpp"
#include "wplap/svg_chart.hpp"

#ifndef WPLAP_VERSION
#define WPLAP_VERSION "dev"
#endif

namespace wplap::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::map<Command, std::string> kCommandNames = {
    {Command::check_weights, "check-weights"},
    {Command::eigen, "eigen"},
    {Command::amp_scan, "amp-scan"},
    {Command::shoot, "shoot"},
    {Command::verify_inequalities, "verify-inequalities"},
};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

std::pair<double, double> pair_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(what + " must be a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

json pair_to(const std::pair<double, double>& p) { return json::array({p.first, p.second}); }

json spec_to_json(const ProblemSpec& s) {
  return {{"family", "custom"},
          {"N", s.N},
          {"p", s.p},
          {"alpha", s.alpha},
          {"beta", s.beta},
          {"p_conj", s.p_conj},
          {"L", to_json(s.L)},
          {"K", to_json(s.K)},
          {"v", to_json(s.v)},
          {"w", to_json(s.w)},
          {"eps", s.truncation.eps},
          {"R", s.truncation.R}};
}

WeightFunction load_from_json(const json& j, std::optional<std::pair<double, double>>& support) {
  if (j.is_object() && j.value("type", "") == "indicator") {
    check_keys(j, {"type", "a", "b"}, "amp.load");
    const double a = j.at("a").get<double>(), b = j.at("b").get<double>();
    support = std::make_pair(a, b);
    return WeightFunction::indicator(a, b);
  }
  return weight_from_json(j);
}

json quadrature_json(const numerics::QuadratureResult& q) {
  return {{"value", q.convergent() ? json(q.value) : json(nullptr)},
          {"error_estimate", std::isfinite(q.error_estimate) ? json(q.error_estimate) : json(nullptr)},
          {"verdict", numerics::to_string(q.verdict)},
          {"divergent_at", numerics::to_string(q.divergent_at)}};
}

json violation_json(const std::optional<PointViolation>& v) {
  if (!v) return nullptr;
  return {{"check", v->check}, {"r", v->r}, {"lhs", v->lhs}, {"rhs", v->rhs}, {"severity", v->severity}};
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string csv_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

MeshPtr mesh_for(const ExperimentConfig& c, double eps, double R) {
  if (c.mesh.spacing == "log") return build_log_mesh(eps, R, c.mesh.elements);
  return build_mesh(eps, R, c.mesh.elements, c.mesh.grading);
}

struct Series {
  std::string name;
  std::string csv;
  std::string x_column;
  std::vector<std::string> y_columns;
  std::string title;
  bool log_x = false;
};

struct Outcome {
  json results = json::object();
  std::vector<Series> series;
  std::vector<std::string> warnings;
  std::string status = "ok";
};

EigenResult principal_for(const Assembler& A, const ExperimentConfig& c) {
  if (c.eigen.method == "oracle") return linear_oracle(A);
  SolverOptions o;
  o.tol = c.tol;
  o.max_iterations = c.eigen.max_iterations;
  return minimize_rayleigh(A, o);
}

json eigen_json(const EigenResult& r, const Assembler& A, double tol) {
  const Eigen::Index n = r.u.free_count();
  return {{"lambda1", r.lambda1},
          {"residual", r.residual},
          {"residual_tolerance", tol * (1.0 + r.lambda1)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"message", r.message},
          {"G", A.G(r.u)},
          {"min_free_value", n > 0 ? r.u.values.head(n).minCoeff() : 0.0}};
}

// check-weights --------------------------------------------------------------

Outcome run_check_weights(const ExperimentConfig& c) {
  Outcome out;
  const auto rep = check_admissibility(c.spec, c.admissibility_grid, c.tol);
  std::ostringstream csv;
  csv.precision(17);
  csv << "r,G\n";
  for (const auto& [r, G] : rep.G_curve) csv << r << ',' << G << '\n';
  out.results = {{"admissible", rep.admissible},
                 {"reason", rep.reason},
                 {"c1_holds", rep.c1_holds},
                 {"v_bound_holds", rep.v_bound_holds},
                 {"w_bound_holds", rep.w_bound_holds},
                 {"worst_c1", violation_json(rep.worst_c1)},
                 {"worst_bound", violation_json(rep.worst_bound)},
                 {"embedding_constant", quadrature_json(rep.embedding_constant)},
                 {"G_curve_points", rep.G_curve.size()}};
  out.warnings = rep.warnings;
  if (!rep.admissible) out.warnings.push_back("weights are not admissible: " + rep.reason);
  if (rep.embedding_constant.verdict == numerics::Verdict::inconclusive) out.status = "nonconvergent";
  out.series.push_back({"G_curve", csv.str(), "r", {"G"}, "G(r)", true});
  return out;
}

// eigen ----------------------------------------------------------------------

Outcome run_eigen(const ExperimentConfig& c) {
  Outcome out;
  EigenResult res;
  json mesh;
  double eps = c.spec.truncation.eps, R = c.spec.truncation.R;
  std::size_t elements = c.mesh.elements;
  if (c.eigen.truncation_study) {
    TruncationOptions o;
    o.elements_per_decade = c.eigen.elements_per_decade;
    o.rel_tol = c.eigen.truncation_rel_tol;
    o.use_oracle = c.eigen.method == "oracle";
    o.solver.tol = c.tol;
    o.solver.max_iterations = c.eigen.max_iterations;
    const auto study = truncation_study(c.spec, o);
    json history = json::array();
    for (const auto& h : study.history) {
      history.push_back({{"eps", h.eps}, {"R", h.R}, {"elements", h.elements}, {"lambda1", h.lambda1}});
    }
    out.results["truncation_study"] = {{"converged", study.converged}, {"history", history}};
    if (!study.converged) out.warnings.push_back("truncation study did not settle within its doubling budget");
    res = study.result;
    eps = study.eps;
    R = study.R;
    elements = study.history.back().elements;
  } else {
    const Assembler A(mesh_for(c, eps, R), c.spec);
    res = principal_for(A, c);
  }
  const Assembler A(res.u.mesh, c.spec.with_truncation({eps, R}));
  const json e = eigen_json(res, A, c.tol);
  for (const auto& [k, v] : e.items()) out.results[k] = v;
  out.results["method"] = c.eigen.method;
  out.results["mesh"] = {{"eps", eps}, {"R", R}, {"elements", elements}, {"spacing", c.mesh.spacing}};
  if (!res.converged) out.status = "nonconvergent";
  out.series.push_back({"eigenfunction", res.u.to_csv(), "r", {"u"}, "principal eigenfunction", true});
  return out;
}

// amp-scan -------------------------------------------------------------------

Outcome run_amp(const ExperimentConfig& c) {
  Outcome out;
  const Assembler A(mesh_for(c, c.spec.truncation.eps, c.spec.truncation.R), c.spec);
  const EigenResult principal = principal_for(A, c);
  out.results["principal"] = eigen_json(principal, A, c.tol);
  if (!principal.converged) {
    out.status = "nonconvergent";
    out.warnings.push_back("principal eigenvalue did not converge; scan skipped");
    return out;
  }
  const double l1 = principal.lambda1;
  const double scale = c.amp.relative ? l1 : 1.0;
  const std::pair<double, double> window{c.amp.lambda_lo * scale, c.amp.lambda_hi * scale};
  ScanOptions so;
  so.refine_rel = c.amp.refine_rel;
  const LoadSpec h{c.amp.load, c.amp.load_support, true};
  const auto scan = scan_amp(A, h, principal, window, c.amp.steps, c.amp.E, so);

  std::ostringstream csv;
  csv.precision(17);
  csv << "lambda,lambda_over_lambda1,converged,status,residual,min_on_E,max_on_E,min_global,max_global\n";
  json table = json::array();
  bool below_positive = true;
  for (const auto& e : scan.per_lambda) {
    csv << e.lambda << ',' << e.lambda / l1 << ',' << (e.converged ? 1 : 0) << ',' << to_string(e.status) << ','
        << e.residual << ',' << e.min_on_E << ',' << e.max_on_E << ',' << e.min_global << ',' << e.max_global
        << '\n';
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    table.push_back({{"lambda", e.lambda},
                     {"lambda_over_lambda1", e.lambda / l1},
                     {"converged", e.converged},
                     {"status", to_string(e.status)},
                     {"residual", num(e.residual)},
                     {"min_on_E", num(e.min_on_E)},
                     {"max_on_E", num(e.max_on_E)},
                     {"min_global", num(e.min_global)},
                     {"max_global", num(e.max_global)}});
    const bool at_l1 = std::abs(e.lambda / l1 - 1.0) < 1e-6;
    if (!e.converged) {
      if (at_l1) {
        out.warnings.push_back("no solution at lambda = lambda_1, as expected");
      } else {
        out.status = "nonconvergent";
      }
    }
    if (e.lambda < l1 && !(e.converged && e.min_global > 0.0)) below_positive = false;
  }
  out.results["lambda1"] = l1;
  out.results["window"] = pair_to(window);
  out.results["steps"] = c.amp.steps;
  out.results["E"] = pair_to(c.amp.E);
  out.results["delta_local"] = scan.delta_local;
  out.results["delta_global"] = scan.delta_global;
  out.results["below_lambda1_positive"] = below_positive;
  out.results["table"] = table;
  if (!below_positive) out.warnings.push_back("a solution below lambda_1 is not strictly positive");
  out.series.push_back({"amp_scan", csv.str(), "lambda_over_lambda1", {"min_global", "max_global"},
                        "solution extremes against lambda / lambda_1", false});
  return out;
}

// shoot ----------------------------------------------------------------------

Outcome run_shoot(const ExperimentConfig& c) {
  Outcome out;
  const double eps = c.spec.truncation.eps;
  const double R_big = c.shoot.R_big.value_or(c.spec.truncation.R);
  const auto bracket = c.shoot.bracket ? *c.shoot.bracket
                                       : bracket_eigenvalue(c.spec.L, c.spec.K, eps, R_big, c.shoot.steps);
  ShootOptions so;
  so.steps = c.shoot.steps;
  const auto s = shoot_eigenvalue(c.spec.L, c.spec.K, eps, R_big, bracket, so);
  const auto rep = verify_asymptotics(s.trajectory, c.spec.L, c.spec.K, c.tol, c.seed);
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  out.results = {{"lambda1", s.lambda1},
                 {"eps", eps},
                 {"R_big", R_big},
                 {"bracket", pair_to(bracket)},
                 {"bisections", s.bisections},
                 {"lambda_half_eps", num(s.lambda_half_eps)},
                 {"eps_sensitivity", num(s.eps_sensitivity)},
                 {"asymptotics",
                  {{"monotone_increasing", rep.monotone_increasing},
                   {"flux_nonincreasing", rep.flux_nonincreasing},
                   {"tail_identity_residual", num(rep.tail_identity_residual)},
                   {"flux_balance_residual", num(rep.flux_balance_residual)},
                   {"representation_residual", num(rep.representation_residual)},
                   {"origin_representation_residual", num(rep.origin_representation_residual)},
                   {"tail_exponent", num(rep.tail_exponent)},
                   {"bound_evaluated", rep.bound_evaluated},
                   {"boundedness_integral", num(rep.boundedness_integral)},
                   {"bound_value", num(rep.bound_value)},
                   {"bound_holds", rep.bound_holds},
                   {"normalization", num(rep.normalization)},
                   {"hypothesis", rep.hypothesis}}}};
  if (c.shoot.compare_fem) {
    const Assembler A(mesh_for(c, eps, R_big), c.spec.with_truncation({eps, R_big}));
    const double fem = linear_oracle(A).lambda1;
    out.results["fem"] = {{"lambda1", fem}, {"relative_difference", std::abs(s.lambda1 - fem) / fem}};
  }
  if (!rep.monotone_increasing) out.warnings.push_back("shot trajectory is not strictly increasing");
  if (!rep.hypothesis.empty()) out.warnings.push_back("bound not evaluated: " + rep.hypothesis);
  out.series.push_back({"trajectory", s.trajectory.to_csv(), "r", {"u", "q"}, "shot trajectory", true});
  return out;
}

// verify-inequalities --------------------------------------------------------

json inequality_json(const InequalityReport& r) {
  json v = json::array();
  for (std::size_t i = 0; i < r.violations.size() && i < 20; ++i) {
    const auto& x = r.violations[i];
    v.push_back({{"rho", x.params.rho}, {"k", x.params.k}, {"m", x.params.m},
                 {"lhs", std::isfinite(x.lhs) ? json(x.lhs) : json(nullptr)},
                 {"rhs", std::isfinite(x.rhs) ? json(x.rhs) : json(nullptr)}});
  }
  return {{"id", r.id},
          {"trials", r.trials},
          {"max_ratio", r.max_ratio},
          {"attaining", {{"rho", r.attaining.rho}, {"k", r.attaining.k}, {"m", r.attaining.m}}},
          {"violation_count", r.violations.size()},
          {"violations", v},
          {"oracle_constant", optional_json(r.oracle_constant)},
          {"declared_constant", optional_json(r.declared_constant)},
          {"p_star", optional_json(r.p_star)},
          {"enlargement_ratio", optional_json(r.enlargement_ratio)}};
}

Outcome run_inequalities(const ExperimentConfig& c) {
  Outcome out;
  json reports = json::array();
  std::size_t total = 0;
  std::ostringstream csv;
  csv.precision(17);
  csv << "id,trials,max_ratio,declared_constant,violations\n";
  auto record = [&](const InequalityReport& r) {
    reports.push_back(inequality_json(r));
    total += r.violations.size();
    csv << r.id << ',' << r.trials << ',' << r.max_ratio << ','
        << (r.declared_constant ? csv_number(*r.declared_constant) : "") << ',' << r.violations.size() << '\n';
  };
  for (const auto& check : c.inequalities.checks) {
    if (check == "ckn_basic") {
      record(check_ckn(TrialFamily::ckn_edge(c.spec, c.inequalities.trials, c.seed), c.spec, CknVariant::basic));
    } else if (check == "ckn_generalized") {
      TrialFamily f;
      f.samples = c.inequalities.trials;
      f.seed = c.seed;
      record(check_ckn(f, c.spec, CknVariant::generalized));
    } else if (check == "embedding") {
      const auto C = embedding_constant(c.spec, std::min(c.tol, 1e-10));
      if (!C.convergent()) {
        out.warnings.push_back("embedding check skipped: C is " + numerics::to_string(C.verdict));
        reports.push_back({{"id", "embedding"}, {"skipped", true}, {"embedding_constant", quadrature_json(C)}});
        continue;
      }
      TrialFamily f;
      f.samples = c.inequalities.trials;
      f.seed = c.seed;
      auto r = check_embedding(f, c.spec, C.value);
      record(r);
    } else if (check == "picone") {
      TrialFamily f;
      f.samples = 2 * c.inequalities.trials;
      f.seed = c.seed;
      f.rho_min = std::max(0.1, 10.0 * c.spec.truncation.eps);
      f.rho_max = std::max(f.rho_min, std::min(10.0, c.spec.truncation.R));
      const auto mesh = mesh_for(c, c.spec.truncation.eps, c.spec.truncation.R);
      const auto sweep = picone_sweep(f, mesh, c.spec.p, c.seed);
      out.results["picone"] = {{"pairs", sweep.pairs}, {"min_scaled", sweep.min_scaled},
                               {"violation_count", sweep.violations}};
      total += sweep.violations;
      csv << "picone," << sweep.pairs << ',' << sweep.min_scaled << ",0," << sweep.violations << '\n';
    }
  }
  out.results["reports"] = reports;
  out.results["total_violations"] = total;
  if (total > 0) out.status = "violations";
  out.series.push_back({"inequalities", csv.str(), "", {}, "", false});
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw ConfigError("cannot write " + path.string());
}

}  // namespace

std::string to_string(Command c) { return kCommandNames.at(c); }

Command command_from_string(const std::string& s) {
  for (const auto& [c, name] : kCommandNames) {
    if (name == s) return c;
  }
  throw ConfigError("unknown command '" + s +
                    "' (expected check-weights, eigen, amp-scan, shoot or verify-inequalities)");
}

void set_dotted(json& j, const std::string& key, json value) {
  if (key.empty()) throw ConfigError("empty configuration key");
  json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("malformed key '" + key + "'");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

json parse_key_value(const std::string& text) {
  json out = json::object();
  std::istringstream in(text);
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    set_dotted(out, key, std::move(value));
  }
  return out;
}

json parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");
    return j;
  }
  return parse_key_value(text);
}

ProblemSpec spec_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("spec must be an object");
    const std::string family = j.value("family", j.contains("L") ? "custom" : "derived");
    const Truncation t{j.value("eps", 1e-3), j.value("R", 100.0)};
    if (family == "derived") {
      check_keys(j, {"family", "eps", "R"}, "spec (derived)");
      return derived_admissible_family(t);
    }
    if (family == "remark") {
      check_keys(j, {"family", "N", "p", "alpha", "zeta", "reading", "eps", "R"}, "spec (remark)");
      const std::string reading = j.value("reading", "literal");
      if (reading != "literal" && reading != "power") throw ConfigError("spec.reading must be literal or power");
      return remark_family(j.at("p").get<double>(), j.at("N").get<int>(), j.at("alpha").get<double>(),
                           j.at("zeta").get<double>(),
                           reading == "literal" ? RemarkReading::literal : RemarkReading::power, t);
    }
    if (family == "custom") {
      check_keys(j, {"family", "N", "p", "alpha", "beta", "p_conj", "L", "K", "v", "w", "eps", "R"}, "spec");
      const auto L = weight_from_json(j.at("L"));
      const auto K = weight_from_json(j.at("K"));
      const auto v = j.contains("v") ? weight_from_json(j.at("v")) : L;
      const auto w = j.contains("w") ? weight_from_json(j.at("w")) : K;
      return ProblemSpec::make(j.at("N").get<int>(), j.at("p").get<double>(), j.at("alpha").get<double>(), L, K,
                               v, w, t);
    }
    throw ConfigError("unknown spec.family '" + family + "' (expected derived, remark or custom)");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  } catch (const InvalidWeight& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    check_keys(j, {"command", "spec", "mesh", "tol", "seed", "out", "svg", "admissibility", "eigen", "amp",
                   "shoot", "inequalities"},
               "config");
    if (!j.contains("command")) throw ConfigError("config has no command");
    c.command = command_from_string(j.at("command").get<std::string>());
    c.spec_source = j.value("spec", json{{"family", "derived"}});
    c.spec = spec_from_json(c.spec_source);
    c.tol = j.value("tol", c.tol);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out", c.out_dir.string());
    c.svg = j.value("svg", c.svg);
    if (!(c.tol > 0.0 && c.tol < 1.0)) throw ConfigError("tol must lie in (0, 1)");

    if (j.contains("mesh")) {
      const auto& m = j.at("mesh");
      check_keys(m, {"elements", "spacing", "grading"}, "mesh");
      c.mesh.elements = m.value("elements", c.mesh.elements);
      c.mesh.spacing = m.value("spacing", c.mesh.spacing);
      c.mesh.grading = m.value("grading", c.mesh.grading);
    }
    if (c.mesh.elements < 2) throw ConfigError("mesh.elements must be >= 2");
    if (c.mesh.spacing != "log" && c.mesh.spacing != "graded") throw ConfigError("mesh.spacing must be log or graded");
    if (!(c.mesh.grading > 0.0)) throw ConfigError("mesh.grading must be > 0");

    if (j.contains("admissibility")) {
      check_keys(j.at("admissibility"), {"grid"}, "admissibility");
      c.admissibility_grid = j.at("admissibility").value("grid", c.admissibility_grid);
    }
    if (c.admissibility_grid < 4) throw ConfigError("admissibility.grid must be >= 4");

    if (j.contains("eigen")) {
      const auto& e = j.at("eigen");
      check_keys(e, {"method", "max_iterations", "truncation_study", "truncation_rel_tol", "elements_per_decade"},
                 "eigen");
      c.eigen.method = e.value("method", c.eigen.method);
      c.eigen.max_iterations = e.value("max_iterations", c.eigen.max_iterations);
      c.eigen.truncation_study = e.value("truncation_study", c.eigen.truncation_study);
      c.eigen.truncation_rel_tol = e.value("truncation_rel_tol", c.eigen.truncation_rel_tol);
      c.eigen.elements_per_decade = e.value("elements_per_decade", c.eigen.elements_per_decade);
    }
    if (c.eigen.method != "nonlinear" && c.eigen.method != "oracle") {
      throw ConfigError("eigen.method must be nonlinear or oracle");
    }
    if (c.eigen.method == "oracle" && c.spec.p != 2.0) throw ConfigError("eigen.method = oracle needs p = 2");
    if (!(c.eigen.truncation_rel_tol > 0.0)) throw ConfigError("eigen.truncation_rel_tol must be > 0");
    if (!(c.eigen.elements_per_decade >= 1.0)) throw ConfigError("eigen.elements_per_decade must be >= 1");

    if (j.contains("amp")) {
      const auto& a = j.at("amp");
      check_keys(a, {"lambda_lo", "lambda_hi", "relative", "steps", "E", "load", "load_support", "refine_rel"}, "amp");
      c.amp.lambda_lo = a.value("lambda_lo", c.amp.lambda_lo);
      c.amp.lambda_hi = a.value("lambda_hi", c.amp.lambda_hi);
      c.amp.relative = a.value("relative", c.amp.relative);
      c.amp.steps = a.value("steps", c.amp.steps);
      c.amp.refine_rel = a.value("refine_rel", c.amp.refine_rel);
      if (a.contains("E")) c.amp.E = pair_from(a.at("E"), "amp.E");
      if (a.contains("load")) {
        c.amp.load_support.reset();
        c.amp.load = load_from_json(a.at("load"), c.amp.load_support);
      }
      if (a.contains("load_support")) {
        if (a.at("load_support").is_null()) {
          c.amp.load_support.reset();
        } else {
          c.amp.load_support = pair_from(a.at("load_support"), "amp.load_support");
        }
      }
    }
    if (c.command == Command::amp_scan) {
      const auto& t = c.spec.truncation;
      if (!(c.amp.lambda_lo < c.amp.lambda_hi)) throw ConfigError("amp.lambda_lo must be < amp.lambda_hi");
      if (!(c.amp.E.first >= t.eps && c.amp.E.second <= t.R && c.amp.E.first <= c.amp.E.second)) {
        throw ConfigError("amp.E must lie inside [eps, R]");
      }
      if (!(c.amp.refine_rel > 0.0)) throw ConfigError("amp.refine_rel must be > 0");
      LoadSpec{c.amp.load, c.amp.load_support, true}.validate(t.eps, t.R);
    }

    if (j.contains("shoot")) {
      const auto& s = j.at("shoot");
      check_keys(s, {"steps", "R_big", "bracket", "compare_fem"}, "shoot");
      c.shoot.steps = s.value("steps", c.shoot.steps);
      if (s.contains("R_big") && !s.at("R_big").is_null()) c.shoot.R_big = s.at("R_big").get<double>();
      if (s.contains("bracket") && !s.at("bracket").is_null()) c.shoot.bracket = pair_from(s.at("bracket"), "shoot.bracket");
      c.shoot.compare_fem = s.value("compare_fem", c.shoot.compare_fem);
    }
    if (c.command == Command::shoot) {
      if (c.spec.N != 2 || c.spec.p != 2.0) throw ConfigError("shoot needs p = N = 2");
      if (!c.spec.K.strictly_positive()) throw ConfigError("shoot needs K > 0");
      if (!c.spec.L.strictly_positive()) throw ConfigError("shoot needs L > 0");
      if (c.shoot.steps < 16) throw ConfigError("shoot.steps must be >= 16");
      if (c.shoot.R_big && !(*c.shoot.R_big > c.spec.truncation.eps)) throw ConfigError("shoot.R_big must exceed eps");
      if (c.shoot.bracket && !(c.shoot.bracket->first >= 0.0 && c.shoot.bracket->second > c.shoot.bracket->first)) {
        throw ConfigError("shoot.bracket must satisfy 0 <= lo < hi");
      }
    }

    if (j.contains("inequalities")) {
      const auto& q = j.at("inequalities");
      check_keys(q, {"trials", "checks"}, "inequalities");
      c.inequalities.trials = q.value("trials", c.inequalities.trials);
      if (q.contains("checks")) c.inequalities.checks = q.at("checks").get<std::vector<std::string>>();
    }
    if (c.command == Command::verify_inequalities) {
      if (c.inequalities.trials < 2) throw ConfigError("inequalities.trials must be >= 2");
      for (const auto& name : c.inequalities.checks) {
        if (name != "ckn_basic" && name != "ckn_generalized" && name != "embedding" && name != "picone") {
          throw ConfigError("unknown inequality check '" + name + "'");
        }
        if (name.rfind("ckn", 0) == 0) critical_exponent(c.spec.N, c.spec.p, c.spec.alpha);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const PreconditionFailure& e) {
    throw ConfigError(e.what());
  } catch (const InvalidWeight& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j = {{"command", to_string(c.command)},
            {"spec", spec_to_json(c.spec)},
            {"mesh", {{"elements", c.mesh.elements}, {"spacing", c.mesh.spacing}, {"grading", c.mesh.grading}}},
            {"tol", c.tol},
            {"seed", c.seed},
            {"out", c.out_dir.string()},
            {"svg", c.svg},
            {"admissibility", {{"grid", c.admissibility_grid}}},
            {"eigen",
             {{"method", c.eigen.method},
              {"max_iterations", c.eigen.max_iterations},
              {"truncation_study", c.eigen.truncation_study},
              {"truncation_rel_tol", c.eigen.truncation_rel_tol},
              {"elements_per_decade", c.eigen.elements_per_decade}}},
            {"amp",
             {{"lambda_lo", c.amp.lambda_lo},
              {"lambda_hi", c.amp.lambda_hi},
              {"relative", c.amp.relative},
              {"steps", c.amp.steps},
              {"E", pair_to(c.amp.E)},
              {"load", to_json(c.amp.load)},
              {"load_support", c.amp.load_support ? pair_to(*c.amp.load_support) : json(nullptr)},
              {"refine_rel", c.amp.refine_rel}}},
            {"shoot",
             {{"steps", c.shoot.steps},
              {"R_big", c.shoot.R_big ? json(*c.shoot.R_big) : json(nullptr)},
              {"bracket", c.shoot.bracket ? pair_to(*c.shoot.bracket) : json(nullptr)},
              {"compare_fem", c.shoot.compare_fem}}},
            {"inequalities", {{"trials", c.inequalities.trials}, {"checks", c.inequalities.checks}}}};
  return j;
}

RunResult run(const ExperimentConfig& config, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec || !fs::is_directory(config.out_dir)) {
    throw ConfigError("cannot create output directory " + config.out_dir.string());
  }
  {
    const fs::path probe = config.out_dir / ".wplap_write_probe";
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory " + config.out_dir.string() + " is not writable");
    f.close();
    fs::remove(probe, ec);
  }

  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  std::string error;
  log << "wplap " << to_string(config.command) << '\n';
  try {
    switch (config.command) {
      case Command::check_weights: out = run_check_weights(config); break;
      case Command::eigen: out = run_eigen(config); break;
      case Command::amp_scan: out = run_amp(config); break;
      case Command::shoot: out = run_shoot(config); break;
      case Command::verify_inequalities: out = run_inequalities(config); break;
    }
  } catch (const PreconditionFailure& e) {
    throw ConfigError(e.what());
  } catch (const InvalidWeight& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::exception& e) {
    // numerical failure: keep whatever was computed and report it
    out.status = "error";
    error = e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunResult result;
  json files = json::array();
  for (const auto& s : out.series) {
    const fs::path csv = config.out_dir / (s.name + ".csv");
    write_file(csv, s.csv);
    result.files.push_back(csv);
    files.push_back(csv.filename().string());
    if (config.svg && !s.y_columns.empty()) {
      const fs::path svg = config.out_dir / (s.name + ".svg");
      write_file(svg, svg_line_chart(s.csv, s.x_column, s.y_columns, s.title, s.log_x));
      result.files.push_back(svg);
      files.push_back(svg.filename().string());
    }
  }
  json report = {{"schema_version", kSchemaVersion},
                 {"command", to_string(config.command)},
                 {"status", out.status},
                 {"config", to_json(config)},
                 {"provenance", {{"tool", "wplap"}, {"version", WPLAP_VERSION}, {"seed", config.seed},
                                 {"timing", {{"wall_seconds", seconds}}}}},
                 {"results", out.results},
                 {"warnings", out.warnings},
                 {"files", files}};
  if (!error.empty()) report["error"] = error;
  const fs::path report_path = config.out_dir / "report.json";
  write_file(report_path, report.dump(2) + "\n");
  result.files.push_back(report_path);
  result.report = std::move(report);
  result.exit_code = out.status == "ok" ? kOk : kNonconvergent;
  for (const auto& w : out.warnings) log << "warning: " << w << '\n';
  if (!error.empty()) log << "error: " << error << '\n';
  log << "status " << out.status << ", report " << report_path.string() << '\n';
  return result;
}

json without_timing(json report) {
  if (report.contains("provenance")) report["provenance"].erase("timing");
  return report;
}

}  // namespace wplap::cli
