// Acceptance criteria AC1..AC10. Each prints one [PASS]/[FAIL] line with the
// measured quantities; `acceptance ACn` runs one, `acceptance` runs all.
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/bessel.hpp"
#include "support/families.hpp"
#include "wplap/amp.hpp"
#include "wplap/eigensolver.hpp"
#include "wplap/inequalities.hpp"
#include "wplap/shooting.hpp"

using namespace wplap;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double min_free(const DiscreteFunction& u) { return u.values.head(u.free_count()).minCoeff(); }
double max_free(const DiscreteFunction& u) { return u.values.head(u.free_count()).maxCoeff(); }

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures += " [failed: " + what + "]";
    }
  }
};

// Tolerances, pinned.
constexpr double kOracleRel = 1e-6;         // AC1
constexpr double kOracleSeconds = 10.0;     // AC1
constexpr double kBesselRel = 0.01;         // AC2
constexpr double kGradientRel = 1e-6;       // AC4
constexpr double kSlack = 1e-10;            // AC5
constexpr double kRerunRel = 1e-3;          // AC7, times lambda_1
constexpr double kScanSeconds = 120.0;      // AC7
constexpr double kShotRel = 0.01;           // AC8
constexpr double kIdentityRel = 1e-5;       // AC8
constexpr double kConstantStable = 1e-6;    // AC9
constexpr double kRatioLo = 12.0, kRatioHi = 20.0;  // AC10

// AC1: nonlinear solver against the dense p = 2 oracle.
Verdict ac1() {
  Verdict v;
  std::mt19937_64 rng(101);
  double worst = 0.0, slowest = 0.0;
  for (int c = 0; c < 5; ++c) {
    const auto spec = wplap::testing::random_admissible_spec(rng);
    const Assembler A(build_log_mesh(spec.truncation.eps, spec.truncation.R, 200), spec);
    const auto t0 = Clock::now();
    const auto r = minimize_rayleigh(A);
    const auto o = linear_oracle(A);
    const double dt = seconds_since(t0);
    const double rel = std::abs(r.lambda1 - o.lambda1) / o.lambda1;
    worst = std::max(worst, rel);
    slowest = std::max(slowest, dt);
    v.require(r.converged, "case " + std::to_string(c) + " did not converge");
    v.require(rel <= kOracleRel, "case " + std::to_string(c) + " relative gap");
    v.require(dt < kOracleSeconds, "case " + std::to_string(c) + " runtime");
  }
  v.detail << "max rel gap " << worst << " (<= " << kOracleRel << "), slowest case " << slowest << " s";
  return v;
}

// AC2: unit disk against the first zero of J_0.
Verdict ac2() {
  Verdict v;
  const auto one = WeightFunction::constant(1.0);
  const auto spec = ProblemSpec::make(2, 2.0, -0.5, one, one, one, one, {1e-3, 1.0});
  const Assembler A(build_mesh(1e-3, 1.0, 400, 1.0), spec);
  const auto r = minimize_rayleigh(A);
  const double j = wplap::testing::bessel_j0_first_zero();
  const double rel = std::abs(r.lambda1 / (j * j) - 1.0);
  v.require(r.converged, "solver did not converge");
  v.require(rel <= kBesselRel, "relative error");
  v.detail.precision(12);
  v.detail << "lambda1 " << r.lambda1 << " vs j01^2 " << j * j << ", rel " << rel << " (<= " << kBesselRel << ")";
  return v;
}

// AC3: positivity of converged principal eigenfunctions.
Verdict ac3() {
  Verdict v;
  std::mt19937_64 rng(303);
  const double ps[] = {2.0, 3.0, 2.5, 1.8};
  int converged = 0, failures = 0;
  double worst = INFINITY;
  for (int c = 0; c < 20; ++c) {
    const double p = ps[c % 4];
    const auto spec = wplap::testing::random_admissible_spec(rng, p, {1e-3, 20.0});
    const Assembler A(build_log_mesh(1e-3, 20.0, 200), spec);
    const auto r = minimize_rayleigh(A);
    if (!r.converged) {
      v.require(false, "case " + std::to_string(c) + " (p = " + std::to_string(p) + ") did not converge");
      continue;
    }
    ++converged;
    const double m = min_free(r.u) / max_free(r.u);
    worst = std::min(worst, m);
    if (!(m > 0.0)) ++failures;
  }
  v.require(failures == 0, "non-positive free node");
  v.detail << converged << "/20 converged, " << failures << " positivity failures, min u/max u " << worst;
  return v;
}

// AC4: assembled gradients against central differences.
Verdict ac4() {
  Verdict v;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> coeff(0.5, 2.0), expo(-1.0, 1.0), rate(0.2, 2.0), val(0.5, 1.5);
  double worst = 0.0;
  for (double p : {1.5, 2.0, 3.0}) {
    for (int s = 0; s < 10; ++s) {
      const auto L = WeightFunction::product_power(coeff(rng), expo(rng), 1.0 + coeff(rng));
      const auto K = WeightFunction::exponential(coeff(rng), rate(rng));
      const auto spec = ProblemSpec::make(3, p, -0.5, L, K, L, K, {0.05, 2.0});
      const auto mesh = build_mesh(0.05, 2.0, 24, 1.08);
      const Assembler A(mesh, spec);
      const auto u = DiscreteFunction::sample(mesh, [&](double) { return val(rng); });
      const auto f = A.assemble(u);
      double eI = 0.0, eG = 0.0;
      for (Eigen::Index i = 0; i < u.free_count(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(u.values[i]));
        auto up = u, dn = u;
        up.values[i] += h;
        dn.values[i] -= h;
        eI = std::max(eI, std::abs((A.I(up) - A.I(dn)) / (2 * h) - f.grad_I[i]));
        eG = std::max(eG, std::abs((A.G(up) - A.G(dn)) / (2 * h) - f.grad_G[i]));
      }
      const double rel = std::max(eI / f.grad_I.cwiseAbs().maxCoeff(), eG / f.grad_G.cwiseAbs().maxCoeff());
      worst = std::max(worst, rel);
      if (rel > kGradientRel) v.require(false, "p = " + std::to_string(p) + " state " + std::to_string(s));
    }
  }
  v.detail << "max rel error " << worst << " (<= " << kGradientRel << ") over 30 states";
  return v;
}

// AC5: the four inequality suites plus the p = 2 basic CKN sup.
Verdict ac5() {
  Verdict v;
  const auto spec = derived_admissible_family();
  const std::size_t n = 1000;

  const auto basic = check_ckn(TrialFamily::ckn_edge(spec, n, 5), spec, CknVariant::basic);
  TrialFamily f;
  f.samples = n;
  f.seed = 5;
  const auto gen = check_ckn(f, spec, CknVariant::generalized);
  const auto C = embedding_constant(spec);
  v.require(C.convergent(), "embedding constant not convergent");
  const auto emb = check_embedding(f, spec, C.value);
  TrialFamily pf = f;
  pf.samples = 2 * n;
  pf.rho_min = 0.5;
  pf.rho_max = 5.0;
  const auto pic = picone_sweep(pf, build_log_mesh(1e-3, 10.0, 300), 2.0, 5);

  v.require(basic.violations.empty() && basic.trials >= n, "basic CKN");
  v.require(gen.violations.empty() && gen.trials >= n, "generalized CKN");
  v.require(gen.enlargement_ratio && *gen.enlargement_ratio <= 1.1, "generalized CKN sup not settled");
  v.require(emb.violations.empty() && emb.trials >= n, "embedding");
  v.require(pic.violations == 0 && pic.pairs >= n && pic.min_scaled >= -kSlack, "Picone");

  // p = 2, N = 3: constant (2 / (N - 2 - 2 alpha))^2
  const auto one = WeightFunction::constant(1.0);
  const double alpha = -0.25;
  const auto s3 = ProblemSpec::make(3, 2.0, alpha, one, one, one, one, {1e-3, 10.0});
  const auto b3 = check_ckn(TrialFamily::ckn_edge(s3, n, 5), s3, CknVariant::basic);
  const double closed = std::pow(2.0 / (3 - 2 - 2 * alpha), 2);
  v.require(b3.violations.empty(), "basic CKN N = 3");
  v.require(b3.oracle_constant && std::abs(*b3.oracle_constant / closed - 1.0) < 1e-6, "oracle constant");
  v.require(b3.max_ratio <= closed * (1 + kSlack), "N = 3 sup above the constant");
  v.require(b3.max_ratio > 0.5 * closed, "N = 3 sup below half the constant");

  v.detail << "violations basic " << basic.violations.size() << ", generalized " << gen.violations.size()
           << " (enlargement " << gen.enlargement_ratio.value_or(NAN) << "), embedding " << emb.violations.size()
           << ", Picone " << pic.violations << "/" << pic.pairs << " (min " << pic.min_scaled << ")"
           << "; N = 3 sup " << b3.max_ratio << " in (" << 0.5 * closed << ", " << closed << "]";
  return v;
}

struct AmpCase {
  ProblemSpec spec;
  LoadSpec load;
};

std::vector<AmpCase> amp_cases() {
  std::mt19937_64 rng(606);
  const double ps[] = {2.0, 3.0, 2.0, 2.5, 3.0};
  std::vector<AmpCase> out;
  for (int c = 0; c < 5; ++c) {
    const auto spec = wplap::testing::random_admissible_spec(rng, ps[c], {1e-3, 20.0});
    LoadSpec h = LoadSpec::indicator(0.1, 0.5);
    if (c == 1) h = {WeightFunction::exponential(1.0, 0.5), std::nullopt, true};
    if (c == 2) h = {WeightFunction::constant(2.0), std::nullopt, true};
    if (c == 3) h = LoadSpec::indicator(0.5, 3.0);
    if (c == 4) h = {WeightFunction::power(0.3, -0.5), std::nullopt, true};
    out.push_back({spec, h});
  }
  return out;
}

// AC6: solutions below lambda_1 are positive.
Verdict ac6() {
  Verdict v;
  int failures = 0;
  double worst = INFINITY;
  for (const auto& c : amp_cases()) {
    const Assembler A(build_log_mesh(1e-3, 20.0, 200), c.spec);
    const auto principal = minimize_rayleigh(A);
    v.require(principal.converged, "principal eigenvalue");
    const auto b = A.load_vector(c.load.profile);
    for (double s : {0.25, 0.5, 0.9}) {
      const auto sol = solve_perturbed(A, b, s * principal.lambda1, nullptr, &principal);
      const double m = sol.converged() ? min_free(sol.u) / max_free(sol.u) : -INFINITY;
      worst = std::min(worst, m);
      if (!(m > 0.0)) ++failures;
    }
  }
  v.require(failures == 0, "non-positive or unconverged solution");
  v.detail << failures << " failures over 15 solves, min u/max u " << worst;
  return v;
}

// AC7: antimaximum window above lambda_1 for a compactly supported load.
Verdict ac7() {
  Verdict v;
  const auto spec = derived_admissible_family({1e-3, 20.0});
  const Assembler A(build_log_mesh(1e-3, 20.0, 300), spec);
  const auto principal = minimize_rayleigh(A);
  v.require(principal.converged, "principal eigenvalue");
  const double l1 = principal.lambda1;
  const auto h = LoadSpec::indicator(0.2, 0.6);
  const std::pair<double, double> window{0.9 * l1, 1.3 * l1};

  auto t0 = Clock::now();
  const auto a = scan_amp(A, h, principal, window, 16, {0.1, 0.5});
  const double dt = seconds_since(t0);
  const auto b = scan_amp(A, h, principal, window, 16, {0.1, 0.5});

  v.require(a.delta_global > 0.0, "delta_global");
  int checked = 0, bad = 0;
  for (std::size_t k = 0; k < a.per_lambda.size(); ++k) {
    const auto& e = a.per_lambda[k];
    if (e.lambda > l1 && e.lambda < l1 + a.delta_global) {
      ++checked;
      if (!(e.converged && e.max_global < 0.0)) ++bad;
    }
  }
  // spot checks strictly inside the window, off the scan grid
  const auto load = A.load_vector(h.profile);
  for (double s : {0.1, 0.5, 0.9}) {
    const double lambda = l1 + s * a.delta_global;
    const auto sol = solve_perturbed(A, load, lambda, nullptr, &principal);
    ++checked;
    if (!(sol.converged() && max_free(sol.u) < 0.0)) ++bad;
  }
  v.require(bad == 0, "solution not negative inside the window");
  const double drift = std::abs(a.delta_global - b.delta_global);
  v.require(drift <= kRerunRel * l1, "rerun drift");
  v.require(dt < kScanSeconds, "runtime");
  v.detail << "lambda1 " << l1 << ", delta_global " << a.delta_global << " (delta_local " << a.delta_local
           << "), " << checked << " solves checked, " << bad << " not negative, rerun drift " << drift
           << " (<= " << kRerunRel * l1 << "), scan " << dt << " s";
  return v;
}

// AC8: shooting against the FEM truncation study at p = N = 2.
Verdict ac8() {
  Verdict v;
  const auto L = WeightFunction::product_power(1.0, -1.0, 2.0, 1.0, 1.0);  // (1 + s^2) / s
  const auto K = WeightFunction::exponential(1.0, 1.0);
  const auto spec = ProblemSpec::make(2, 2.0, -0.5, L, K, L, K, {1e-3, 10.0});
  TruncationOptions to;
  to.use_oracle = true;
  to.rel_tol = 1e-3;
  const auto study = truncation_study(spec, to);
  v.require(study.converged, "truncation study");
  const double fem = study.result.lambda1;

  const std::size_t steps = 8000;
  const auto br = bracket_eigenvalue(L, K, study.eps, study.R, steps);
  ShootOptions so;
  so.steps = steps;
  const auto shot = shoot_eigenvalue(L, K, study.eps, study.R, br, so);
  const double gap = std::abs(shot.lambda1 - fem) / fem;
  v.require(gap <= kShotRel, "shot vs FEM");

  const auto rep = verify_asymptotics(shot.trajectory, L, K, kIdentityRel);
  v.require(rep.monotone_increasing, "trajectory not strictly increasing");
  v.require(rep.tail_identity_residual <= kIdentityRel, "tail identity residual");
  if (rep.bound_evaluated) v.require(rep.bound_holds, "boundedness bound");

  v.detail << "FEM " << fem << " at (eps, R) = (" << study.eps << ", " << study.R << "), shot " << shot.lambda1
           << ", rel " << gap << "; increasing " << (rep.monotone_increasing ? "yes" : "no")
           << ", tail identity residual " << rep.tail_identity_residual << " (<= " << kIdentityRel << ")"
           << ", flux balance residual " << rep.flux_balance_residual << ", bound "
           << (rep.bound_evaluated ? (rep.bound_holds ? "holds" : "fails") : "not evaluated") << " ("
           << rep.bound_value << ")";
  return v;
}

// AC9: admissibility regression.
Verdict ac9() {
  Verdict v;
  const auto spec = derived_admissible_family();
  const auto rep = check_admissibility(spec);
  const auto c1 = embedding_constant(spec, 1e-10);
  const auto c2 = embedding_constant(spec, 5e-11);
  const double drift = std::abs(c1.value - c2.value) / std::abs(c2.value);
  v.require(rep.admissible, "derived family not admissible: " + rep.reason);
  v.require(c1.convergent() && c2.convergent() && std::isfinite(c2.value), "C not finite");
  v.require(drift <= kConstantStable, "C drift under tolerance halving");

  const auto remark = remark_family(2.0, 3, -0.5, 2.0, RemarkReading::literal);
  const auto rr = check_admissibility(remark);
  v.require(!rr.admissible, "literal family reported admissible");
  v.require(rr.embedding_constant.verdict == numerics::Verdict::divergent &&
                rr.embedding_constant.divergent_at == numerics::Endpoint::left,
            "divergence endpoint");
  v.detail.precision(15);
  v.detail << "derived C " << c2.value << " (drift " << drift << "), literal family inadmissible, C "
           << numerics::to_string(rr.embedding_constant.verdict) << " at "
           << numerics::to_string(rr.embedding_constant.divergent_at) << " end";
  return v;
}

// AC10: fourth order of the RK4 integrator on u = 1 + r^2.
Verdict ac10() {
  Verdict v;
  const double lambda = 1.5, eps = 0.1, R = 3.0;
  const auto L = WeightFunction::constant(1.0);
  const auto K = WeightFunction::product_power(-4.0 / lambda, 0.0, 2.0, -1.0, 1.0);
  std::vector<double> err;
  for (std::size_t steps : {40, 80, 160, 320}) {
    const auto traj = integrate_ivp(L, K, lambda, eps, R, steps, {1.0 + eps * eps, 2.0 * eps * eps});
    double e = 0.0;
    for (std::size_t i = 0; i < traj.r.size(); ++i) {
      e = std::max(e, std::abs(traj.u[i] - 1.0 - traj.r[i] * traj.r[i]));
    }
    err.push_back(e);
  }
  v.detail << "ratios";
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double ratio = err[i - 1] / err[i];
    v.detail << ' ' << ratio;
    v.require(ratio >= kRatioLo && ratio <= kRatioHi, "ratio outside [12, 20]");
  }
  v.detail << " (in [" << kRatioLo << ", " << kRatioHi << "])";
  return v;
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<Verdict()> run;
};

const std::vector<Criterion> kCriteria = {
    {"AC1", "oracle equivalence", ac1},
    {"AC2", "disk ground state", ac2},
    {"AC3", "eigenfunction positivity", ac3},
    {"AC4", "gradient correctness", ac4},
    {"AC5", "inequality suites", ac5},
    {"AC6", "AMP below lambda_1", ac6},
    {"AC7", "AMP above lambda_1", ac7},
    {"AC8", "shooting consistency", ac8},
    {"AC9", "admissibility regression", ac9},
    {"AC10", "RK4 order", ac10},
};

}  // namespace

int main(int argc, char** argv) {
  std::cout.precision(6);
  int failed = 0, ran = 0;
  for (const auto& c : kCriteria) {
    if (argc > 1 && std::strcmp(argv[1], c.id) != 0) continue;
    ++ran;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.title << ": " << v.detail.str() << " ("
              << seconds_since(t0) << " s)" << v.failures << std::endl;
    if (!v.pass) ++failed;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion " << argv[1] << '\n';
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
