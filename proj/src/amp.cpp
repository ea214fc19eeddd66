#include "wplap/amp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace wplap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double slope_scale(const DiscreteFunction& u) {
  const auto& x = u.mesh->nodes;
  double s = 0.0;
  for (std::size_t e = 0; e + 1 < x.size(); ++e) {
    const auto i = static_cast<Eigen::Index>(e);
    s = std::max(s, std::abs(u.values[i + 1] - u.values[i]) / (x[e + 1] - x[e]));
  }
  return s;
}

Tridiagonal jacobian(const Assembler& A, const DiscreteFunction& u, double lambda,
                     double regularization) {
  const double p = A.p();
  const double delta = p == 2.0 ? 0.0 : regularization * std::max(slope_scale(u), 1e-300);
  Tridiagonal J = A.hessian_I(u, delta);
  if (lambda != 0.0) {
    const Tridiagonal HG = A.hessian_G(u, p == 2.0 ? 0.0 : regularization *
                                                             std::max(u.values.cwiseAbs().maxCoeff(), 1e-300));
    J.diag -= lambda * HG.diag;
    J.lower -= lambda * HG.lower;
    J.upper -= lambda * HG.upper;
  }
  J.diag /= p;
  J.lower /= p;
  J.upper /= p;
  return J;
}

// p = 2 solve of the stiffness system, rescaled along its direction so that
// the p-homogeneous residual is orthogonal to it.
DiscreteFunction homogeneous_start(const Assembler& A, const Eigen::VectorXd& b) {
  auto u = DiscreteFunction::zero(A.mesh_ptr());
  const Eigen::Index n = u.free_count();
  if (b.head(n).cwiseAbs().maxCoeff() == 0.0) return u;
  const double p = A.p();
  const auto& mesh = A.mesh();
  const auto& lw = A.stiffness_weights();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n + 1), off = Eigen::VectorXd::Zero(n);
  for (Eigen::Index e = 0; e < n; ++e) {
    const double h = mesh.width(static_cast<std::size_t>(e));
    const double k = A.omega() * lw[e] / (h * h);
    diag[e] += k;
    diag[e + 1] += k;
    off[e] -= k;
  }
  u.values.head(n) = solve(Tridiagonal::symmetric(diag, off).leading(n), b.head(n));
  const auto f = A.assemble(u);
  const double num = u.values.head(n).dot(b.head(n));
  const double den = u.values.head(n).dot(f.grad_I.head(n)) / p;
  if (num > 0.0 && den > 0.0) u.values *= std::pow(num / den, 1.0 / (p - 1.0));
  return u;
}

std::string describe(const PerturbedSolution& s) {
  std::ostringstream os;
  os << to_string(s.status) << " at lambda = " << s.lambda << " after " << s.iterations
     << " Newton steps, residual " << s.residual;
  if (s.status == SolveStatus::blow_up) os << " (consistent with nonexistence at lambda_1)";
  return os.str();
}

}  // namespace

void LoadSpec::validate(double lo, double hi) const {
  for (double r : log_grid(lo, hi, 257)) {
    const double v = profile(r);
    if (!std::isfinite(v)) throw InvalidWeight("load profile is not finite");
    if (nonneg && v < 0.0) {
      std::ostringstream os;
      os << "load declared nonnegative but h(" << r << ") = " << v;
      throw InvalidWeight(os.str());
    }
    if (support && (r < support->first || r > support->second) && v != 0.0) {
      std::ostringstream os;
      os << "load declared supported in [" << support->first << ", " << support->second
         << "] but h(" << r << ") = " << v;
      throw InvalidWeight(os.str());
    }
  }
}

LoadSpec LoadSpec::indicator(double a, double b) {
  return {WeightFunction::indicator(a, b), std::make_pair(a, b), true};
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::stagnated: return "stagnated";
    case SolveStatus::blow_up: return "blow-up";
    case SolveStatus::iteration_cap: return "iteration cap";
  }
  return "unknown";
}

Eigen::VectorXd perturbed_residual(const Assembler& A, double lambda,
                                   const DiscreteFunction& u, const Eigen::VectorXd& b) {
  const auto f = A.assemble(u);
  const Eigen::Index n = u.free_count();
  return (f.grad_I - lambda * f.grad_G).head(n) / A.p() - b.head(n);
}

PerturbedSolution newton_perturbed(const Assembler& A, const Eigen::VectorXd& b, double lambda,
                                   DiscreteFunction u, const NewtonOptions& opts) {
  const double p = A.p();
  u.enforce();
  const Eigen::Index n = u.free_count();
  const double bnorm = b.head(n).cwiseAbs().maxCoeff();
  const double target = opts.tol * (1.0 + bnorm);
  auto energy = [&](const DiscreteFunction& v) {
    return A.I(v) / p - v.values.head(n).dot(b.head(n));
  };

  PerturbedSolution out;
  out.lambda = lambda;
  Eigen::VectorXd F = perturbed_residual(A, lambda, u, b);
  for (;;) {
    out.residual = F.cwiseAbs().maxCoeff();
    if (out.residual <= target) {
      out.status = SolveStatus::converged;
      break;
    }
    if (bnorm > 0.0 && u.values.cwiseAbs().maxCoeff() > opts.blowup_factor * bnorm) {
      out.status = SolveStatus::blow_up;
      break;
    }
    if (out.iterations >= opts.max_iterations) {
      out.status = SolveStatus::iteration_cap;
      break;
    }
    Eigen::VectorXd d;
    try {
      d = solve(jacobian(A, u, lambda, opts.regularization), -F);
    } catch (const SingularSystem&) {
      out.status = SolveStatus::stagnated;
      break;
    }
    const double phi0 = F.squaredNorm();
    const double e0 = lambda == 0.0 ? energy(u) : 0.0;
    const double slope = F.dot(d);
    double tau = 1.0;
    bool accepted = false;
    DiscreteFunction v = u;
    Eigen::VectorXd Fv;
    for (std::size_t k = 0; k < opts.max_rejections; ++k, tau *= 0.5) {
      v.values.head(n) = u.values.head(n) + tau * d;
      Fv = perturbed_residual(A, lambda, v, b);
      if (!Fv.allFinite()) continue;
      const bool residual_ok = Fv.squaredNorm() <= (1.0 - 1e-4 * tau) * phi0;
      const bool energy_ok = lambda == 0.0 && energy(v) <= e0 + 1e-4 * tau * slope;
      if (residual_ok || energy_ok) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.status = SolveStatus::stagnated;
      break;
    }
    u = std::move(v);
    F = std::move(Fv);
    ++out.iterations;
  }
  out.u = std::move(u);
  out.message = describe(out);
  return out;
}

PerturbedSolution solve_perturbed(const Assembler& A, const Eigen::VectorXd& b, double lambda,
                                  const DiscreteFunction* u0, const EigenResult* principal,
                                  const NewtonOptions& opts) {
  if (!std::isfinite(lambda)) throw std::invalid_argument("solve_perturbed: lambda must be finite");
  if (u0) return newton_perturbed(A, b, lambda, *u0, opts);

  const double p = A.p();
  if (principal && lambda > principal->lambda1) {
    const DiscreteFunction& phi = principal->u;
    const Eigen::Index n = phi.free_count();
    const double proj = phi.values.head(n).dot(b.head(n));
    auto guess = DiscreteFunction::zero(A.mesh_ptr());
    if (proj > 0.0) {
      const double t = std::pow(proj / (lambda - principal->lambda1), 1.0 / (p - 1.0));
      guess.values = -t * phi.values;
    }
    return newton_perturbed(A, b, lambda, guess, opts);
  }

  PerturbedSolution cur = newton_perturbed(A, b, 0.0, homogeneous_start(A, b), opts);
  if (!cur.converged() || lambda == 0.0) return cur;
  const double scale = principal ? principal->lambda1 : std::abs(lambda);
  const double min_step = 1e-6 * scale;
  double at = 0.0;
  double step = std::abs(lambda);
  const double dir = lambda > 0.0 ? 1.0 : -1.0;
  std::size_t total = cur.iterations;
  while (at != lambda) {
    const double next = std::abs(lambda - at) <= step ? lambda : at + dir * step;
    PerturbedSolution s = newton_perturbed(A, b, next, cur.u, opts);
    total += s.iterations;
    if (s.converged()) {
      at = next;
      cur = std::move(s);
      step *= 2.0;
    } else {
      step *= 0.5;
      if (step < min_step) {
        s.iterations = total;
        s.message = describe(s) + "; continuation step fell below " + std::to_string(min_step);
        return s;
      }
    }
  }
  cur.iterations = total;
  cur.message = describe(cur);
  return cur;
}

AmpScanResult scan_amp(const Assembler& A, const LoadSpec& h, const EigenResult& principal,
                       std::pair<double, double> window, std::size_t steps,
                       std::pair<double, double> E, const ScanOptions& opts) {
  if (!(window.first < window.second)) throw std::invalid_argument("scan_amp: require lambda_lo < lambda_hi");
  const auto& mesh = A.mesh();
  if (!(E.first >= mesh.eps() && E.second <= mesh.R() && E.first <= E.second)) {
    throw std::invalid_argument("scan_amp: E must lie inside [eps, R]");
  }
  h.validate(mesh.eps(), mesh.R());
  const Eigen::VectorXd b = A.load_vector(h.profile);
  const double lambda1 = principal.lambda1;

  AmpScanResult out;
  out.lambda1 = lambda1;
  out.region_E = E;
  const Eigen::Index n = principal.u.free_count();
  std::vector<Eigen::Index> in_E;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = mesh.nodes[static_cast<std::size_t>(i)];
    if (r >= E.first && r <= E.second) in_E.push_back(i);
  }

  auto summarize = [&](double lambda, const PerturbedSolution& s) {
    AmpEntry e;
    e.lambda = lambda;
    e.converged = s.converged();
    e.status = s.status;
    e.residual = s.residual;
    e.min_on_E = e.max_on_E = e.min_global = e.max_global = kNaN;
    if (e.converged) {
      const Eigen::VectorXd u = s.u.values.head(n);
      e.min_global = u.minCoeff();
      e.max_global = u.maxCoeff();
      if (!in_E.empty()) {
        e.min_on_E = e.max_on_E = u[in_E.front()];
        for (Eigen::Index i : in_E) {
          e.min_on_E = std::min(e.min_on_E, u[i]);
          e.max_on_E = std::max(e.max_on_E, u[i]);
        }
      }
    }
    return e;
  };

  std::map<double, PerturbedSolution> cache;
  auto solve_at = [&](double lambda, const DiscreteFunction* warm) -> const PerturbedSolution& {
    auto it = cache.find(lambda);
    if (it != cache.end()) return it->second;
    PerturbedSolution s = solve_perturbed(A, b, lambda, warm, &principal, opts.newton);
    if (!s.converged() && warm) s = solve_perturbed(A, b, lambda, nullptr, &principal, opts.newton);
    return cache.emplace(lambda, std::move(s)).first->second;
  };

  const DiscreteFunction* prev = nullptr;
  double prev_lambda = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double lambda = window.first + static_cast<double>(k + 1) *
                                             (window.second - window.first) /
                                             static_cast<double>(steps);
    const bool same_side = prev && ((prev_lambda < lambda1) == (lambda < lambda1));
    const PerturbedSolution& s = solve_at(lambda, same_side ? prev : nullptr);
    out.lambda_grid.push_back(lambda);
    out.per_lambda.push_back(summarize(lambda, s));
    out.solutions.push_back(s.converged() ? s.u : DiscreteFunction{});
    if (s.converged()) {
      prev = &s.u;
      prev_lambda = lambda;
    } else {
      prev = nullptr;
    }
  }

  auto measure = [&](auto negative) {
    double good = lambda1;
    std::optional<double> bad;
    for (const auto& e : out.per_lambda) {
      if (!(e.lambda > lambda1)) continue;
      if (negative(e)) {
        good = e.lambda;
      } else {
        bad = e.lambda;
        break;
      }
    }
    if (!bad) return good - lambda1;
    double hi = *bad;
    while (hi - good > opts.refine_rel * lambda1) {
      const double mid = 0.5 * (good + hi);
      const auto it = cache.find(good);
      const DiscreteFunction* warm = it != cache.end() && it->second.converged() ? &it->second.u : nullptr;
      const PerturbedSolution& s = solve_at(mid, warm);
      if (negative(summarize(mid, s))) {
        good = mid;
      } else {
        hi = mid;
      }
    }
    return good - lambda1;
  };
  out.delta_local = measure([](const AmpEntry& e) { return e.converged && e.max_on_E < 0.0; });
  out.delta_global = measure([](const AmpEntry& e) { return e.converged && e.max_global < 0.0; });
  out.delta_global = std::min(out.delta_global, out.delta_local);
  return out;
}

}  // namespace wplap
