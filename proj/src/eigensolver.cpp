#include "wplap/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace wplap {

namespace {

// Q(v) may fail to decrease by the Armijo amount only through rounding once
// the residual is tiny; allow this much relative slack.
constexpr double kRoundingSlack = 1e-13;

void normalize(const Assembler& A, DiscreteFunction& u) {
  const double G = A.G(u);
  u.values /= std::pow(G, 1.0 / A.p());
}

void make_positive(DiscreteFunction& u) {
  Eigen::Index imax;
  u.values.cwiseAbs().maxCoeff(&imax);
  if (u.values[imax] < 0.0) u.values = -u.values;
}

double slope_scale(const DiscreteFunction& u) {
  const auto& x = u.mesh->nodes;
  double s = 0.0;
  for (std::size_t e = 0; e + 1 < x.size(); ++e) {
    const auto i = static_cast<Eigen::Index>(e);
    s = std::max(s, std::abs(u.values[i + 1] - u.values[i]) / (x[e + 1] - x[e]));
  }
  return s;
}

struct PhaseOutcome {
  bool converged = false;
  bool stalled = false;
};

PhaseOutcome descend(const Assembler& A, const SolverOptions& opts, DiscreteFunction& u,
                     EigenResult& out) {
  const double p = A.p();
  const Eigen::Index n = u.free_count();
  while (true) {
    const auto f = A.assemble(u);
    const double G = f.G_val;
    const double lambda = f.I_val / G;
    const Eigen::VectorXd g = (f.grad_I - lambda * f.grad_G).head(n) / G;
    out.lambda1 = lambda;
    out.residual = (f.grad_I - lambda * f.grad_G).head(n).cwiseAbs().maxCoeff();
    if (out.residual <= opts.tol * (1.0 + lambda)) return {true, false};
    if (out.iterations >= opts.max_iterations) return {false, false};

    const double delta = p == 2.0 ? 0.0 : opts.regularization * slope_scale(u);
    const Eigen::VectorXd d = -solve(A.hessian_I(u, delta), g);
    const double slope = g.dot(d);

    // tau = 1 is a Newton step for grad I(v) = lambda grad G(u); below p = 2
    // the Hessian overweights flat regions and a shorter first step is better
    double tau = std::min(1.0, p - 1.0);
    bool accepted = false;
    DiscreteFunction v = u;
    double Gv = 0.0;
    for (int k = 0; k < 60; ++k, tau *= 0.5) {
      v.values.head(n) = u.values.head(n) + tau * d;
      v.enforce();
      Gv = A.G(v);
      if (!(Gv > 0.0)) continue;
      const double Qv = A.I(v) / Gv;
      if (Qv <= lambda + opts.armijo * tau * slope + kRoundingSlack * lambda) {
        accepted = true;
        break;
      }
    }
    if (!accepted) return {false, true};
    v.values /= std::pow(Gv, 1.0 / p);
    u = std::move(v);
    ++out.iterations;
  }
}

}  // namespace

DiscreteFunction initial_guess(const Assembler& A) {
  if (!A.has_positive_K()) {
    throw InfeasibleConstraint("K <= 0 at every quadrature point: the constraint G(u) = 1 is empty");
  }
  const auto& mesh = A.mesh();
  const auto& kw = A.mass_weights();
  const std::size_t ne = mesh.elements();
  std::vector<bool> positive(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto i = static_cast<Eigen::Index>(e);
    positive[e] = kw(i, 0) > 0.0 && kw(i, 1) > 0.0;
  }
  auto build = [&](bool interior_only) {
    auto u = DiscreteFunction::zero(A.mesh_ptr());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
      const bool left = i > 0 && positive[i - 1];
      const bool right = i < ne && positive[i];
      const bool take = interior_only ? (left || i == 0) && (right || i == ne) && (left || right)
                                      : left || right;
      if (take) u.values[static_cast<Eigen::Index>(i)] = mesh.R() - mesh.nodes[i];
    }
    u.enforce();
    return u;
  };
  for (bool interior_only : {false, true}) {
    auto u = build(interior_only);
    const double G = A.G(u);
    if (G > 0.0) {
      u.values /= std::pow(G, 1.0 / A.p());
      return u;
    }
  }
  throw InfeasibleConstraint("no positive bump on the region K > 0 has G(u) > 0");
}

EigenResult minimize_rayleigh(const Assembler& A, const SolverOptions& opts,
                              const DiscreteFunction* initial) {
  EigenResult out;
  DiscreteFunction u;
  if (initial) {
    u = *initial;
    u.enforce();
    if (!(A.G(u) > 0.0)) throw std::invalid_argument("minimize_rayleigh: initial G(u) must be > 0");
    normalize(A, u);
  } else {
    u = initial_guess(A);
  }

  PhaseOutcome phase = descend(A, opts, u, out);
  if (phase.converged) {
    // |u| is a minimizer whenever u is
    u.values = u.values.cwiseAbs();
    normalize(A, u);
    phase = descend(A, opts, u, out);
  }
  make_positive(u);
  out.u = std::move(u);
  out.converged = phase.converged;
  std::ostringstream os;
  if (phase.converged) {
    os << "converged in " << out.iterations << " iterations";
  } else if (phase.stalled) {
    os << "line search stalled at residual " << out.residual << " after " << out.iterations
       << " iterations";
  } else {
    os << "iteration cap " << opts.max_iterations << " reached at residual " << out.residual;
  }
  out.message = os.str();
  return out;
}

LinearPencil linear_pencil(const Assembler& A) {
  if (A.p() != 2.0) throw std::invalid_argument("linear pencil requires p = 2");
  const auto& mesh = A.mesh();
  const Eigen::Index n = static_cast<Eigen::Index>(mesh.nodes.size()) - 1;
  const double omega = A.omega();
  const auto& lw = A.stiffness_weights();
  const auto& kw = A.mass_weights();
  const auto& phl = A.left_hat();
  LinearPencil out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  auto add = [n](Eigen::MatrixXd& m, Eigen::Index i, Eigen::Index j, double v) {
    if (i < n && j < n) m(i, j) += v;
  };
  for (Eigen::Index e = 0; e < static_cast<Eigen::Index>(mesh.elements()); ++e) {
    const double h = mesh.width(static_cast<std::size_t>(e));
    const double k = omega * lw[e] / (h * h);
    add(out.A, e, e, k);
    add(out.A, e + 1, e + 1, k);
    add(out.A, e, e + 1, -k);
    add(out.A, e + 1, e, -k);
    for (int q = 0; q < 2; ++q) {
      const double a = phl(e, q), b = 1.0 - a, c = omega * kw(e, q);
      add(out.B, e, e, c * a * a);
      add(out.B, e + 1, e + 1, c * b * b);
      add(out.B, e, e + 1, c * a * b);
      add(out.B, e + 1, e, c * a * b);
    }
  }
  return out;
}

namespace {

struct Reduced {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
};

Reduced reduce(const LinearPencil& P) {
  Reduced r;
  r.llt.compute(P.A);
  if (r.llt.info() != Eigen::Success) {
    throw NoPrincipalEigenvalue("stiffness matrix is not positive definite");
  }
  const Eigen::MatrixXd X = r.llt.matrixL().solve(P.B);
  Eigen::MatrixXd C = r.llt.matrixL().solve(X.transpose());
  C = 0.5 * (C + C.transpose()).eval();
  r.eig.compute(C);
  return r;
}

}  // namespace

std::vector<double> pencil_eigenvalues(const LinearPencil& pencil) {
  const auto r = reduce(pencil);
  std::vector<double> out;
  for (Eigen::Index i = r.eig.eigenvalues().size() - 1; i >= 0; --i) {
    const double mu = r.eig.eigenvalues()[i];
    if (mu > 0.0) out.push_back(1.0 / mu);
  }
  return out;
}

EigenResult linear_oracle(const Assembler& A) {
  const LinearPencil P = linear_pencil(A);
  const auto r = reduce(P);
  const Eigen::Index n = P.A.rows();
  const double mu = r.eig.eigenvalues()[n - 1];
  if (!(mu > 0.0)) throw NoPrincipalEigenvalue("the pencil A u = lambda B u has no positive eigenvalue");
  Eigen::VectorXd y = r.eig.eigenvectors().col(n - 1);
  Eigen::VectorXd x = r.llt.matrixU().solve(y);
  x /= std::sqrt(x.dot(P.B * x));

  EigenResult out;
  out.lambda1 = 1.0 / mu;
  out.u = DiscreteFunction::zero(A.mesh_ptr());
  out.u.values.head(n) = x;
  make_positive(out.u);
  out.residual = weak_residual(A, out.lambda1, out.u);
  out.converged = true;
  out.message = "dense pencil solve";
  return out;
}

double weak_residual(const Assembler& A, double lambda, const DiscreteFunction& u) {
  const auto f = A.assemble(u);
  const Eigen::Index n = u.free_count();
  if (n == 0) return 0.0;
  return (f.grad_I - lambda * f.grad_G).head(n).cwiseAbs().maxCoeff();
}

TruncationStudy truncation_study(const ProblemSpec& spec, const TruncationOptions& opts) {
  TruncationStudy study;
  auto solve_at = [&](double eps, double R) {
    const auto M = static_cast<std::size_t>(
        std::max(16.0, std::ceil(opts.elements_per_decade * std::log10(R / eps))));
    const Assembler A(build_log_mesh(eps, R, M), spec.with_truncation({eps, R}));
    EigenResult res = opts.use_oracle ? linear_oracle(A) : minimize_rayleigh(A, opts.solver);
    study.history.push_back({eps, R, M, res.lambda1});
    return res;
  };
  double eps = spec.truncation.eps, R = spec.truncation.R;
  EigenResult cur = solve_at(eps, R);
  auto close = [&](const EigenResult& a, const EigenResult& b) {
    return std::abs(a.lambda1 - b.lambda1) < opts.rel_tol * std::abs(b.lambda1);
  };
  bool r_done = false, eps_done = false;
  for (int k = 0; k < opts.max_doublings && !r_done; ++k) {
    EigenResult next = solve_at(eps, 2.0 * R);
    R *= 2.0;
    r_done = close(cur, next);
    cur = std::move(next);
  }
  for (int k = 0; k < opts.max_doublings && !eps_done; ++k) {
    EigenResult next = solve_at(0.5 * eps, R);
    eps *= 0.5;
    eps_done = close(cur, next);
    cur = std::move(next);
  }
  study.result = std::move(cur);
  study.eps = eps;
  study.R = R;
  study.converged = r_done && eps_done && study.result.converged;
  return study;
}

}  // namespace wplap
