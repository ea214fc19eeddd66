#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wplap/radial_fem.hpp"

namespace wplap {

/// K <= 0 on every Gauss point of the mesh: the constraint set is empty.
class InfeasibleConstraint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The p = 2 pencil has no positive eigenvalue.
class NoPrincipalEigenvalue : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  /// Stop when ||grad I - lambda grad G||_inf <= tol (1 + lambda).
  double tol = 1e-9;
  std::size_t max_iterations = 5000;
  /// Relative size of delta in (s^2 + delta^2)^{(p-2)/2} inside the
  /// preconditioner, scaled by max |u'|.
  double regularization = 1e-8;
  /// Armijo sufficient-decrease constant.
  double armijo = 1e-4;
};

struct EigenResult {
  double lambda1 = 0.0;
  /// Normalized so that G(u) = 1; positive at its largest node.
  DiscreteFunction u;
  /// ||grad I - lambda grad G||_inf over free nodes.
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::string message;
};

/// Projected preconditioned gradient descent on I(u)/G(u) over G(u) = 1.
///
/// The step direction is -H^{-1}(grad I - lambda grad G) with H the
/// (regularized) tridiagonal Hessian of I; the first trial step length is
/// min(1, p - 1), which at p = 2 is one step of inverse iteration. Steps are
/// backtracked until the Rayleigh quotient decreases (Armijo) and G stays
/// positive. After convergence u is replaced by |u| and the iteration is
/// polished once more.
EigenResult minimize_rayleigh(const Assembler& A, const SolverOptions& opts = {},
                              const DiscreteFunction* initial = nullptr);

/// Dense p = 2 matrices over the free nodes: stiffness A from L r^{N-1} u'v'
/// and mass B from K r^{N-1} uv, both including omega_{N-1}.
struct LinearPencil {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};
LinearPencil linear_pencil(const Assembler& A);

/// All eigenvalues lambda > 0 of A u = lambda B u, ascending.
std::vector<double> pencil_eigenvalues(const LinearPencil& pencil);

/// Smallest positive eigenvalue of the p = 2 pencil with a B-normalized
/// eigenvector, from a Cholesky reduction of A and a dense symmetric solve.
EigenResult linear_oracle(const Assembler& A);

/// ||grad I(u) - lambda grad G(u)||_inf over free nodes.
double weak_residual(const Assembler& A, double lambda, const DiscreteFunction& u);

/// Positive bump on the elements where K > 0 at both Gauss points,
/// normalized to G = 1.
DiscreteFunction initial_guess(const Assembler& A);

struct TruncationStep {
  double eps = 0.0;
  double R = 0.0;
  std::size_t elements = 0;
  double lambda1 = 0.0;
};

struct TruncationStudy {
  EigenResult result;
  double eps = 0.0;
  double R = 0.0;
  bool converged = false;
  std::vector<TruncationStep> history;
};

struct TruncationOptions {
  /// Elements per decade of r on the log mesh.
  double elements_per_decade = 60.0;
  double rel_tol = 1e-4;
  int max_doublings = 10;
  /// Use the dense p = 2 oracle instead of the nonlinear solver.
  bool use_oracle = false;
  SolverOptions solver;
};

/// Doubles R until |lambda(2R) - lambda(R)| < rel_tol lambda, then halves
/// eps the same way, starting from spec.truncation.
TruncationStudy truncation_study(const ProblemSpec& spec, const TruncationOptions& opts = {});

}  // namespace wplap
