#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wplap/eigensolver.hpp"

namespace wplap {

/// Forcing term h of the perturbed problem.
struct LoadSpec {
  WeightFunction profile;
  /// Compact support [a, b]; the profile must vanish outside it.
  std::optional<std::pair<double, double>> support;
  bool nonneg = true;

  /// Checks the declared support and sign on a log grid over [lo, hi].
  void validate(double lo, double hi) const;
  static LoadSpec indicator(double a, double b);
};

struct NewtonOptions {
  /// Converged when ||F||_inf <= tol (1 + ||b||_inf).
  double tol = 1e-10;
  std::size_t max_iterations = 200;
  /// Halvings allowed in one line search before declaring stagnation.
  std::size_t max_rejections = 40;
  /// delta = regularization * max |u'| in the Jacobian for p != 2.
  double regularization = 1e-8;
  /// Blow-up when ||u||_inf > blowup_factor ||b||_inf.
  double blowup_factor = 1e6;
};

enum class SolveStatus { converged, stagnated, blow_up, iteration_cap };
std::string to_string(SolveStatus s);

struct PerturbedSolution {
  DiscreteFunction u;
  double lambda = 0.0;
  SolveStatus status = SolveStatus::iteration_cap;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::string message;

  bool converged() const { return status == SolveStatus::converged; }
};

/// F(u) = (grad I(u) - lambda grad G(u)) / p - b over the free nodes: the
/// weak form of -div(L |u'|^{p-2} u') = lambda K |u|^{p-2} u + h tested
/// against each hat function.
Eigen::VectorXd perturbed_residual(const Assembler& A, double lambda,
                                   const DiscreteFunction& u, const Eigen::VectorXd& b);

/// Damped Newton for F(u) = 0 at a fixed lambda, starting from u0.
///
/// The merit is the energy I/p - b.u at lambda = 0 and ||F||^2 otherwise.
PerturbedSolution newton_perturbed(const Assembler& A, const Eigen::VectorXd& b, double lambda,
                                   DiscreteFunction u0, const NewtonOptions& opts = {});

/// Solves the perturbed problem at lambda.
///
/// With u0 given, Newton starts there. Otherwise: above a known principal
/// eigenvalue the start is -t Phi_1 with t^{p-1} = (Phi_1 . b) / (lambda -
/// lambda_1); elsewhere the lambda = 0 solution is continued to lambda, with
/// the continuation step halved on failure down to 1e-6 lambda_1.
PerturbedSolution solve_perturbed(const Assembler& A, const Eigen::VectorXd& b, double lambda,
                                  const DiscreteFunction* u0 = nullptr,
                                  const EigenResult* principal = nullptr,
                                  const NewtonOptions& opts = {});

struct AmpEntry {
  double lambda = 0.0;
  bool converged = false;
  SolveStatus status = SolveStatus::iteration_cap;
  double residual = 0.0;
  double min_on_E = 0.0;
  double max_on_E = 0.0;
  double min_global = 0.0;
  double max_global = 0.0;
};

struct AmpScanResult {
  double lambda1 = 0.0;
  std::vector<double> lambda_grid;
  std::vector<AmpEntry> per_lambda;
  std::pair<double, double> region_E;
  double delta_local = 0.0;
  double delta_global = 0.0;
  /// Converged solutions on the grid, aligned with lambda_grid (empty
  /// functions where the solve failed).
  std::vector<DiscreteFunction> solutions;
};

struct ScanOptions {
  /// Bisection stops when the bracket is narrower than this times lambda_1.
  double refine_rel = 1e-3;
  NewtonOptions newton;
};

/// Solves on lambda_k = lo + (k + 1)(hi - lo)/steps, k = 0..steps-1,
/// warm-starting each solve from the previous one, and measures the windows
/// above lambda_1 on which solutions are negative on E (delta_local) and at
/// every free node (delta_global).
AmpScanResult scan_amp(const Assembler& A, const LoadSpec& h, const EigenResult& principal,
                       std::pair<double, double> window, std::size_t steps,
                       std::pair<double, double> E, const ScanOptions& opts = {});

}  // namespace wplap
