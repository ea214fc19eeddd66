#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wplap/weights.hpp"

namespace wplap {

/// The IVP state stopped being finite.
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double radius)
      : std::runtime_error(what), radius(radius) {}
  double radius;
};

/// The sign event does not switch between the ends of the bracket.
class BracketingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples of u and the flux q = r L(r) u'(r) for p = N = 2.
struct Trajectory {
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> q;
  double lambda = 0.0;

  /// Three columns r,u,q with a header, 17 significant digits.
  std::string to_csv() const;
};

struct IvpState {
  double u = 1.0;
  double q = 0.0;
};

/// Classical RK4 in t = ln r on du/dt = q/L, dq/dt = -lambda r^2 K u, with
/// `steps` equal steps from eps to R_big.
Trajectory integrate_ivp(const WeightFunction& L, const WeightFunction& K, double lambda,
                         double eps, double R_big, std::size_t steps, IvpState start = {});

/// First sample radius where u < 0.
std::optional<double> first_negative_radius(const Trajectory& traj);

struct ShootOptions {
  std::size_t steps = 4000;
  /// Bisection stops once the bracket is narrower than this times lambda_b.
  double rel_width = 1e-8;
  /// Repeat the shot with eps / 2 (same step length in ln r).
  bool eps_study = true;
};

struct ShootResult {
  double lambda1 = 0.0;
  std::size_t bisections = 0;
  /// Shot eigenvalue with eps halved; NaN when not requested.
  double lambda_half_eps = 0.0;
  /// |lambda_half_eps - lambda1| / lambda1.
  double eps_sensitivity = 0.0;
  Trajectory trajectory;
};

/// Bisection on lambda for the first sample with u < 0 on [eps, R_big]; at the
/// limit u(R_big) = 0, which is the Dirichlet ground state on the annulus.
ShootResult shoot_eigenvalue(const WeightFunction& L, const WeightFunction& K, double eps,
                             double R_big, std::pair<double, double> bracket,
                             const ShootOptions& opts = {});

/// Doubles `guess` until u turns negative before R_big. Returns (lo, hi) with
/// no sign change at lo and one at hi.
std::pair<double, double> bracket_eigenvalue(const WeightFunction& L, const WeightFunction& K,
                                             double eps, double R_big, std::size_t steps,
                                             double guess = 1.0);

struct AsymptoticsReport {
  /// sup_i |q_i - lambda int_{r_i}^inf s K u ds| / max |q|, the tail beyond
  /// R_big from a power-law fit over the last decade.
  double tail_identity_residual = 0.0;
  /// |q_j - q_i + lambda int_{r_i}^{r_j} s K u ds| / max |q| over random
  /// checkpoint pairs.
  double flux_balance_residual = 0.0;
  /// sup_i |u_i - u_0 - lambda F(r_i) int_{r_i}^inf s K u - lambda int_eps^{r_i} s K u F|
  /// / max |u|.
  double representation_residual = 0.0;
  /// Same with the flux integrated from eps: u_0 + q_0 (F - F_0) -
  /// lambda F(r_i) int_eps^{r_i} s K u + lambda int_eps^{r_i} s K u F.
  double origin_representation_residual = 0.0;
  bool monotone_increasing = false;
  /// q nonincreasing wherever K > 0 and u > 0.
  bool flux_nonincreasing = true;
  bool bound_evaluated = false;
  double boundedness_integral = 0.0;
  double bound_value = 0.0;
  bool bound_holds = false;
  /// Factor c with 2 pi int r K (c u)^2 dr = 1 over [eps, R_big].
  double normalization = 1.0;
  /// Set when a hypothesis fails and the bound is not evaluated.
  std::string hypothesis;
  /// Power-law exponent of s K u over the last decade; NaN without a fit.
  double tail_exponent = 0.0;
};

/// Returns traj scaled so 2 pi int r K u^2 dr = 1 on its radii, and the factor.
std::pair<Trajectory, double> normalize_trajectory(const Trajectory& traj, const WeightFunction& L,
                                                   const WeightFunction& K);

AsymptoticsReport verify_asymptotics(const Trajectory& traj, const WeightFunction& L,
                                     const WeightFunction& K, double tol = 1e-10,
                                     std::uint64_t seed = 1);

}  // namespace wplap
