#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wplap/numerics.hpp"

namespace wplap {

/// Raised when a weight that must be positive is found to be <= 0, or when a
/// weight description is malformed.
class InvalidWeight : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a hypothesis required by an operation does not hold.
class PreconditionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Sign { strictly_positive, sign_changing };

/// coeff * r^exponent
struct Power {
  double coeff = 1.0;
  double exponent = 0.0;
};

/// coeff * r^a * (shift + r^zeta)^gamma; the plain form r^a (1 + r^zeta) has
/// shift = 1, gamma = 1.
struct ProductPower {
  double coeff = 1.0;
  double a = 0.0;
  double zeta = 1.0;
  double gamma = 1.0;
  double shift = 1.0;
};

/// coeff * exp(-rate * r)
struct Exponential {
  double coeff = 1.0;
  double rate = 1.0;
};

using Profile = std::variant<Power, ProductPower, Exponential>;

/// Profile `profile` applies on [start, next start).
struct Piece {
  double start = 0.0;
  Profile profile;
};

struct Piecewise {
  std::vector<Piece> pieces;
};

/// Values on log-spaced radii, interpolated linearly in log-log coordinates
/// and extrapolated with the boundary power laws. Values must be positive.
struct Table {
  std::vector<double> radii;
  std::vector<double> values;
};

/// A radial weight profile r -> W(r), evaluable for every r > 0.
class WeightFunction {
 public:
  using Variant = std::variant<Power, ProductPower, Exponential, Piecewise, Table>;

  WeightFunction() : WeightFunction(Power{0.0, 0.0}) {}
  explicit WeightFunction(Variant v, std::optional<Sign> declared = std::nullopt);

  static WeightFunction power(double coeff, double exponent);
  static WeightFunction product_power(double coeff, double a, double zeta,
                                      double gamma = 1.0, double shift = 1.0);
  static WeightFunction exponential(double coeff, double rate);
  static WeightFunction constant(double c) { return power(c, 0.0); }
  static WeightFunction piecewise(std::vector<Piece> pieces);
  static WeightFunction table(std::vector<double> radii, std::vector<double> values);
  /// 1 on [a, b), 0 elsewhere.
  static WeightFunction indicator(double a, double b);

  double operator()(double r) const;
  /// log W(r), evaluated without forming W(r); -inf where W = 0 and NaN
  /// where W < 0.
  double log_value(double r) const;

  Sign sign() const { return sign_; }
  bool strictly_positive() const { return sign_ == Sign::strictly_positive; }
  const Variant& variant() const { return v_; }

  /// Radii where the profile may have a kink or jump.
  std::vector<double> breakpoints() const;

  /// c * W; the declared sign is recomputed.
  WeightFunction scaled(double c) const;

  /// Checks structural invariants (ordering, positivity of tables) and, for
  /// strictly positive weights, samples a log grid on [1e-8, 1e8].
  void validate() const;

 private:
  Variant v_;
  Sign sign_;
};

nlohmann::json to_json(const WeightFunction& w);
WeightFunction weight_from_json(const nlohmann::json& j);

struct Truncation {
  double eps = 1e-3;
  double R = 10.0;
};

/// Dimension, exponent, CKN parameter, and the four weight roles.
///
/// beta = alpha + 1 and p_conj = p / (p - 1) are derived at construction.
struct ProblemSpec {
  int N = 2;
  double p = 2.0;
  double alpha = -0.5;
  double beta = 0.5;
  double p_conj = 2.0;
  WeightFunction L;
  WeightFunction K;
  WeightFunction v;
  WeightFunction w;
  Truncation truncation;

  /// Validates and derives beta, p_conj. Throws std::invalid_argument.
  static ProblemSpec make(int N, double p, double alpha, WeightFunction L,
                          WeightFunction K, WeightFunction v, WeightFunction w,
                          Truncation truncation);

  ProblemSpec with_weights(WeightFunction L_new, WeightFunction K_new) const;
  ProblemSpec with_truncation(Truncation t) const;
};

// Named weight families ----------------------------------------------------

/// p = 2, N = 2, alpha = -1/2, v(r) = r(1 + r),
/// w(r) = r^{-1/2}/2 on (0, 1], r^{-2}/2 beyond; L = v, K = w/2.
ProblemSpec derived_admissible_family(Truncation t = {1e-3, 100.0});

/// Two readings of the near-origin branch of the example w: `literal` is
/// 1/(r^{p beta} - beta), `power` is r^{-(p beta - beta)}.
enum class RemarkReading { literal, power };

/// v(r) = r^{-p alpha + zeta}, w as selected by `reading` on (0, 1] and
/// r^{-(p beta + 1)} beyond; L = v, K = w.
ProblemSpec remark_family(double p, int N, double alpha, double zeta,
                          RemarkReading reading, Truncation t = {1e-3, 100.0});

// Admissibility --------------------------------------------------------------

struct PointViolation {
  std::string check;
  double r = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// lhs/rhs - 1 in the failing direction; larger is worse.
  double severity = 0.0;
};

struct AdmissibilityReport {
  bool c1_holds = true;
  std::optional<PointViolation> worst_c1;
  bool v_bound_holds = true;
  bool w_bound_holds = true;
  std::optional<PointViolation> worst_bound;
  std::vector<std::pair<double, double>> G_curve;
  numerics::QuadratureResult embedding_constant;
  bool admissible = false;
  std::string reason;
  std::vector<std::string> warnings;
};

/// (int_r^inf t^{(1-N)/(p-1)} v(t)^{-1/(p-1)} dt)^{p/p'}.
numerics::QuadratureResult compute_G(const ProblemSpec& spec, double r,
                                     double tol = 1e-10);

/// int_0^inf r^{N-1} w(r) G(r) dr. The sign of w is not checked here.
/// Divergence of G itself is reported as divergent at the right endpoint.
numerics::QuadratureResult embedding_constant(const ProblemSpec& spec,
                                              double tol = 1e-10);

AdmissibilityReport check_admissibility(const ProblemSpec& spec,
                                        std::size_t grid_size = 64,
                                        double tol = 1e-10);

/// F(r) = int_0^r ds / (s L(s)).
numerics::QuadratureResult compute_F(const WeightFunction& L, double r,
                                     double tol = 1e-10);

/// int_0^inf s F(s)^2 K(s) ds. Throws PreconditionFailure when F diverges at 0.
numerics::QuadratureResult boundedness_integral(const WeightFunction& K,
                                                const WeightFunction& L,
                                                double tol = 1e-10);

/// Log-spaced points on [lo, hi], endpoints included.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace wplap
