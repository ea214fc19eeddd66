#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace wplap::numerics {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Verdict { convergent, divergent, inconclusive };

/// Which end of the domain produced the divergence evidence.
enum class Endpoint { none, left, right };

/// Result of an adaptive integration.
///
/// When `verdict == divergent` the value is NaN and the error estimate is
/// +inf; callers must not read `value` as a number in that case.
/// `error_estimate` is compared against the effective tolerance
/// max(tol, tol * |value|).
struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::size_t evaluations = 0;
  Endpoint divergent_at = Endpoint::none;

  bool convergent() const { return verdict == Verdict::convergent; }
  bool divergent() const { return verdict == Verdict::divergent; }
};

struct QuadratureOptions {
  double tol = 1e-10;
  /// Refine geometrically toward the left endpoint and probe it for a
  /// non-integrable power-law singularity.
  bool singular_left = false;
  /// Interior points where the integrand may have kinks or jumps.
  std::vector<double> breakpoints;
  std::size_t max_intervals = 4000;
  /// Divergence is declared at +inf when the fitted exponent is
  /// >= -1 - margin, and at the left endpoint when it is <= -1 + margin.
  double divergence_margin = 5e-4;
};

/// Thrown when the integrand returns a non-finite value at an interior point.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(double where, double value);
  double where() const { return where_; }

 private:
  double where_;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b]; b may be +inf.
///
/// Semi-infinite domains use t = a + c * s / (1 - s) on s in [0, 1) with
/// c = a for a > 0 and c = 1 otherwise, pre-split geometrically toward s = 1.
/// A fitted power-law exponent on three dyadic windows near a suspect
/// endpoint decides divergence before any subdivision happens.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& opts = {});

/// Least-squares slope of log|f| against log x on [x0, x1] from `samples`
/// log-spaced points. Returns -inf if any sample is zero and +inf if any
/// sample overflows.
double fit_power_exponent(const Integrand& f, double x0, double x1,
                          int samples = 5);

std::string to_string(Verdict v);
std::string to_string(Endpoint e);

}  // namespace wplap::numerics
