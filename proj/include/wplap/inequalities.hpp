#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wplap/radial_fem.hpp"

namespace wplap {

/// u(r) = c max(0, 1 - (r/rho)^2)^k r^m.
struct TrialParams {
  double rho = 1.0;
  double k = 1.0;
  double m = 0.0;
  double c = 1.0;

  double value(double r) const;
  double derivative(double r) const;
};

/// Seeded random bumps; rho log-uniform, k and m uniform. Enlarging
/// `samples` with the same seed extends the list without changing its prefix.
struct TrialFamily {
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  double rho_min = 0.1;
  double rho_max = 10.0;
  double k_min = 1.0;
  double k_max = 4.0;
  double m_min = 0.0;
  double m_max = 3.0;
  /// Common amplitude c of every trial.
  double amplitude = 1.0;

  std::vector<TrialParams> generate() const;

  /// m reaches 90% of the way down to the integrability edge -(N - p beta)/p
  /// of the basic CKN integrals, where the ratio approaches its supremum.
  static TrialFamily ckn_edge(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed);
};

enum class CknVariant { basic, generalized };

struct InequalityViolation {
  TrialParams params;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct InequalityReport {
  std::string id;
  std::size_t trials = 0;
  /// sup lhs / rhs over the family, 0 for the zero function.
  double max_ratio = 0.0;
  TrialParams attaining;
  std::vector<InequalityViolation> violations;
  /// Independently computed constant (basic CKN).
  std::optional<double> oracle_constant;
  /// Constant the ratios are checked against.
  std::optional<double> declared_constant;
  std::optional<double> p_star;
  /// max_ratio over all trials divided by max_ratio over the first half.
  std::optional<double> enlargement_ratio;
};

/// Relative slack allowed before a trial counts as a violation.
inline constexpr double kInequalitySlack = 1e-10;

/// Infimum of int r^{N-1-p alpha} |u'|^p / int r^{N-1-p beta} |u|^p over
/// power cutoffs u = min(1, r^{-s}), beta = alpha + 1: each quotient by
/// quadrature, extrapolated to the integrability edge s -> (N - p beta)/p.
/// Returns its reciprocal, the radial CKN constant.
double ckn_oracle_constant(int N, double p, double alpha);

/// p alpha^* = N p / (N - p - p alpha); throws PreconditionFailure unless
/// N - p - p alpha > 0.
double critical_exponent(int N, double p, double alpha);

/// basic: int r^{N-1-p beta} |u|^p <= C int r^{N-1-p alpha} |u'|^p with C the
/// oracle constant. generalized: (omega int r^{N-1} |u|^{p*})^{p/p*} <= C_alpha
/// omega int L r^{N-1} |u'|^p, reported without a constant.
InequalityReport check_ckn(const TrialFamily& family, const ProblemSpec& spec, CknVariant variant);

/// int |K| r^{N-1} |u|^p <= C int L r^{N-1} |u'|^p for every trial.
InequalityReport check_embedding(const TrialFamily& family, const ProblemSpec& spec, double C);

/// |u'|^p - |v'|^{p-2} v' (u^p / v^{p-1})' at given values and slopes.
double picone_expression(double u, double du, double v, double dv, double p);

/// Minimum of the Picone expression over three Gauss points per element,
/// with exact piecewise-linear slopes. Requires u >= 0 and v >= margin
/// max |v| > 0 at every node.
double check_picone(const DiscreteFunction& u, const DiscreteFunction& v, double p,
                    double margin = 1e-8);

struct PiconeSweep {
  std::size_t pairs = 0;
  /// min over pairs of (Picone minimum) / max_e |u'_e|^p.
  double min_scaled = 0.0;
  /// Pairs below -kInequalitySlack after scaling.
  std::size_t violations = 0;
};

/// Consecutive trials (u, v + c) sampled on `mesh` without a Dirichlet node,
/// c uniform in [0.05, 1] from `seed`.
PiconeSweep picone_sweep(const TrialFamily& family, const MeshPtr& mesh, double p,
                         std::uint64_t seed);

}  // namespace wplap
