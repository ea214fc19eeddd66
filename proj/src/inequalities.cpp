#include "wplap/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "wplap/numerics.hpp"

namespace wplap {

namespace {

// |x|^{p-2} x
double signed_power(double x, double p) { return std::copysign(std::pow(std::abs(x), p - 1.0), x); }

// int_a^b f with a cheap first pass fixing the scale so the tolerance is
// effectively relative.
numerics::QuadratureResult scaled_integral(const numerics::Integrand& f, double a, double b,
                                           std::vector<double> breakpoints = {}) {
  numerics::QuadratureOptions o;
  o.singular_left = a == 0.0;
  o.breakpoints = std::move(breakpoints);
  o.tol = 1e-6;
  const auto rough = numerics::integrate(f, a, b, o);
  if (!rough.convergent()) return rough;
  const double scale = rough.value != 0.0 ? std::abs(rough.value) : 1.0;
  o.tol = 1e-13;
  auto fine = numerics::integrate([&](double r) { return f(r) / scale; }, a, b, o);
  fine.value *= scale;
  fine.error_estimate *= scale;
  return fine;
}

std::vector<double> kink(const TrialParams& t) {
  // u' changes sign where m (1 - x^2) = 2 k x^2
  if (t.m <= 0.0) return {};
  return {t.rho * std::sqrt(t.m / (t.m + 2.0 * t.k))};
}

// r^e |x|^p without forming either factor
double weighted_power(double r, double e, double x, double p) {
  return x == 0.0 ? 0.0 : std::exp(e * std::log(r) + p * std::log(std::abs(x)));
}

struct Sides {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

struct Tally {
  InequalityReport rep;
  std::size_t half = 0;
  double half_max = 0.0;

  void add(std::size_t index, const TrialParams& t, const Sides& s) {
    ++rep.trials;
    if (!s.ok || !std::isfinite(s.lhs) || !std::isfinite(s.rhs)) {
      rep.violations.push_back({t, s.lhs, s.rhs});
      return;
    }
    const double ratio = s.lhs == 0.0 ? 0.0 : s.lhs / s.rhs;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.attaining = t;
    }
    if (index < half) half_max = std::max(half_max, ratio);
    if (rep.declared_constant && s.lhs > *rep.declared_constant * s.rhs * (1.0 + kInequalitySlack)) {
      rep.violations.push_back({t, s.lhs, s.rhs});
    }
  }
};

}  // namespace

double TrialParams::value(double r) const {
  if (!(r < rho)) return 0.0;
  const double x = r / rho;
  return c * std::pow(1.0 - x * x, k) * std::pow(r, m);
}

double TrialParams::derivative(double r) const {
  if (!(r < rho)) return 0.0;
  const double x = r / rho, y = 1.0 - x * x;
  return c * std::pow(y, k - 1.0) * std::pow(r, m - 1.0) * (m * y - 2.0 * k * x * x);
}

std::vector<TrialParams> TrialFamily::generate() const {
  if (!(rho_min > 0.0 && rho_min <= rho_max && k_min >= 1.0 && k_min <= k_max && m_min <= m_max)) {
    throw std::invalid_argument("trial family: invalid parameter ranges (need rho > 0, k >= 1)");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double l0 = std::log(rho_min), l1 = std::log(rho_max);
  std::vector<TrialParams> out;
  out.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    TrialParams t;
    t.rho = std::exp(l0 + (l1 - l0) * U(rng));
    t.k = k_min + (k_max - k_min) * U(rng);
    t.m = m_min + (m_max - m_min) * U(rng);
    t.c = amplitude;
    out.push_back(t);
  }
  return out;
}

TrialFamily TrialFamily::ckn_edge(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed) {
  TrialFamily f;
  f.samples = samples;
  f.seed = seed;
  f.m_min = -0.9 * (spec.N - spec.p * spec.beta) / spec.p;
  return f;
}

double critical_exponent(int N, double p, double alpha) {
  const double d = N - p - p * alpha;
  if (!(d > 0.0)) {
    std::ostringstream os;
    os << "p*_alpha = N p / (N - p - p alpha) needs N - p - p alpha > 0; got " << d;
    throw PreconditionFailure(os.str());
  }
  return N * p / d;
}

double ckn_oracle_constant(int N, double p, double alpha) {
  const double b = N - p - p * alpha;
  if (!(b > 0.0)) throw PreconditionFailure("CKN oracle needs N - p - p alpha > 0");
  const double beta = alpha + 1.0;
  auto integral = [](const numerics::Integrand& f, double a, double c) {
    const auto q = scaled_integral(f, a, c);
    if (!q.convergent()) throw std::runtime_error("CKN oracle: quadrature " + numerics::to_string(q.verdict));
    return q.value;
  };
  // in t = ln r every piece is int_0^inf e^{-c t} dt
  auto decay = [&](double c) {
    return integral([c](double t) { return std::exp(-c * t); }, 0.0, numerics::kInfinity);
  };
  auto quotient = [&](double s) {
    const double num = std::pow(s, p) * decay(p * alpha + p * (s + 1.0) - N);
    const double den = decay(N - p * beta) + decay(p * beta + p * s - N);
    return num / den;
  };
  // Neville extrapolation to h = 0 along s = (b/p)(1 + h), h = 2^-j
  std::vector<double> h, Q;
  for (int j = 3; j <= 8; ++j) {
    h.push_back(std::ldexp(1.0, -j));
    Q.push_back(quotient(b / p * (1.0 + h.back())));
  }
  for (std::size_t level = 1; level < h.size(); ++level) {
    for (std::size_t i = h.size() - 1; i >= level; --i) {
      Q[i] = (h[i - level] * Q[i] - h[i] * Q[i - 1]) / (h[i - level] - h[i]);
    }
  }
  return 1.0 / Q.back();
}

InequalityReport check_ckn(const TrialFamily& family, const ProblemSpec& spec, CknVariant variant) {
  const int N = spec.N;
  const double p = spec.p, alpha = spec.alpha;
  const auto trials = family.generate();
  Tally tally;
  tally.half = trials.size() / 2;

  if (variant == CknVariant::basic) {
    if (!(alpha > -1.0 && alpha < 0.0)) throw PreconditionFailure("basic CKN needs alpha in (-1, 0)");
    critical_exponent(N, p, alpha);
    const double beta = spec.beta;
    const double m_floor = -(N - p * beta) / p;
    tally.rep.id = "ckn_basic";
    tally.rep.oracle_constant = ckn_oracle_constant(N, p, alpha);
    tally.rep.declared_constant = tally.rep.oracle_constant;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const auto& t = trials[i];
      if (!(t.m > m_floor)) {
        std::ostringstream os;
        os << "trial exponent m = " << t.m << " makes int r^{N-1-p beta}|u|^p diverge (need m > " << m_floor << ")";
        throw PreconditionFailure(os.str());
      }
      const auto l = scaled_integral(
          [&](double r) { return weighted_power(r, N - 1.0 - p * beta, t.value(r), p); }, 0.0, t.rho);
      const auto g = scaled_integral(
          [&](double r) { return weighted_power(r, N - 1.0 - p * alpha, t.derivative(r), p); },
          0.0, t.rho, kink(t));
      tally.add(i, t, {l.value, g.value, l.convergent() && g.convergent()});
    }
  } else {
    const double ps = critical_exponent(N, p, alpha);
    const double omega = surface_measure(N);
    tally.rep.id = "ckn_generalized";
    tally.rep.p_star = ps;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const auto& t = trials[i];
      if (!(N + ps * t.m > 0.0)) throw PreconditionFailure("trial exponent m makes int |u|^{p*} diverge");
      const auto l = scaled_integral(
          [&](double r) { return weighted_power(r, N - 1.0, t.value(r), ps); }, 0.0, t.rho);
      const auto g = scaled_integral(
          [&](double r) { return spec.L(r) * weighted_power(r, N - 1.0, t.derivative(r), p); },
          0.0, t.rho, kink(t));
      tally.add(i, t, {std::pow(omega * l.value, p / ps), omega * g.value, l.convergent() && g.convergent()});
    }
    tally.rep.enlargement_ratio = tally.half_max > 0.0 ? tally.rep.max_ratio / tally.half_max : 1.0;
  }
  return tally.rep;
}

InequalityReport check_embedding(const TrialFamily& family, const ProblemSpec& spec, double C) {
  if (!(C > 0.0 && std::isfinite(C))) throw PreconditionFailure("embedding check needs a finite C > 0");
  const int N = spec.N;
  const double p = spec.p;
  Tally tally;
  tally.rep.id = "embedding";
  tally.rep.declared_constant = C;
  const auto trials = family.generate();
  tally.half = trials.size() / 2;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    const auto l = scaled_integral(
        [&](double r) { return std::abs(spec.K(r)) * weighted_power(r, N - 1.0, t.value(r), p); }, 0.0,
        t.rho);
    const auto g = scaled_integral(
        [&](double r) { return spec.L(r) * weighted_power(r, N - 1.0, t.derivative(r), p); },
        0.0, t.rho, kink(t));
    tally.add(i, t, {l.value, g.value, l.convergent() && g.convergent()});
  }
  return tally.rep;
}

double picone_expression(double u, double du, double v, double dv, double p) {
  const double quotient_slope = p * std::pow(u, p - 1.0) * du / std::pow(v, p - 1.0) -
                                (p - 1.0) * std::pow(u, p) * dv / std::pow(v, p);
  return std::pow(std::abs(du), p) - signed_power(dv, p) * quotient_slope;
}

double check_picone(const DiscreteFunction& u, const DiscreteFunction& v, double p, double margin) {
  if (!(p > 1.0)) throw std::invalid_argument("check_picone: p must be > 1");
  if (u.mesh->nodes != v.mesh->nodes) throw std::invalid_argument("check_picone: u and v live on different meshes");
  if (u.values.minCoeff() < 0.0) throw PreconditionFailure("Picone needs u >= 0");
  const double vmax = v.values.cwiseAbs().maxCoeff();
  if (!(vmax > 0.0) || !(v.values.minCoeff() >= margin * vmax)) {
    std::ostringstream os;
    os << "Picone needs v bounded away from 0; min v = " << v.values.minCoeff() << ", max |v| = " << vmax;
    throw PreconditionFailure(os.str());
  }
  constexpr double g = 0.3872983346207417;
  const double xs[3] = {0.5 - g, 0.5, 0.5 + g};
  const auto& x = u.mesh->nodes;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e + 1 < x.size(); ++e) {
    const auto i = static_cast<Eigen::Index>(e);
    const double h = x[e + 1] - x[e];
    const double du = (u.values[i + 1] - u.values[i]) / h;
    const double dv = (v.values[i + 1] - v.values[i]) / h;
    for (double th : xs) {
      const double uq = u.values[i] + th * (u.values[i + 1] - u.values[i]);
      const double vq = v.values[i] + th * (v.values[i + 1] - v.values[i]);
      lowest = std::min(lowest, picone_expression(uq, du, vq, dv, p));
    }
  }
  return lowest;
}

PiconeSweep picone_sweep(const TrialFamily& family, const MeshPtr& mesh, double p,
                         std::uint64_t seed) {
  const auto trials = family.generate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(0.05, 1.0);
  PiconeSweep out;
  for (std::size_t i = 0; i + 1 < trials.size(); i += 2) {
    const auto u = DiscreteFunction::sample(mesh, [&](double r) { return trials[i].value(r); }, false);
    const double c = shift(rng);
    const auto v = DiscreteFunction::sample(mesh, [&](double r) { return trials[i + 1].value(r) + c; }, false);
    double scale = 0.0;
    for (std::size_t e = 0; e + 1 < mesh->nodes.size(); ++e) {
      const auto k = static_cast<Eigen::Index>(e);
      scale = std::max(scale, std::pow(std::abs(u.values[k + 1] - u.values[k]) / mesh->width(e), p));
    }
    const double value = check_picone(u, v, p) / std::max(scale, 1e-300);
    out.min_scaled = out.pairs == 0 ? value : std::min(out.min_scaled, value);
    if (value < -kInequalitySlack) ++out.violations;
    ++out.pairs;
  }
  return out;
}

}  // namespace wplap
