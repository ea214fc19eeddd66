#include "wplap/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace wplap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// three-point Gauss-Legendre on [0, 1]
const std::array<double, 3> kGaussX = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr std::array<double, 3> kGaussW = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

struct Rhs {
  const WeightFunction& L;
  const WeightFunction& K;
  double lambda;

  std::array<double, 2> operator()(double t, const std::array<double, 2>& y) const {
    const double r = std::exp(t);
    const double Lr = L(r);
    if (!(Lr > 0.0)) {
      std::ostringstream os;
      os << "L must be positive on [eps, R_big]; L(" << r << ") = " << Lr;
      throw PreconditionFailure(os.str());
    }
    return {y[1] / Lr, -lambda * r * r * K(r) * y[0]};
  }
};

double hermite(double theta, double h, double y0, double d0, double y1, double d1) {
  const double t2 = theta * theta, t3 = t2 * theta;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

// Per-interval Gauss data for integrals in t = ln r of the Hermite
// interpolant of u (du/dt = q / L).
struct IntervalQuadrature {
  std::vector<double> t;
  std::vector<double> dudt;

  IntervalQuadrature(const Trajectory& traj, const WeightFunction& L) {
    const std::size_t n = traj.r.size();
    t.resize(n);
    dudt.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = std::log(traj.r[i]);
      dudt[i] = traj.q[i] / L(traj.r[i]);
    }
  }

  // sum_g w_g f(r_g, u_g, theta_g) h over interval i
  template <class F>
  double over(const Trajectory& traj, std::size_t i, F&& f) const {
    const double h = t[i + 1] - t[i];
    double s = 0.0;
    for (int g = 0; g < 3; ++g) {
      const double th = kGaussX[g];
      const double r = std::exp(t[i] + th * h);
      const double u = hermite(th, h, traj.u[i], dudt[i], traj.u[i + 1], dudt[i + 1]);
      s += kGaussW[g] * f(r, u, th);
    }
    return s * h;
  }
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double relative(double err, double scale) { return scale > 0.0 ? err / scale : err; }

}  // namespace

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "r,u,q\n";
  for (std::size_t i = 0; i < r.size(); ++i) os << r[i] << ',' << u[i] << ',' << q[i] << '\n';
  return os.str();
}

Trajectory integrate_ivp(const WeightFunction& L, const WeightFunction& K, double lambda,
                         double eps, double R_big, std::size_t steps, IvpState start) {
  if (steps < 16) throw std::invalid_argument("integrate_ivp: steps must be >= 16");
  if (!(eps > 0.0 && R_big > eps)) throw std::invalid_argument("integrate_ivp: require 0 < eps < R_big");
  if (!std::isfinite(lambda)) throw std::invalid_argument("integrate_ivp: lambda must be finite");
  const Rhs f{L, K, lambda};
  const double t0 = std::log(eps);
  const double h = (std::log(R_big) - t0) / static_cast<double>(steps);

  Trajectory out;
  out.lambda = lambda;
  out.r.reserve(steps + 1);
  out.u.reserve(steps + 1);
  out.q.reserve(steps + 1);
  std::array<double, 2> y = {start.u, start.q};
  out.r.push_back(eps);
  out.u.push_back(y[0]);
  out.q.push_back(y[1]);
  auto axpy = [](const std::array<double, 2>& a, double s, const std::array<double, 2>& b) {
    return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
  };
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const auto k1 = f(t, y);
    const auto k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const auto k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const auto k4 = f(t + h, axpy(y, h, k3));
    for (int c = 0; c < 2; ++c) y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    const double r = i + 1 == steps ? R_big : std::exp(t + h);
    if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
      std::ostringstream os;
      os << "IVP state is not finite at r = " << r << " (lambda = " << lambda << ")";
      throw IntegrationFailure(os.str(), r);
    }
    out.r.push_back(r);
    out.u.push_back(y[0]);
    out.q.push_back(y[1]);
  }
  return out;
}

std::optional<double> first_negative_radius(const Trajectory& traj) {
  for (std::size_t i = 0; i < traj.u.size(); ++i) {
    if (traj.u[i] < 0.0) return traj.r[i];
  }
  return std::nullopt;
}

namespace {

bool crosses(const WeightFunction& L, const WeightFunction& K, double lambda, double eps,
             double R_big, std::size_t steps) {
  return first_negative_radius(integrate_ivp(L, K, lambda, eps, R_big, steps)).has_value();
}

}  // namespace

std::pair<double, double> bracket_eigenvalue(const WeightFunction& L, const WeightFunction& K,
                                             double eps, double R_big, std::size_t steps,
                                             double guess) {
  if (!(guess > 0.0)) throw std::invalid_argument("bracket_eigenvalue: guess must be > 0");
  double lo = 0.0, hi = guess;
  for (int k = 0; !crosses(L, K, hi, eps, R_big, steps); ++k) {
    if (k == 200) throw BracketingError("no sign change of u up to lambda = " + std::to_string(hi));
    lo = hi;
    hi *= 2.0;
  }
  while (lo == 0.0 && hi > 1e-300) {
    const double half = 0.5 * hi;
    if (!crosses(L, K, half, eps, R_big, steps)) {
      lo = half;
      break;
    }
    hi = half;
  }
  return {lo, hi};
}

ShootResult shoot_eigenvalue(const WeightFunction& L, const WeightFunction& K, double eps,
                             double R_big, std::pair<double, double> bracket,
                             const ShootOptions& opts) {
  if (!K.strictly_positive()) throw PreconditionFailure("shooting requires K > 0");
  auto [lo, hi] = bracket;
  if (!(lo >= 0.0 && hi > lo)) throw std::invalid_argument("shoot_eigenvalue: require 0 <= lambda_a < lambda_b");

  auto shoot = [&](double e, std::size_t steps, std::size_t& count) {
    double a = lo, b = hi;
    if (crosses(L, K, a, e, R_big, steps)) {
      std::ostringstream os;
      os << "u already changes sign at lambda_a = " << a;
      throw BracketingError(os.str());
    }
    if (!crosses(L, K, b, e, R_big, steps)) {
      std::ostringstream os;
      os << "u keeps its sign on [" << e << ", " << R_big << "] at lambda_b = " << b;
      throw BracketingError(os.str());
    }
    const double width = opts.rel_width * hi;
    while (b - a >= width) {
      const double mid = 0.5 * (a + b);
      (crosses(L, K, mid, e, R_big, steps) ? b : a) = mid;
      ++count;
    }
    return 0.5 * (a + b);
  };

  ShootResult out;
  out.lambda1 = shoot(eps, opts.steps, out.bisections);
  out.trajectory = integrate_ivp(L, K, out.lambda1, eps, R_big, opts.steps);
  out.lambda_half_eps = kNaN;
  out.eps_sensitivity = kNaN;
  if (opts.eps_study) {
    const auto extra = static_cast<std::size_t>(
        std::ceil(static_cast<double>(opts.steps) * std::log(2.0) / std::log(R_big / eps)));
    std::size_t unused = 0;
    try {
      out.lambda_half_eps = shoot(0.5 * eps, opts.steps + extra, unused);
      out.eps_sensitivity = std::abs(out.lambda_half_eps - out.lambda1) / out.lambda1;
    } catch (const BracketingError&) {
    }
  }
  return out;
}

std::pair<Trajectory, double> normalize_trajectory(const Trajectory& traj, const WeightFunction& L,
                                                   const WeightFunction& K) {
  const IntervalQuadrature Q(traj, L);
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < traj.r.size(); ++i) {
    mass += Q.over(traj, i, [&](double r, double u, double) { return r * r * K(r) * u * u; });
  }
  mass *= 2.0 * std::numbers::pi;
  if (!(mass > 0.0)) throw PreconditionFailure("2 pi int r K u^2 dr is not positive; cannot normalize");
  const double c = 1.0 / std::sqrt(mass);
  Trajectory out = traj;
  for (auto& x : out.u) x *= c;
  for (auto& x : out.q) x *= c;
  return {out, c};
}

AsymptoticsReport verify_asymptotics(const Trajectory& traj, const WeightFunction& L,
                                     const WeightFunction& K, double tol, std::uint64_t seed) {
  const std::size_t n = traj.r.size();
  if (n < 2) throw std::invalid_argument("verify_asymptotics: trajectory too short");
  const double lambda = traj.lambda;
  AsymptoticsReport rep;
  const double qscale = max_abs(traj.q);
  const double uscale = max_abs(traj.u);

  rep.monotone_increasing = true;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(traj.u[i + 1] > traj.u[i])) rep.monotone_increasing = false;
    if (K(traj.r[i]) > 0.0 && traj.u[i] > 0.0 && traj.u[i + 1] > 0.0 &&
        traj.q[i + 1] > traj.q[i] + 1e-14 * qscale) {
      rep.flux_nonincreasing = false;
    }
  }

  // F at the nodes: F(eps) by quadrature, then dF/dt = 1/L per interval
  std::vector<double> F(n, kNaN);
  const auto F0 = compute_F(L, traj.r[0], tol);
  const bool F_ok = F0.convergent();
  const IntervalQuadrature Q(traj, L);
  if (F_ok) {
    F[0] = F0.value;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      F[i + 1] = F[i] + Q.over(traj, i, [&](double r, double, double) { return 1.0 / L(r); });
    }
  }

  // S_i = int_eps^{r_i} s K u ds, P_i = int_eps^{r_i} s K u F ds
  std::vector<double> S(n, 0.0), P(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    S[i + 1] = S[i] + Q.over(traj, i, [&](double r, double u, double) { return r * r * K(r) * u; });
    if (F_ok) {
      const double h = Q.t[i + 1] - Q.t[i];
      const double dF0 = 1.0 / L(traj.r[i]), dF1 = 1.0 / L(traj.r[i + 1]);
      P[i + 1] = P[i] + Q.over(traj, i, [&](double r, double u, double th) {
        return r * r * K(r) * u * hermite(th, h, F[i], dF0, F[i + 1], dF1);
      });
    }
  }

  // power-law tail of s K u beyond R_big, fitted over the last decade
  double tail = 0.0;
  rep.tail_exponent = kNaN;
  {
    const double R = traj.r.back();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    bool positive = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (traj.r[i] < 0.1 * R) continue;
      const double g = traj.r[i] * K(traj.r[i]) * traj.u[i];
      if (!(g > 0.0)) {
        positive = false;
        break;
      }
      const double x = std::log(traj.r[i]), y = std::log(g);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++m;
    }
    if (positive && m >= 2) {
      const double md = static_cast<double>(m);
      const double k = (md * sxy - sx * sy) / (md * sxx - sx * sx);
      const double c = (sy - k * sx) / md;
      rep.tail_exponent = k;
      tail = k < -1.0 ? std::exp(c + k * std::log(R)) * R / (-1.0 - k)
                      : std::numeric_limits<double>::infinity();
    }
  }
  const double total = S.back() + tail;

  double tail_err = 0.0, rep_err = 0.0, origin_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double beyond = total - S[i];
    tail_err = std::max(tail_err, std::abs(traj.q[i] - lambda * beyond));
    if (F_ok) {
      rep_err = std::max(rep_err, std::abs(traj.u[i] - traj.u[0] - lambda * F[i] * beyond - lambda * P[i]));
      const double origin = traj.u[0] + traj.q[0] * (F[i] - F[0]) - lambda * F[i] * S[i] + lambda * P[i];
      origin_err = std::max(origin_err, std::abs(traj.u[i] - origin));
    }
  }
  rep.tail_identity_residual = relative(tail_err, qscale);
  rep.representation_residual = F_ok ? relative(rep_err, uscale) : kNaN;
  rep.origin_representation_residual = F_ok ? relative(origin_err, uscale) : kNaN;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  double balance = 0.0;
  for (int k = 0; k < 10; ++k) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i > j) std::swap(i, j);
    balance = std::max(balance, std::abs(traj.q[j] - traj.q[i] + lambda * (S[j] - S[i])));
  }
  rep.flux_balance_residual = relative(balance, qscale);

  if (!F_ok) {
    rep.hypothesis = "F diverges at r = 0; bound not evaluated";
    return rep;
  }
  try {
    const auto B = boundedness_integral(K, L, tol);
    if (!B.convergent()) {
      rep.hypothesis = "boundedness integral " + numerics::to_string(B.verdict) + "; bound not evaluated";
      return rep;
    }
    rep.boundedness_integral = B.value;
  } catch (const PreconditionFailure& e) {
    rep.hypothesis = e.what();
    return rep;
  }
  try {
    rep.normalization = normalize_trajectory(traj, L, K).second;
  } catch (const PreconditionFailure& e) {
    rep.hypothesis = e.what();
    return rep;
  }
  const double c = rep.normalization;
  rep.bound_evaluated = true;
  rep.bound_value = c * traj.u[0] + lambda * std::sqrt(rep.boundedness_integral);
  const double peak = c * *std::max_element(traj.u.begin(), traj.u.end());
  rep.bound_holds = peak <= rep.bound_value * (1.0 + 1e-6);
  return rep;
}

}  // namespace wplap
