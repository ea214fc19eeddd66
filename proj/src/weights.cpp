#include "wplap/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wplap {

using numerics::Endpoint;
using numerics::QuadratureOptions;
using numerics::QuadratureResult;
using numerics::Verdict;

namespace {

double eval_profile(const Profile& prof, double r) {
  return std::visit(
      [r](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) {
          if (f.coeff == 0.0) return 0.0;
          return f.coeff * std::pow(r, f.exponent);
        } else if constexpr (std::is_same_v<T, ProductPower>) {
          if (f.coeff == 0.0) return 0.0;
          return f.coeff * std::pow(r, f.a) *
                 std::pow(f.shift + std::pow(r, f.zeta), f.gamma);
        } else {
          if (f.coeff == 0.0) return 0.0;
          return f.coeff * std::exp(-f.rate * r);
        }
      },
      prof);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_of(double c) {
  if (c > 0.0) return std::log(c);
  return c == 0.0 ? -numerics::kInfinity : kNaN;
}

// log of the profile value, computed without forming the value itself
double log_profile(const Profile& prof, double r) {
  const double lr = std::log(r);
  return std::visit(
      [r, lr](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) {
          return log_of(f.coeff) + f.exponent * lr;
        } else if constexpr (std::is_same_v<T, ProductPower>) {
          const double lz = f.zeta * lr;
          double inner;
          if (lz > 30.0 && f.shift >= 0.0) {
            inner = lz + std::log1p(f.shift * std::exp(-lz));
          } else {
            inner = log_of(f.shift + std::exp(lz));
          }
          return log_of(f.coeff) + f.a * lr + f.gamma * inner;
        } else {
          return log_of(f.coeff) - f.rate * r;
        }
      },
      prof);
}

bool profile_positive(const Profile& prof) {
  return std::visit(
      [](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ProductPower>) {
          return f.coeff > 0.0 && f.shift >= 0.0;
        } else {
          return f.coeff > 0.0;
        }
      },
      prof);
}

Profile scale_profile(Profile prof, double c) {
  std::visit([c](auto& f) { f.coeff *= c; }, prof);
  return prof;
}

double log_table(const Table& t, double r) {
  const auto& xs = t.radii;
  const auto& ys = t.values;
  const std::size_t n = xs.size();
  if (n == 1) return std::log(ys[0]);
  const double lr = std::log(r);
  std::size_t i;
  if (r <= xs.front()) {
    i = 0;
  } else if (r >= xs.back()) {
    i = n - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), r) - xs.begin()) - 1;
  }
  const double x0 = std::log(xs[i]), x1 = std::log(xs[i + 1]);
  const double y0 = std::log(ys[i]), y1 = std::log(ys[i + 1]);
  const double slope = (y1 - y0) / (x1 - x0);
  return y0 + slope * (lr - x0);
}

Sign deduce_sign(const WeightFunction::Variant& v) {
  return std::visit(
      [](const auto& f) -> Sign {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Piecewise>) {
          for (const auto& p : f.pieces) {
            if (!profile_positive(p.profile)) return Sign::sign_changing;
          }
          return f.pieces.empty() ? Sign::sign_changing : Sign::strictly_positive;
        } else if constexpr (std::is_same_v<T, Table>) {
          return Sign::strictly_positive;
        } else {
          return profile_positive(Profile{f}) ? Sign::strictly_positive
                                              : Sign::sign_changing;
        }
      },
      v);
}

nlohmann::json profile_to_json(const Profile& prof) {
  return std::visit(
      [](const auto& f) -> nlohmann::json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) {
          return {{"type", "power"}, {"coeff", f.coeff}, {"exponent", f.exponent}};
        } else if constexpr (std::is_same_v<T, ProductPower>) {
          return {{"type", "product_power"}, {"coeff", f.coeff}, {"a", f.a},
                  {"zeta", f.zeta}, {"gamma", f.gamma}, {"shift", f.shift}};
        } else {
          return {{"type", "exponential"}, {"coeff", f.coeff}, {"rate", f.rate}};
        }
      },
      prof);
}

Profile profile_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "power") {
    return Power{j.value("coeff", 1.0), j.at("exponent").get<double>()};
  }
  if (type == "product_power") {
    return ProductPower{j.value("coeff", 1.0), j.value("a", 0.0), j.at("zeta").get<double>(),
                        j.value("gamma", 1.0), j.value("shift", 1.0)};
  }
  if (type == "exponential") {
    return Exponential{j.value("coeff", 1.0), j.value("rate", 1.0)};
  }
  throw InvalidWeight("unknown weight profile type '" + type + "'");
}

}  // namespace

WeightFunction::WeightFunction(Variant v, std::optional<Sign> declared)
    : v_(std::move(v)), sign_(declared.value_or(deduce_sign(v_))) {}

WeightFunction WeightFunction::power(double coeff, double exponent) {
  return WeightFunction(Power{coeff, exponent});
}

WeightFunction WeightFunction::product_power(double coeff, double a, double zeta,
                                             double gamma, double shift) {
  return WeightFunction(ProductPower{coeff, a, zeta, gamma, shift});
}

WeightFunction WeightFunction::exponential(double coeff, double rate) {
  return WeightFunction(Exponential{coeff, rate});
}

WeightFunction WeightFunction::piecewise(std::vector<Piece> pieces) {
  WeightFunction w(Piecewise{std::move(pieces)});
  w.validate();
  return w;
}

WeightFunction WeightFunction::table(std::vector<double> radii, std::vector<double> values) {
  WeightFunction w(Table{std::move(radii), std::move(values)});
  w.validate();
  return w;
}

WeightFunction WeightFunction::indicator(double a, double b) {
  if (!(a > 0.0) || !(b > a)) throw InvalidWeight("indicator requires 0 < a < b");
  return piecewise({{0.0, Power{0.0, 0.0}}, {a, Power{1.0, 0.0}}, {b, Power{0.0, 0.0}}});
}

double WeightFunction::operator()(double r) const {
  return std::visit(
      [r](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Piecewise>) {
          std::size_t i = 0;
          while (i + 1 < f.pieces.size() && f.pieces[i + 1].start <= r) ++i;
          return eval_profile(f.pieces[i].profile, r);
        } else if constexpr (std::is_same_v<T, Table>) {
          return std::exp(log_table(f, r));
        } else {
          return eval_profile(Profile{f}, r);
        }
      },
      v_);
}

double WeightFunction::log_value(double r) const {
  return std::visit(
      [r](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Piecewise>) {
          std::size_t i = 0;
          while (i + 1 < f.pieces.size() && f.pieces[i + 1].start <= r) ++i;
          return log_profile(f.pieces[i].profile, r);
        } else if constexpr (std::is_same_v<T, Table>) {
          return log_table(f, r);
        } else {
          return log_profile(Profile{f}, r);
        }
      },
      v_);
}

std::vector<double> WeightFunction::breakpoints() const {
  std::vector<double> out;
  if (const auto* pw = std::get_if<Piecewise>(&v_)) {
    for (std::size_t i = 1; i < pw->pieces.size(); ++i) out.push_back(pw->pieces[i].start);
  } else if (const auto* t = std::get_if<Table>(&v_)) {
    out = t->radii;
  }
  return out;
}

WeightFunction WeightFunction::scaled(double c) const {
  return std::visit(
      [c](const auto& f) -> WeightFunction {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Piecewise>) {
          Piecewise out = f;
          for (auto& p : out.pieces) p.profile = scale_profile(p.profile, c);
          return WeightFunction(std::move(out));
        } else if constexpr (std::is_same_v<T, Table>) {
          if (!(c > 0.0)) throw InvalidWeight("table weights can only be scaled by c > 0");
          Table out = f;
          for (auto& y : out.values) y *= c;
          return WeightFunction(std::move(out));
        } else {
          return WeightFunction(std::get<T>(scale_profile(Profile{f}, c)));
        }
      },
      v_);
}

void WeightFunction::validate() const {
  if (const auto* pw = std::get_if<Piecewise>(&v_)) {
    if (pw->pieces.empty()) throw InvalidWeight("piecewise weight has no pieces");
    if (pw->pieces.front().start != 0.0) {
      throw InvalidWeight("first piece of a piecewise weight must start at 0");
    }
    for (std::size_t i = 1; i < pw->pieces.size(); ++i) {
      if (!(pw->pieces[i].start > pw->pieces[i - 1].start)) {
        throw InvalidWeight("piecewise breakpoints must be strictly increasing");
      }
    }
  } else if (const auto* t = std::get_if<Table>(&v_)) {
    if (t->radii.empty() || t->radii.size() != t->values.size()) {
      throw InvalidWeight("table needs matching, nonempty radii and values");
    }
    for (std::size_t i = 0; i < t->radii.size(); ++i) {
      if (!(t->radii[i] > 0.0) || !(t->values[i] > 0.0)) {
        throw InvalidWeight("table radii and values must be positive");
      }
      if (i > 0 && !(t->radii[i] > t->radii[i - 1])) {
        throw InvalidWeight("table radii must be strictly increasing");
      }
    }
  }
  if (sign_ == Sign::strictly_positive) {
    double prev = 1.0;
    for (double r : log_grid(1e-8, 1e8, 161)) {
      const double val = (*this)(r);
      // zero reached by underflow of a decaying tail is not a sign violation
      const bool underflow = val == 0.0 && prev > 0.0 && prev < 1e-250;
      if (val > 0.0) prev = val;
      if (!(val > 0.0) && !underflow) {
        std::ostringstream os;
        os << "weight declared strictly positive evaluates to " << val << " at r = " << r;
        throw InvalidWeight(os.str());
      }
    }
  }
}

nlohmann::json to_json(const WeightFunction& w) {
  nlohmann::json j = std::visit(
      [](const auto& f) -> nlohmann::json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Piecewise>) {
          nlohmann::json pieces = nlohmann::json::array();
          for (const auto& p : f.pieces) {
            pieces.push_back({{"start", p.start}, {"profile", profile_to_json(p.profile)}});
          }
          return {{"type", "piecewise"}, {"pieces", pieces}};
        } else if constexpr (std::is_same_v<T, Table>) {
          return {{"type", "table"}, {"radii", f.radii}, {"values", f.values}};
        } else {
          return profile_to_json(Profile{f});
        }
      },
      w.variant());
  j["sign"] = w.strictly_positive() ? "strictly_positive" : "sign_changing";
  return j;
}

WeightFunction weight_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) {
    throw InvalidWeight("weight description must be an object with a 'type' field");
  }
  std::optional<Sign> declared;
  if (j.contains("sign")) {
    const auto s = j.at("sign").get<std::string>();
    if (s == "strictly_positive") {
      declared = Sign::strictly_positive;
    } else if (s == "sign_changing") {
      declared = Sign::sign_changing;
    } else {
      throw InvalidWeight("unknown sign '" + s + "'");
    }
  }
  const std::string type = j.at("type").get<std::string>();
  WeightFunction out;
  try {
    if (type == "piecewise") {
      Piecewise pw;
      for (const auto& p : j.at("pieces")) {
        pw.pieces.push_back({p.at("start").get<double>(), profile_from_json(p.at("profile"))});
      }
      out = WeightFunction(std::move(pw), declared);
    } else if (type == "table") {
      out = WeightFunction(Table{j.at("radii").get<std::vector<double>>(),
                                 j.at("values").get<std::vector<double>>()},
                           declared);
    } else {
      out = std::visit([&](const auto& f) { return WeightFunction(f, declared); },
                       profile_from_json(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidWeight(std::string("malformed weight description: ") + e.what());
  }
  out.validate();
  return out;
}

// ProblemSpec ----------------------------------------------------------------

ProblemSpec ProblemSpec::make(int N, double p, double alpha, WeightFunction L,
                              WeightFunction K, WeightFunction v, WeightFunction w,
                              Truncation truncation) {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be > 1");
  if (!(alpha > -1.0 && alpha < 0.0)) throw std::invalid_argument("alpha must lie in (-1, 0)");
  if (!(truncation.eps > 0.0) || !(truncation.R > truncation.eps) ||
      !std::isfinite(truncation.R)) {
    throw std::invalid_argument("truncation requires 0 < eps < R < inf");
  }
  if (!L.strictly_positive()) throw InvalidWeight("L must be strictly positive");
  ProblemSpec s;
  s.N = N;
  s.p = p;
  s.alpha = alpha;
  s.beta = alpha + 1.0;
  s.p_conj = p / (p - 1.0);
  s.L = std::move(L);
  s.K = std::move(K);
  s.v = std::move(v);
  s.w = std::move(w);
  s.truncation = truncation;
  return s;
}

ProblemSpec ProblemSpec::with_weights(WeightFunction L_new, WeightFunction K_new) const {
  return make(N, p, alpha, std::move(L_new), std::move(K_new), v, w, truncation);
}

ProblemSpec ProblemSpec::with_truncation(Truncation t) const {
  return make(N, p, alpha, L, K, v, w, t);
}

ProblemSpec derived_admissible_family(Truncation t) {
  const auto v = WeightFunction::product_power(1.0, 1.0, 1.0);
  const auto w = WeightFunction::piecewise({{0.0, Power{0.5, -0.5}}, {1.0, Power{0.5, -2.0}}});
  return ProblemSpec::make(2, 2.0, -0.5, v, w.scaled(0.5), v, w, t);
}

ProblemSpec remark_family(double p, int N, double alpha, double zeta,
                          RemarkReading reading, Truncation t) {
  const double beta = alpha + 1.0;
  const auto v = WeightFunction::power(1.0, -p * alpha + zeta);
  Profile near_origin;
  if (reading == RemarkReading::literal) {
    near_origin = ProductPower{1.0, 0.0, p * beta, -1.0, -beta};
  } else {
    near_origin = Power{1.0, -(p * beta - beta)};
  }
  const auto w = WeightFunction::piecewise({{0.0, near_origin}, {1.0, Power{1.0, -(p * beta + 1.0)}}});
  return ProblemSpec::make(N, p, alpha, v, w, v, w, t);
}

// Derived quantities -----------------------------------------------------------

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double l0 = std::log(lo), l1 = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

QuadratureResult compute_G(const ProblemSpec& spec, double r, double tol) {
  if (!(r > 0.0)) throw std::invalid_argument("compute_G: r must be > 0");
  const double p = spec.p;
  const double t_exp = (1.0 - spec.N) / (p - 1.0);
  const double v_exp = -1.0 / (p - 1.0);
  const auto& v = spec.v;
  // in logs, so that v overflowing far out does not truncate a slow tail
  auto integrand = [&](double t) {
    const double lv = v.log_value(t);
    if (std::isnan(lv) || lv == -numerics::kInfinity) {
      std::ostringstream os;
      os << "v must be positive; v(" << t << ") = " << v(t);
      throw InvalidWeight(os.str());
    }
    return std::exp(t_exp * std::log(t) + v_exp * lv);
  };
  QuadratureOptions opts;
  opts.tol = tol;
  opts.breakpoints = v.breakpoints();
  QuadratureResult inner = numerics::integrate(integrand, r, numerics::kInfinity, opts);
  if (!inner.convergent()) return inner;
  const double power = p / spec.p_conj;
  QuadratureResult out = inner;
  out.value = std::pow(inner.value, power);
  out.error_estimate = power * std::pow(inner.value, power - 1.0) * inner.error_estimate;
  return out;
}

namespace {

struct InnerFailure {
  QuadratureResult result;
};

}  // namespace

QuadratureResult embedding_constant(const ProblemSpec& spec, double tol) {
  const double inner_tol = tol * 1e-2;
  auto integrand = [&](double r) {
    const double wr = spec.w(r);
    if (wr == 0.0) return 0.0;
    QuadratureResult g = compute_G(spec, r, inner_tol);
    if (!g.convergent()) throw InnerFailure{g};
    return std::pow(r, spec.N - 1) * wr * g.value;
  };
  QuadratureOptions opts;
  opts.tol = tol;
  opts.singular_left = true;
  opts.breakpoints = spec.w.breakpoints();
  const auto vb = spec.v.breakpoints();
  opts.breakpoints.insert(opts.breakpoints.end(), vb.begin(), vb.end());
  try {
    return numerics::integrate(integrand, 0.0, numerics::kInfinity, opts);
  } catch (const InnerFailure& f) {
    QuadratureResult out = f.result;
    if (out.divergent()) out.divergent_at = Endpoint::right;
    return out;
  }
}

QuadratureResult compute_F(const WeightFunction& L, double r, double tol) {
  if (!(r > 0.0)) throw std::invalid_argument("compute_F: r must be > 0");
  auto integrand = [&](double s) {
    const double Ls = L(s);
    if (!(Ls > 0.0)) {
      std::ostringstream os;
      os << "L must be positive; L(" << s << ") = " << Ls;
      throw InvalidWeight(os.str());
    }
    return 1.0 / (s * Ls);
  };
  QuadratureOptions opts;
  opts.tol = tol;
  opts.singular_left = true;
  opts.breakpoints = L.breakpoints();
  return numerics::integrate(integrand, 0.0, r, opts);
}

QuadratureResult boundedness_integral(const WeightFunction& K, const WeightFunction& L,
                                      double tol) {
  for (double r : log_grid(1e-8, 1e8, 161)) {
    if (K(r) < 0.0) throw PreconditionFailure("boundedness integral requires K >= 0");
  }
  const QuadratureResult F1 = compute_F(L, 1.0, tol);
  if (F1.divergent()) {
    throw PreconditionFailure(
        "hypothesis (r L(r))^{-1} in L^1(0, inf) fails: F diverges at r = 0");
  }
  const double inner_tol = tol * 1e-2;
  auto integrand = [&](double s) {
    const double Ks = K(s);
    if (Ks == 0.0) return 0.0;
    const QuadratureResult F = compute_F(L, s, inner_tol);
    if (!F.convergent()) throw InnerFailure{F};
    return s * F.value * F.value * Ks;
  };
  QuadratureOptions opts;
  opts.tol = tol;
  opts.singular_left = true;
  opts.breakpoints = K.breakpoints();
  try {
    return numerics::integrate(integrand, 0.0, numerics::kInfinity, opts);
  } catch (const InnerFailure& f) {
    return f.result;
  }
}

namespace {

constexpr double kStrictMargin = 1e-12;

void record(std::optional<PointViolation>& worst, PointViolation v) {
  if (!worst || v.severity > worst->severity) worst = std::move(v);
}

std::string describe(const PointViolation& v) {
  std::ostringstream os;
  os << v.check << " fails at r = " << v.r << " (" << v.lhs << " vs " << v.rhs << ")";
  return os.str();
}

}  // namespace

AdmissibilityReport check_admissibility(const ProblemSpec& spec, std::size_t grid_size,
                                        double tol) {
  if (grid_size < 16) throw std::invalid_argument("check_admissibility: grid_size must be >= 16");
  AdmissibilityReport rep;
  const double lo = spec.truncation.eps / 10.0;
  const double hi = spec.truncation.R * 10.0;
  std::vector<double> grid = log_grid(lo, hi, grid_size);
  // endpoint analysis: the power-law regimes past the sampled window
  for (int k = 1; k <= 4; ++k) {
    grid.push_back(lo * std::pow(10.0, -2.0 * k));
    grid.push_back(hi * std::pow(10.0, 2.0 * k));
  }
  std::sort(grid.begin(), grid.end());

  const double p = spec.p;
  // Equality with the strict bound at one isolated sample is a warning;
  // equality at several samples means the bound is not strict.
  std::vector<double> v_ties, w_ties;
  for (double r : grid) {
    const double vr = spec.v(r), wr = spec.w(r), Lr = spec.L(r), Kr = std::abs(spec.K(r));
    const double v_floor = std::pow(r, -p * spec.alpha);
    const double w_ceiling = std::pow(r, -p * spec.beta);

    if (vr < v_floor * (1.0 - kStrictMargin)) {
      rep.v_bound_holds = false;
      record(rep.worst_bound, {"v(r) > r^{-p alpha}", r, vr, v_floor, v_floor / vr - 1.0});
    } else if (vr <= v_floor * (1.0 + kStrictMargin)) {
      v_ties.push_back(r);
    }
    if (!(wr > 0.0)) {
      rep.w_bound_holds = false;
      record(rep.worst_bound, {"w(r) > 0", r, wr, 0.0, 1.0 + std::abs(wr)});
    } else if (wr > w_ceiling * (1.0 + kStrictMargin)) {
      rep.w_bound_holds = false;
      record(rep.worst_bound, {"w(r) < r^{-p beta}", r, wr, w_ceiling, wr / w_ceiling - 1.0});
    } else if (wr >= w_ceiling * (1.0 - kStrictMargin)) {
      w_ties.push_back(r);
    }
    if (Lr < vr * (1.0 - kStrictMargin)) {
      rep.c1_holds = false;
      record(rep.worst_c1, {"L(r) >= v(r)", r, Lr, vr, vr / Lr - 1.0});
    }
    if (Kr > wr * (1.0 + kStrictMargin) || (Kr > 0.0 && !(wr > 0.0))) {
      rep.c1_holds = false;
      const double sev = wr > 0.0 ? Kr / wr - 1.0 : 1.0 + Kr;
      record(rep.worst_c1, {"|K(r)| <= w(r)", r, Kr, wr, sev});
    }
  }

  auto settle_ties = [&](const std::vector<double>& ties, const char* check, bool& holds) {
    if (ties.size() == 1) {
      std::ostringstream os;
      os << check << " holds with equality at r = " << ties.front();
      rep.warnings.push_back(os.str());
    } else if (ties.size() > 1) {
      holds = false;
      record(rep.worst_bound, {check, ties.front(), 1.0, 1.0, 0.0});
    }
  };
  settle_ties(v_ties, "v(r) > r^{-p alpha}", rep.v_bound_holds);
  settle_ties(w_ties, "w(r) < r^{-p beta}", rep.w_bound_holds);

  std::vector<std::string> reasons;
  if (rep.worst_bound) reasons.push_back(describe(*rep.worst_bound));
  if (rep.worst_c1) reasons.push_back(describe(*rep.worst_c1));

  try {
    for (double r : log_grid(spec.truncation.eps, spec.truncation.R,
                             std::min<std::size_t>(grid_size, 24))) {
      const QuadratureResult g = compute_G(spec, r, tol);
      rep.G_curve.emplace_back(r, g.convergent() ? g.value : numerics::kInfinity);
    }
    rep.embedding_constant = embedding_constant(spec, tol);
  } catch (const InvalidWeight& e) {
    rep.embedding_constant = {};
    rep.embedding_constant.verdict = Verdict::inconclusive;
    reasons.push_back(std::string("G undefined: ") + e.what());
  }
  const auto& C = rep.embedding_constant;
  if (C.divergent()) {
    reasons.push_back("embedding integral diverges at " +
                      std::string(C.divergent_at == Endpoint::left ? "r -> 0" : "r -> inf"));
  } else if (!C.convergent() && reasons.empty()) {
    reasons.push_back("embedding integral inconclusive");
  }

  rep.admissible = rep.c1_holds && rep.v_bound_holds && rep.w_bound_holds && C.convergent();
  if (rep.admissible) {
    rep.reason = "admissible";
  } else {
    std::ostringstream os;
    for (std::size_t i = 0; i < reasons.size(); ++i) os << (i ? "; " : "") << reasons[i];
    rep.reason = os.str();
  }
  return rep;
}

}  // namespace wplap
