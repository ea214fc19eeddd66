#include "wplap/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>

namespace wplap::numerics {

namespace {

// Kronrod 15-point abscissae (descending) and weights; the embedded 7-point
// Gauss rule uses the odd-indexed abscissae.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr int kProbeWindows = 3;
constexpr int kProbeFirstOctave = 20;

enum class Part { finite, tail };

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  Part part;
  bool operator<(const Segment& other) const { return error < other.error; }
};

class Integrator {
 public:
  Integrator(const Integrand& f, double a, double scale, double tail_start)
      : f_(f), a_(a), scale_(scale), tail_start_(tail_start) {}

  // A segment touching a singular end gets error >= |value|: GK cannot see
  // the mass it misses there, so the segment is bisected until it is small.
  Segment rule(double lo, double hi, Part part, bool singular = false) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = eval(center, part);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
      const double dx = half * kXgk[j];
      const double f1 = eval(center - dx, part);
      const double f2 = eval(center + dx, part);
      kronrod += kWgk[j] * (f1 + f2);
      if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    kronrod *= half;
    gauss *= half;
    double err = std::abs(kronrod - gauss);
    if (singular) err = std::max(err, std::abs(kronrod));
    return {lo, hi, kronrod, err, part};
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  // finite part: y in [0, tail_start - a], x = a + y
  // tail part:   sigma in (0, 1], t = tail_start + scale * (1/sigma - 1)
  double eval(double w, Part part) {
    ++evaluations_;
    if (part == Part::finite) {
      const double x = a_ + w;
      return checked(x, f_(x));
    }
    const double t = tail_start_ + scale_ * (1.0 / w - 1.0);
    const double jac = scale_ / (w * w);
    const double fx = checked(t, f_(t));
    if (fx == 0.0) return 0.0;
    return fx * jac;
  }

  static double checked(double x, double v) {
    if (!std::isfinite(v)) throw EvaluationError(x, v);
    return v;
  }

  const Integrand& f_;
  double a_;
  double scale_;
  double tail_start_;
  std::size_t evaluations_ = 0;
};

bool probe_divergent_right(const Integrand& f, double a, double scale,
                           double margin, std::size_t& evals) {
  const double base = std::max(scale, 1.0);
  for (int k = 0; k < kProbeWindows; ++k) {
    const double t0 = base * std::ldexp(1.0, kProbeFirstOctave + 2 * k);
    const double slope = fit_power_exponent([&](double t) { return f(a + t); },
                                            t0, 2.0 * t0);
    evals += 5;
    if (!(slope >= -1.0 - margin)) return false;
  }
  return true;
}

bool probe_divergent_left(const Integrand& f, double a, double length,
                          double margin, std::size_t& evals) {
  for (int k = 0; k < kProbeWindows; ++k) {
    const double d1 = length * std::ldexp(1.0, -kProbeFirstOctave - 2 * k);
    const double d0 = 0.5 * d1;
    if (a + d0 == a) return false;
    const double slope = fit_power_exponent([&](double d) { return f(a + d); },
                                            d0, d1);
    evals += 5;
    // a vanishing integrand near the end is not a singularity
    if (slope == -kInfinity || !(slope <= -1.0 + margin)) return false;
  }
  return true;
}

QuadratureResult divergent_result(Endpoint where, std::size_t evals) {
  QuadratureResult out;
  out.value = std::numeric_limits<double>::quiet_NaN();
  out.error_estimate = kInfinity;
  out.verdict = Verdict::divergent;
  out.evaluations = evals;
  out.divergent_at = where;
  return out;
}

}  // namespace

EvaluationError::EvaluationError(double where, double value)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "integrand evaluated to " << value << " at x = " << where;
        return os.str();
      }()),
      where_(where) {}

double fit_power_exponent(const Integrand& f, double x0, double x1,
                          int samples) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double l0 = std::log(x0);
  const double l1 = std::log(x1);
  for (int i = 0; i < samples; ++i) {
    const double lx = l0 + (l1 - l0) * i / (samples - 1);
    const double v = std::abs(f(std::exp(lx)));
    if (std::isnan(v)) throw EvaluationError(std::exp(lx), v);
    if (v == 0.0) return -kInfinity;
    if (std::isinf(v)) return kInfinity;
    const double ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = samples;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& opts) {
  if (!(opts.tol > 0)) throw std::invalid_argument("integrate: tol must be > 0");
  if (!(b > a) && !(b == a)) {
    throw std::invalid_argument("integrate: require a <= b");
  }
  if (b == a) return {0.0, 0.0, Verdict::convergent, 0, Endpoint::none};

  const bool infinite = std::isinf(b);
  const double scale = a > 0 ? a : 1.0;
  const double tail_start = infinite ? a + scale : b;
  const double finite_len = tail_start - a;

  std::size_t probe_evals = 0;
  if (opts.singular_left &&
      probe_divergent_left(f, a, finite_len, opts.divergence_margin,
                           probe_evals)) {
    return divergent_result(Endpoint::left, probe_evals);
  }
  if (infinite && probe_divergent_right(f, a, scale, opts.divergence_margin,
                                        probe_evals)) {
    return divergent_result(Endpoint::right, probe_evals);
  }

  // Initial partition in working coordinates.
  std::vector<double> finite_cuts = {0.0, finite_len};
  std::vector<double> tail_cuts;
  if (opts.singular_left) {
    for (int k = 1; k <= 30; ++k) finite_cuts.push_back(std::ldexp(finite_len, -k));
  }
  if (infinite) {
    tail_cuts = {0.0, 1.0};
    for (int k = 1; k <= 40; ++k) tail_cuts.push_back(std::ldexp(1.0, -k));
  }
  for (double bp : opts.breakpoints) {
    if (!(bp > a) || !(bp < b)) continue;
    if (bp < tail_start) {
      finite_cuts.push_back(bp - a);
    } else if (infinite && bp > tail_start) {
      tail_cuts.push_back(scale / (bp - tail_start + scale));
    }
  }
  auto normalize = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  normalize(finite_cuts);
  normalize(tail_cuts);

  Integrator rule(f, a, scale, tail_start);
  std::priority_queue<Segment> heap;
  double total = 0.0;
  double total_err = 0.0;
  auto push = [&](const Segment& s) {
    heap.push(s);
    total += s.value;
    total_err += s.error;
  };
  for (std::size_t i = 0; i + 1 < finite_cuts.size(); ++i) {
    push(rule.rule(finite_cuts[i], finite_cuts[i + 1], Part::finite,
                   opts.singular_left && i == 0));
  }
  for (std::size_t i = 0; i + 1 < tail_cuts.size(); ++i) {
    // sigma = 0 is never evaluated: the rule only samples interior nodes.
    push(rule.rule(tail_cuts[i], tail_cuts[i + 1], Part::tail, i == 0));
  }

  auto target = [&] { return std::max(opts.tol, opts.tol * std::abs(total)); };
  bool stuck = false;
  std::size_t iterations = 0;
  while (!(total_err <= target())) {
    if (heap.size() >= opts.max_intervals || !std::isfinite(total) || !std::isfinite(total_err)) {
      stuck = true;
      break;
    }
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo) || !(mid < worst.hi)) {
      stuck = true;
      break;
    }
    heap.pop();
    total -= worst.value;
    total_err -= worst.error;
    const bool at_end = worst.lo == 0.0 && (worst.part == Part::tail || opts.singular_left);
    push(rule.rule(worst.lo, mid, worst.part, at_end));
    push(rule.rule(mid, worst.hi, worst.part));
    if (++iterations % 64 == 0) {
      // resum to keep the running totals from drifting
      auto copy = heap;
      total = 0.0;
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }

  // final exact resummation, smallest contributions first
  std::vector<Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) {
    return std::abs(x.value) < std::abs(y.value);
  });
  total = 0.0;
  total_err = 0.0;
  for (const auto& s : segs) {
    total += s.value;
    total_err += s.error;
  }

  QuadratureResult out;
  out.value = total;
  out.error_estimate = total_err;
  out.evaluations = rule.evaluations() + probe_evals;
  out.verdict = (!stuck && std::isfinite(total) && total_err <= target()) ? Verdict::convergent
                                                  : Verdict::inconclusive;
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::convergent: return "convergent";
    case Verdict::divergent: return "divergent";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::string to_string(Endpoint e) {
  switch (e) {
    case Endpoint::none: return "none";
    case Endpoint::left: return "left";
    case Endpoint::right: return "right";
  }
  return "unknown";
}

}  // namespace wplap::numerics
