#pragma once

#include <cmath>

namespace wplap::testing {

// J_0 from its power series, summed until the terms stop contributing.
inline double bessel_j0(double x) {
  const double q = -0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// First positive zero of J_0 by bisection on a sign change in [2, 3].
inline double bessel_j0_first_zero() {
  double a = 2.0, b = 3.0;
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    const double m = 0.5 * (a + b);
    (bessel_j0(a) * bessel_j0(m) <= 0.0 ? b : a) = m;
  }
  return 0.5 * (a + b);
}

}  // namespace wplap::testing
