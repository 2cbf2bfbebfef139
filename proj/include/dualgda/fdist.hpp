#pragma once

#include <cmath>
#include <limits>

#include "dualgda/errors.hpp"

namespace dualgda {

namespace detail {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// Continued fraction for the incomplete beta function, evaluated with the
/// modified Lentz algorithm. Converges quickly for x <= (a+1)/(a+b+2).
inline double incomplete_beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  constexpr int max_terms = 20000;

  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double result = d;

  for (int m = 1; m <= max_terms; ++m) {
    const double dm = static_cast<double>(m);
    // even-step coefficient
    double coeff = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
    d = 1.0 + coeff * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + coeff / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    result *= d * c;
    // odd-step coefficient
    coeff = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
    d = 1.0 + coeff * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + coeff / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    result *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return result;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0) || std::isnan(x)) {
    raise(Errc::DegenerateInput, "regularized_incomplete_beta requires a > 0, b > 0, finite x");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - detail::log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::incomplete_beta_cf(x, a, b) / a;
  }
  return 1.0 - front * detail::incomplete_beta_cf(1.0 - x, b, a) / b;
}

/// Upper-tail (survival) probability of the F(d1, d2) distribution.
/// Computed directly as I_y(d2/2, d1/2) with y = d2 / (d2 + d1 f), which
/// avoids the 1 - CDF cancellation for large f.
inline double f_sf(double f, double d1, double d2) {
  if (!(d1 >= 1.0 && d2 >= 1.0)) {
    raise(Errc::DegenerateInput, "f_sf requires d1 >= 1 and d2 >= 1");
  }
  if (std::isnan(f)) {
    raise(Errc::DegenerateInput, "f_sf requires a finite F statistic");
  }
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double y = d2 / (d2 + d1 * f);
  return regularized_incomplete_beta(y, d2 / 2.0, d1 / 2.0);
}

inline double f_sf(double f, int d1, int d2) {
  return f_sf(f, static_cast<double>(d1), static_cast<double>(d2));
}

}  // namespace dualgda
