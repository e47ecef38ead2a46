#pragma once

// Quadrature references for the closed-form Beta losses. The Beta
// normalizer is itself integrated numerically, so nothing here touches the
// digamma / log-gamma code paths the closed forms rely on.

#include <cmath>

#include "edlbev/quadrature.hpp"

namespace edlbev::oracle {

namespace detail {

inline double log_kernel(double a, double b, double x, double one_minus_x) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log(one_minus_x);
}

// Log-kernel value at the mode (or at 1/2 when the kernel has no interior
// maximum); subtracting it keeps the integrand O(1) for peaked densities.
inline double log_scale(double a, double b) {
  const double x = (a > 1.0 && b > 1.0) ? (a - 1.0) / (a + b - 2.0) : 0.5;
  return log_kernel(a, b, x, 1.0 - x);
}

inline quad::Options tight() {
  quad::Options o;
  o.abs_tol = 1e-11;
  o.rel_tol = 1e-12;
  o.max_intervals = 20000;
  return o;
}

inline double scaled_normalizer(double a, double b, double shift) {
  return quad::integrate_unit([&](double x, double xm) { return std::exp(log_kernel(a, b, x, xm) - shift); }, tight())
      .value;
}

} // namespace detail

/// Integral over (0,1) of x^(a-1) (1-x)^(b-1), i.e. B(a, b).
inline double beta_normalizer(double a, double b) {
  const double shift = detail::log_scale(a, b);
  return detail::scaled_normalizer(a, b, shift) * std::exp(shift);
}

/// E_{p ~ Beta(a,b)} [ -y ln p - (1 - y) ln(1 - p) ].
inline double bayes_risk(double a, double b, double y) {
  const double shift = detail::log_scale(a, b);
  const double z = detail::scaled_normalizer(a, b, shift);
  const auto r = quad::integrate_unit(
      [&](double x, double xm) {
        const double density = std::exp(detail::log_kernel(a, b, x, xm) - shift);
        return (-y * std::log(x) - (1.0 - y) * std::log(xm)) * density;
      },
      detail::tight());
  return r.value / z;
}

/// KL( Beta(a,b) || Beta(1,1) ) = integral of f ln f for the Beta density f.
inline double kl_uniform(double a, double b) {
  const double shift = detail::log_scale(a, b);
  const double log_z = std::log(detail::scaled_normalizer(a, b, shift)) + shift;
  const auto r = quad::integrate_unit(
      [&](double x, double xm) {
        const double log_f = detail::log_kernel(a, b, x, xm) - log_z;
        return std::exp(log_f) * log_f;
      },
      detail::tight());
  return r.value;
}

} // namespace edlbev::oracle
