#pragma once

// Special functions on the positive real line: log-gamma, digamma, trigamma,
// log-Beta, plus the softplus/sigmoid pair used by the evidence transform.
//
// Digamma and trigamma shift the argument upward with the recurrences
//   psi(x+1)  = psi(x)  + 1/x
//   psi'(x+1) = psi'(x) - 1/x^2
// until x >= 6 and then sum the asymptotic (Bernoulli) expansion. Log-gamma
// uses the same shift followed by the Stirling series.

#include <cmath>
#include <concepts>
#include <numbers>
#include <stdexcept>
#include <string>

namespace edlbev::specfun {

namespace detail {

template <std::floating_point T>
inline void require_positive(T x, const char* fn) {
  if (!(x > T(0))) {
    throw std::domain_error(std::string(fn) + ": argument must be > 0, got " + std::to_string(double(x)));
  }
}

inline constexpr double kShift = 6.0;
inline constexpr double kLogGammaShift = 7.0;

} // namespace detail

template <std::floating_point T>
T digamma(T x) {
  detail::require_positive(x, "digamma");
  T acc = 0;
  while (x < T(detail::kShift)) {
    acc -= T(1) / x;
    x += T(1);
  }
  const T inv = T(1) / x;
  const T inv2 = inv * inv;
  // -sum_{k=1..6} B_{2k} / (2k x^{2k}), Horner in 1/x^2
  const T series =
      inv2 * (T(-1) / 12 +
              inv2 * (T(1) / 120 +
                      inv2 * (T(-1) / 252 + inv2 * (T(1) / 240 + inv2 * (T(-1) / 132 + inv2 * (T(691) / 32760))))));
  return acc + std::log(x) - T(0.5) * inv + series;
}

template <std::floating_point T>
T trigamma(T x) {
  detail::require_positive(x, "trigamma");
  T acc = 0;
  while (x < T(detail::kShift)) {
    acc += T(1) / (x * x);
    x += T(1);
  }
  const T inv = T(1) / x;
  const T inv2 = inv * inv;
  // sum_{k=1..7} B_{2k} / x^{2k+1}
  const T series =
      inv * inv2 *
      (T(1) / 6 +
       inv2 * (T(-1) / 30 +
               inv2 * (T(1) / 42 +
                       inv2 * (T(-1) / 30 + inv2 * (T(5) / 66 + inv2 * (T(-691) / 2730 + inv2 * (T(7) / 6)))))));
  return acc + inv + T(0.5) * inv2 + series;
}

template <std::floating_point T>
T log_gamma(T x) {
  detail::require_positive(x, "log_gamma");
  if (x == T(1) || x == T(2)) {
    return T(0);
  }
  T prod = 1;
  while (x < T(detail::kLogGammaShift)) {
    prod *= x;
    x += T(1);
  }
  const T inv = T(1) / x;
  const T inv2 = inv * inv;
  const T half_log_2pi = T(0.5) * std::log(T(2) * std::numbers::pi_v<T>);
  // sum_{k=1..7} B_{2k} / (2k (2k-1) x^{2k-1})
  const T series =
      inv * (T(1) / 12 +
             inv2 * (T(-1) / 360 +
                     inv2 * (T(1) / 1260 +
                             inv2 * (T(-1) / 1680 +
                                     inv2 * (T(1) / 1188 + inv2 * (T(-691) / 360360 + inv2 * (T(1) / 156)))))));
  T value = (x - T(0.5)) * std::log(x) - x + half_log_2pi + series;
  if (prod != T(1)) {
    value -= std::log(prod);
  }
  return value;
}

template <std::floating_point T>
T log_beta(T a, T b) {
  detail::require_positive(a, "log_beta");
  detail::require_positive(b, "log_beta");
  // Symmetric in (a, b) bit-for-bit: addition is commutative in IEEE arithmetic.
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

template <std::floating_point T>
T softplus(T x) {
  if (x > T(30)) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

template <std::floating_point T>
T sigmoid(T x) {
  if (x >= T(0)) {
    return T(1) / (T(1) + std::exp(-x));
  }
  const T e = std::exp(x);
  return e / (T(1) + e);
}

} // namespace edlbev::specfun
