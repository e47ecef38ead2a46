#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature.
//
// integrate_unit() additionally maps (0,1) through the smoothstep
// x = t^2 (3 - 2t), which flattens integrable endpoint singularities such as
// x^(a-1) with a < 1. The integrand receives both x and 1 - x, the latter
// computed as (1-t)^2 (1+2t) so that no precision is lost near x = 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <vector>

namespace edlbev::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

struct Options {
  double abs_tol = 1e-9;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 4000;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the nodes at odd Kronrod positions (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {0.129484966168869693270611432679082,
                                                        0.279705391489276667901467771423780,
                                                        0.381830050505118944950369775488975,
                                                        0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment kronrod15(F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(mid - dx) + f(mid + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) {
      gauss += kGaussWeights[i / 2] * pair;
    }
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

} // namespace detail

/// Integral of f over [a, b]; f must be finite at the 15 interior nodes of
/// every subinterval (the endpoints themselves are never evaluated).
template <class F>
Result integrate(F f, double a, double b, const Options& opt = {}) {
  std::priority_queue<detail::Segment> heap;
  detail::Segment first = detail::kronrod15(f, a, b);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  std::size_t count = 1;
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) && count < opt.max_intervals) {
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Segment left = detail::kronrod15(f, worst.a, mid);
    const detail::Segment right = detail::kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed the drift of the running updates.
  double sum = 0.0, err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, count, err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(sum))};
}

/// Integral over (0, 1) of g(x, 1 - x) with the smoothstep endpoint transform.
template <class G>
Result integrate_unit(G g, const Options& opt = {}) {
  auto transformed = [&g](double t) {
    const double s = 1.0 - t;
    const double x = t * t * (3.0 - 2.0 * t);
    const double one_minus_x = s * s * (1.0 + 2.0 * t);
    const double jacobian = 6.0 * t * s;
    if (x <= 0.0 || one_minus_x <= 0.0) {
      return 0.0;
    }
    return g(x, one_minus_x) * jacobian;
  };
  return integrate(transformed, 0.0, 1.0, opt);
}

} // namespace edlbev::quad
