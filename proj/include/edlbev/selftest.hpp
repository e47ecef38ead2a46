#pragma once

// Oracle checks with fixed tolerances: loss and KL against quadrature, the
// focal-loss reduction identity, finite-difference gradients and special
// function identities. Shared by `edlbev selftest` and the acceptance suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "edlbev/diffnet.hpp"
#include "edlbev/evidential.hpp"
#include "edlbev/oracle.hpp"
#include "edlbev/specfun.hpp"
#include "edlbev/synthbev.hpp"

namespace edlbev::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;     // largest observed error
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string detail;
};

namespace detail {

inline EvidenceGrid single(double a, double b) { return EvidenceGrid(Tensor3({1, 1, 1}, a), Tensor3({1, 1, 1}, b)); }

inline TargetGrid single_target(double y) { return TargetGrid(Tensor3({1, 1, 1}, y), Tensor3({1, 1, 1}, y)); }

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace detail

/// Bayes-risk loss per cell vs quadrature, 100 random (a, b) in [0.5, 20]^2, y in {0, 1}.
inline CheckResult loss_oracle(std::uint64_t seed = 2024, double tol = 1e-6) {
  detail::Stopwatch sw;
  CheckResult r{"loss oracle: closed-form Bayes risk vs quadrature", false, 0.0, tol, 0.0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ev(0.5, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double a = ev(rng), b = ev(rng);
    for (double y : {0.0, 1.0}) {
      const double closed = edl_multilabel_loss(detail::single(a, b), detail::single_target(y));
      r.worst = std::max(r.worst, std::abs(closed - oracle::bayes_risk(a, b, y)));
    }
  }
  r.seconds = sw.seconds();
  r.passed = r.worst < tol;
  r.detail = "200 evaluations";
  return r;
}

/// KL(Beta(a, b) || Beta(1, 1)) vs quadrature on [1, 20]^2; nonnegative; 0 at (1, 1).
inline CheckResult kl_oracle(std::uint64_t seed = 4048, double tol = 1e-6) {
  detail::Stopwatch sw;
  CheckResult r{"KL oracle: closed form vs quadrature", false, 0.0, tol, 0.0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ev(1.0, 20.0);
  bool nonneg = true;
  for (int i = 0; i < 100; ++i) {
    const double a = ev(rng), b = ev(rng);
    const double closed = term::kl_uniform(a, b);
    nonneg = nonneg && closed >= 0.0;
    r.worst = std::max(r.worst, std::abs(closed - oracle::kl_uniform(a, b)));
  }
  const double at_one = term::kl_uniform(1.0, 1.0);
  r.seconds = sw.seconds();
  r.passed = r.worst < tol && nonneg && at_one == 0.0;
  std::ostringstream os;
  os << "nonnegative=" << (nonneg ? "yes" : "no") << " kl(1,1)=" << at_one;
  r.detail = os.str();
  return r;
}

/// Detection loss with gamma = eta = 0 equals the plain Bayes-risk loss.
inline CheckResult reduction_identity(std::uint64_t seed = 99, double tol = 1e-12) {
  detail::Stopwatch sw;
  CheckResult r{"reduction identity: gamma=eta=0 detection loss == multilabel loss", false, 0.0, tol, 0.0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ev(0.5, 30.0), unit(0.0, 1.0);
  const LossConfig cfg{0.0, 0.0, 0.0};
  for (int i = 0; i < 50; ++i) {
    const Shape3 shape{3, 5, 7};
    Tensor3 a(shape), b(shape), y(shape), ys(shape);
    for (std::size_t j = 0; j < a.size(); ++j) {
      a[j] = ev(rng);
      b[j] = ev(rng);
      y[j] = unit(rng) < 0.2 ? 1.0 : 0.0;
      ys[j] = y[j] == 1.0 ? 1.0 : 0.95 * unit(rng);
    }
    const EvidenceGrid g(std::move(a), std::move(b));
    const TargetGrid t(std::move(y), std::move(ys));
    const double ml = edl_multilabel_loss(g, t);
    r.worst = std::max(r.worst, std::abs(edl_detection_loss(g, t, cfg) - ml) / std::abs(ml));
  }
  r.seconds = sw.seconds();
  r.passed = r.worst <= tol;
  r.detail = "50 grids, relative error";
  return r;
}

/// Backprop vs central differences for lambda x gamma x eta on 8x8 worlds.
inline CheckResult gradient_suite(std::uint64_t seed = 11, double tol = 1e-4) {
  detail::Stopwatch sw;
  CheckResult r{"gradient suite: backprop vs central differences", false, 0.0, tol, 0.0, {}};
  WorldConfig w;
  w.rows = w.cols = 8;
  w.features = 5;
  w.classes = 2;
  w.class_mix = {0.6, 0.4};
  w.ood.class_mix = {0.4, 0.6};
  w.class_sizes = {{2.0, 2.0}, {3.0, 2.0}};
  w.objects_min = 1;
  w.objects_max = 3;
  w.seed = seed;
  const auto scenes = generate_scenes(w, {2, 0, 0, 0});
  int configs = 0;
  std::size_t kinks = 0;
  for (double lambda : {0.0, 1e-4, 1e-2}) {
    for (double gamma : {0.0, 2.0}) {
      for (double eta : {0.0, 4.0}) {
        const LossConfig cfg{gamma, eta, lambda};
        for (std::size_t s = 0; s < scenes.size(); ++s) {
          const auto dims = s == 0 ? std::vector<std::size_t>{5, 6, 4} : std::vector<std::size_t>{5, 7, 5, 4};
          auto head = net::init_head(dims, net::HeadKind::Evidential, seed + 17 * std::uint64_t(configs) + s);
          // With zero biases, a unit fed only by dead units sits exactly on the
          // ReLU kink and most of its parameters would be skipped below.
          std::mt19937_64 brng(seed + std::uint64_t(configs));
          std::normal_distribution<double> bn(0.0, 0.1);
          for (auto& layer : head.layers)
            for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = bn(brng);
          const net::Example ex{&scenes[s].features, &scenes[s].target, nullptr};
          std::size_t k = 0;
          r.worst = std::max(r.worst, net::grad_check(head, ex, cfg, seed + std::uint64_t(configs), 200, 1e-5, 1e-6, &k));
          kinks += k;
        }
        ++configs;
      }
    }
  }
  r.seconds = sw.seconds();
  r.passed = r.worst < tol;
  r.detail = std::to_string(configs) + " loss configs x 2 heads, " + std::to_string(kinks) +
             " probes skipped at ReLU kinks";
  return r;
}

/// Digamma / trigamma recurrences on 1000 points and closed-form values.
inline CheckResult special_functions(std::uint64_t seed = 7) {
  detail::Stopwatch sw;
  CheckResult r{"special functions: recurrences and psi(1), psi(1/2), psi'(1)", false, 0.0, 1e-10, 0.0, {}};
  namespace sf = specfun;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(1e-3, 50.0);
  double rec = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = dist(rng);
    rec = std::max(rec, std::abs(sf::digamma(x + 1.0) - sf::digamma(x) - 1.0 / x));
    rec = std::max(rec, std::abs(sf::trigamma(x + 1.0) - sf::trigamma(x) + 1.0 / (x * x)) /
                            std::max(1.0, sf::trigamma(x)));
  }
  const double g = std::numbers::egamma;
  const double vals = std::max({std::abs(sf::digamma(1.0) + g), std::abs(sf::digamma(0.5) + g + 2.0 * std::numbers::ln2),
                                std::abs(sf::trigamma(1.0) - std::numbers::pi * std::numbers::pi / 6.0)});
  r.worst = rec;
  r.seconds = sw.seconds();
  r.passed = rec < 1e-10 && vals < 1e-8;
  std::ostringstream os;
  os << "recurrence residual " << rec << " (< 1e-10), closed-form error " << vals << " (< 1e-8)";
  r.detail = os.str();
  return r;
}

inline std::vector<CheckResult> run_all() {
  return {loss_oracle(), kl_oracle(), reduction_identity(), gradient_suite(), special_functions()};
}

} // namespace edlbev::selftest
