#pragma once

// Beta-evidential heatmap head: evidence transform, Bayes-risk losses with
// focal / Gaussian-discount weighting, the adjusted-evidence KL regularizer
// against Beta(1,1), and closed-form gradients of the combined objective.
//
// All maps are [C x H x D]. Losses are summed over classes and cells (never
// averaged); sums are accumulated in long double so that finite-difference
// checks of whole-grid losses are not dominated by accumulation rounding.

#include <cmath>
#include <cstddef>
#include <utility>

#include "edlbev/error.hpp"
#include "edlbev/specfun.hpp"
#include "edlbev/tensor.hpp"

namespace edlbev {

struct LossConfig {
  double gamma = 2.0;   // focal exponent
  double eta = 4.0;     // Gaussian-discount exponent on (1 - y_soft)
  double lambda = 1e-4; // KL regularizer weight

  void validate() const {
    if (!(gamma >= 0.0) || !(eta >= 0.0) || !(lambda >= 0.0)) {
      throw ConfigError("LossConfig: gamma, eta and lambda must all be >= 0");
    }
  }
};

/// Per-cell, per-class Beta parameters. Head outputs satisfy alpha, beta > 1;
/// adjusted evidence may sit exactly at 1. Any positive value is accepted.
struct EvidenceGrid {
  Tensor3 alpha;
  Tensor3 beta;

  EvidenceGrid() = default;
  EvidenceGrid(Tensor3 a, Tensor3 b) : alpha(std::move(a)), beta(std::move(b)) {
    require_same_shape(alpha.shape(), beta.shape(), "EvidenceGrid");
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (!(alpha[i] > 0.0) || !(beta[i] > 0.0) || !std::isfinite(alpha[i]) || !std::isfinite(beta[i])) {
        throw NumericError("EvidenceGrid: non-positive or non-finite evidence at flat index " + std::to_string(i));
      }
    }
  }
  const Shape3& shape() const noexcept { return alpha.shape(); }
};

/// Binary center indicator y and Gaussian-splatted soft heatmap y_soft.
struct TargetGrid {
  Tensor3 y;
  Tensor3 y_soft;

  TargetGrid() = default;
  TargetGrid(Tensor3 hard, Tensor3 soft) : y(std::move(hard)), y_soft(std::move(soft)) {
    require_same_shape(y.shape(), y_soft.shape(), "TargetGrid");
  }
  explicit TargetGrid(Shape3 shape) : y(shape, 0.0), y_soft(shape, 0.0) {}
  const Shape3& shape() const noexcept { return y.shape(); }
};

struct EvidenceGradient {
  Tensor3 d_alpha;
  Tensor3 d_beta;
};

// ---------------------------------------------------------------------------
// Scalar building blocks (one cell, one class)
// ---------------------------------------------------------------------------

namespace term {

/// Expected cross-entropy under Beta(a, b) for label y.
inline double bayes_risk(double a, double b, double y) {
  const double psi_s = specfun::digamma(a + b);
  double v = 0.0;
  if (y != 0.0) v += y * (psi_s - specfun::digamma(a));
  if (y != 1.0) v += (1.0 - y) * (psi_s - specfun::digamma(b));
  return v;
}

inline double detection(double a, double b, double y, double y_soft, const LossConfig& cfg) {
  const double s = a + b;
  const double p = a / s;
  const double q = b / s; // 1 - p without cancellation
  const double psi_s = specfun::digamma(a + b);
  double v = 0.0;
  if (y != 0.0) {
    v += y * (psi_s - specfun::digamma(a)) * std::pow(q, cfg.gamma);
  }
  if (y != 1.0) {
    v += (1.0 - y) * (psi_s - specfun::digamma(b)) * std::pow(p, cfg.gamma) * std::pow(1.0 - y_soft, cfg.eta);
  }
  return v;
}

inline std::pair<double, double> detection_grad(double a, double b, double y, double y_soft, const LossConfig& cfg) {
  const double s = a + b;
  const double p = a / s;
  const double q = b / s;
  const double s2 = s * s;
  const double psi_s = specfun::digamma(s);
  const double tri_s = specfun::trigamma(s);
  double da = 0.0, db = 0.0;
  if (y != 0.0) {
    const double risk = psi_s - specfun::digamma(a);
    const double focal = std::pow(q, cfg.gamma);
    da += y * (tri_s - specfun::trigamma(a)) * focal;
    db += y * tri_s * focal;
    if (cfg.gamma != 0.0) {
      // d q / d a = -b / s^2, d q / d b = a / s^2
      const double dfocal = cfg.gamma * std::pow(q, cfg.gamma - 1.0);
      da += y * risk * dfocal * (-b / s2);
      db += y * risk * dfocal * (a / s2);
    }
  }
  if (y != 1.0) {
    const double w = (1.0 - y) * std::pow(1.0 - y_soft, cfg.eta);
    if (w != 0.0) {
      const double risk = psi_s - specfun::digamma(b);
      const double focal = std::pow(p, cfg.gamma);
      da += w * tri_s * focal;
      db += w * (tri_s - specfun::trigamma(b)) * focal;
      if (cfg.gamma != 0.0) {
        const double dfocal = cfg.gamma * std::pow(p, cfg.gamma - 1.0);
        da += w * risk * dfocal * (b / s2);
        db += w * risk * dfocal * (-a / s2);
      }
    }
  }
  return {da, db};
}

/// KL( Beta(a, b) || Beta(1, 1) ).
inline double kl_uniform(double a, double b) {
  if (a == 1.0 && b == 1.0) return 0.0;
  const double psi_s = specfun::digamma(a + b);
  return (a - 1.0) * (specfun::digamma(a) - psi_s) + (b - 1.0) * (specfun::digamma(b) - psi_s) -
         specfun::log_beta(a, b);
}

inline std::pair<double, double> kl_uniform_grad(double a, double b) {
  const double tri_s = specfun::trigamma(a + b);
  const double da = (a - 1.0) * specfun::trigamma(a) - (a + b - 2.0) * tri_s;
  const double db = (b - 1.0) * specfun::trigamma(b) - (a + b - 2.0) * tri_s;
  return {da, db};
}

inline double adjusted_alpha(double a, double y) { return y + (1.0 - y) * a; }
inline double adjusted_beta(double b, double y) { return (1.0 - y) + y * b; }

/// Per-entry combined objective: detection term + lambda * KL(adjusted).
inline double combined(double a, double b, double y, double y_soft, const LossConfig& cfg) {
  double v = detection(a, b, y, y_soft, cfg);
  if (cfg.lambda != 0.0) v += cfg.lambda * kl_uniform(adjusted_alpha(a, y), adjusted_beta(b, y));
  return v;
}

inline std::pair<double, double> combined_grad(double a, double b, double y, double y_soft, const LossConfig& cfg) {
  auto [da, db] = detection_grad(a, b, y, y_soft, cfg);
  if (cfg.lambda != 0.0) {
    const auto [ka, kb] = kl_uniform_grad(adjusted_alpha(a, y), adjusted_beta(b, y));
    da += cfg.lambda * (1.0 - y) * ka;
    db += cfg.lambda * y * kb;
  }
  return {da, db};
}

/// Gaussian focal loss on a sigmoid logit (entropy-baseline head) and its
/// derivative with respect to the logit.
inline double gaussian_focal(double logit, double y, double y_soft, const LossConfig& cfg) {
  const double p = specfun::sigmoid(logit);
  const double log_p = -specfun::softplus(-logit);
  const double log_q = -specfun::softplus(logit);
  double v = 0.0;
  if (y != 0.0) v -= y * std::pow(1.0 - p, cfg.gamma) * log_p;
  if (y != 1.0) v -= (1.0 - y) * std::pow(1.0 - y_soft, cfg.eta) * std::pow(p, cfg.gamma) * log_q;
  return v;
}

inline double gaussian_focal_grad(double logit, double y, double y_soft, const LossConfig& cfg) {
  const double p = specfun::sigmoid(logit);
  const double q = specfun::sigmoid(-logit);
  const double log_p = -specfun::softplus(-logit);
  const double log_q = -specfun::softplus(logit);
  double g = 0.0;
  if (y != 0.0) g += y * std::pow(q, cfg.gamma) * (cfg.gamma * p * log_p - q);
  if (y != 1.0) {
    g += (1.0 - y) * std::pow(1.0 - y_soft, cfg.eta) * std::pow(p, cfg.gamma) * (p - cfg.gamma * q * log_q);
  }
  return g;
}

inline double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

} // namespace term

// ---------------------------------------------------------------------------
// Grid operations
// ---------------------------------------------------------------------------

inline EvidenceGrid evidence_from_logits(const Tensor3& e_a, const Tensor3& e_b) {
  require_same_shape(e_a.shape(), e_b.shape(), "evidence_from_logits");
  auto lift = [](double e) { return specfun::softplus(e) + 1.0; };
  return EvidenceGrid(map(e_a, lift), map(e_b, lift));
}

inline Tensor3 predict_prob(const EvidenceGrid& g) {
  Tensor3 p(g.shape());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = g.alpha[i] / (g.alpha[i] + g.beta[i]);
  return p;
}

inline Tensor3 predict_uncertainty(const EvidenceGrid& g) {
  Tensor3 u(g.shape());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0 / (g.alpha[i] + g.beta[i]);
  return u;
}

inline double edl_multilabel_loss(const EvidenceGrid& g, const TargetGrid& t) {
  require_same_shape(g.shape(), t.shape(), "edl_multilabel_loss");
  long double sum = 0.0L;
  for (std::size_t i = 0; i < g.alpha.size(); ++i) sum += term::bayes_risk(g.alpha[i], g.beta[i], t.y[i]);
  return static_cast<double>(sum);
}

inline double edl_detection_loss(const EvidenceGrid& g, const TargetGrid& t, const LossConfig& cfg) {
  require_same_shape(g.shape(), t.shape(), "edl_detection_loss");
  cfg.validate();
  long double sum = 0.0L;
  for (std::size_t i = 0; i < g.alpha.size(); ++i) {
    sum += term::detection(g.alpha[i], g.beta[i], t.y[i], t.y_soft[i], cfg);
  }
  return static_cast<double>(sum);
}

inline EvidenceGrid adjusted_evidence(const EvidenceGrid& g, const TargetGrid& t) {
  require_same_shape(g.shape(), t.shape(), "adjusted_evidence");
  Tensor3 a(g.shape()), b(g.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = term::adjusted_alpha(g.alpha[i], t.y[i]);
    b[i] = term::adjusted_beta(g.beta[i], t.y[i]);
  }
  return EvidenceGrid(std::move(a), std::move(b));
}

inline double kl_regularizer(const EvidenceGrid& adjusted) {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < adjusted.alpha.size(); ++i) sum += term::kl_uniform(adjusted.alpha[i], adjusted.beta[i]);
  return static_cast<double>(sum);
}

inline double combined_loss(const EvidenceGrid& g, const TargetGrid& t, const LossConfig& cfg) {
  const double detection = edl_detection_loss(g, t, cfg);
  if (cfg.lambda == 0.0) return detection;
  return detection + cfg.lambda * kl_regularizer(adjusted_evidence(g, t));
}

inline EvidenceGradient combined_loss_grad(const EvidenceGrid& g, const TargetGrid& t, const LossConfig& cfg) {
  require_same_shape(g.shape(), t.shape(), "combined_loss_grad");
  cfg.validate();
  EvidenceGradient out{Tensor3(g.shape()), Tensor3(g.shape())};
  for (std::size_t i = 0; i < g.alpha.size(); ++i) {
    const auto [da, db] = term::combined_grad(g.alpha[i], g.beta[i], t.y[i], t.y_soft[i], cfg);
    out.d_alpha[i] = da;
    out.d_beta[i] = db;
  }
  return out;
}

/// Per-scene mean of the combined loss; reporting only, training uses sums.
inline double combined_loss_mean(const EvidenceGrid& g, const TargetGrid& t, const LossConfig& cfg) {
  return combined_loss(g, t, cfg) / static_cast<double>(g.alpha.size());
}

inline Tensor3 entropy_score(const Tensor3& p) { return map(p, term::binary_entropy); }

} // namespace edlbev
