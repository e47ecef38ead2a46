#pragma once

// Downstream uses of the per-cell uncertainty map: scene-level OOD scores,
// box-level localization-quality scores and the missed-object head.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edlbev/diffnet.hpp"
#include "edlbev/error.hpp"
#include "edlbev/evidential.hpp"
#include "edlbev/metrics.hpp"
#include "edlbev/synthbev.hpp"
#include "edlbev/tensor.hpp"

namespace edlbev::tasks {

struct SceneScore {
  std::string scene_id;
  double score = 0.0; // higher = more uncertain
  Domain domain_truth = Domain::InDistribution;
};

struct ScoredBox {
  BevBox box;
  double u_b = 0.0;
  double best_iou = 0.0;
  bool erroneous = true; // best_iou < tau
};

struct MissCandidate {
  std::size_t row = 0, col = 0;
  int class_id = 0;
  double p_miss = 0.0;
  std::optional<bool> matched;
};

/// Arithmetic mean over all C*H*D entries.
inline double scene_uncertainty(const Tensor3& u) {
  if (u.size() == 0) throw ShapeError("scene_uncertainty: empty map");
  long double s = 0.0L;
  for (double v : u.values()) s += v;
  return double(s / (long double)u.size());
}

/// Class-wise 3x3 local maxima of p above threshold become boxes of the class
/// default size, scored by the peak probability. Among equal neighbors the
/// cell with the smaller (row, col) wins.
inline std::vector<BevBox> decode_boxes(const Tensor3& p, double threshold,
                                        const std::vector<std::array<double, 2>>& class_sizes) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("decode_boxes: threshold must be in (0,1)");
  if (class_sizes.size() != p.channels()) throw ShapeError("decode_boxes: need one default size per class");
  std::vector<BevBox> out;
  const long rows = long(p.rows()), cols = long(p.cols());
  for (std::size_t c = 0; c < p.channels(); ++c) {
    for (long r = 0; r < rows; ++r) {
      for (long k = 0; k < cols; ++k) {
        const double v = p(c, std::size_t(r), std::size_t(k));
        if (!(v > threshold)) continue;
        bool peak = true;
        for (long dr = -1; dr <= 1 && peak; ++dr) {
          for (long dk = -1; dk <= 1; ++dk) {
            if (dr == 0 && dk == 0) continue;
            const long rr = r + dr, kk = k + dk;
            if (rr < 0 || rr >= rows || kk < 0 || kk >= cols) continue;
            const double n = p(c, std::size_t(rr), std::size_t(kk));
            const bool earlier = dr < 0 || (dr == 0 && dk < 0);
            if (earlier ? n >= v : n > v) {
              peak = false;
              break;
            }
          }
        }
        if (!peak) continue;
        BevBox b{double(k), double(r), class_sizes[c][0], class_sizes[c][1], int(c), v, Provenance::Predicted};
        out.push_back(b);
      }
    }
  }
  return out;
}

/// Cells whose centers lie inside the (closed) box, clipped to the grid.
struct Footprint {
  std::size_t r0 = 0, r1 = 0, k0 = 0, k1 = 0; // half-open ranges
  std::size_t cells() const { return (r1 - r0) * (k1 - k0); }
};

inline Footprint footprint(const BevBox& b, std::size_t rows, std::size_t cols) {
  const double lo_r = std::ceil(b.cy - 0.5 * b.h), hi_r = std::floor(b.cy + 0.5 * b.h);
  const double lo_k = std::ceil(b.cx - 0.5 * b.w), hi_k = std::floor(b.cx + 0.5 * b.w);
  Footprint f;
  f.r0 = std::size_t(std::clamp(lo_r, 0.0, double(rows)));
  f.r1 = std::size_t(std::clamp(hi_r + 1.0, 0.0, double(rows)));
  f.k0 = std::size_t(std::clamp(lo_k, 0.0, double(cols)));
  f.k1 = std::size_t(std::clamp(hi_k + 1.0, 0.0, double(cols)));
  if (f.r1 < f.r0) f.r1 = f.r0;
  if (f.k1 < f.k0) f.k1 = f.k0;
  return f;
}

/// Per class, mean of u over the footprint cells; minimum over classes.
inline double box_uncertainty(const Tensor3& u, const BevBox& box) {
  const Footprint f = footprint(box, u.rows(), u.cols());
  if (f.cells() == 0) throw DataError("box_uncertainty: box footprint covers no cell");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < u.channels(); ++c) {
    long double s = 0.0L;
    for (std::size_t r = f.r0; r < f.r1; ++r)
      for (std::size_t k = f.k0; k < f.k1; ++k) s += u(c, r, k);
    best = std::min(best, double(s / (long double)f.cells()));
  }
  return best;
}

/// best_iou against same-class GT (0 if none); erroneous = best_iou < tau.
inline std::vector<ScoredBox> label_box_errors(const std::vector<BevBox>& pred, const std::vector<BevBox>& gt,
                                               double tau = 0.3) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("label_box_errors: tau must be in [0,1]");
  std::vector<ScoredBox> out;
  out.reserve(pred.size());
  for (const auto& p : pred) {
    ScoredBox s{p, 0.0, 0.0, true};
    for (const auto& g : gt)
      if (g.class_id == p.class_id) s.best_iou = std::max(s.best_iou, metrics::iou(p, g));
    s.erroneous = s.best_iou < tau;
    out.push_back(s);
  }
  return out;
}

/// label_box_errors plus u_b from the given uncertainty map.
inline std::vector<ScoredBox> score_boxes(const Tensor3& u, const std::vector<BevBox>& pred,
                                          const std::vector<BevBox>& gt, double tau = 0.3) {
  auto out = label_box_errors(pred, gt, tau);
  for (auto& s : out) s.u_b = box_uncertainty(u, s.box);
  return out;
}

/// GT boxes with no same-class prediction overlapping them at all.
inline std::vector<BevBox> missed_ground_truth(const std::vector<BevBox>& pred, const std::vector<BevBox>& gt) {
  std::vector<BevBox> out;
  for (const auto& g : gt) {
    const bool hit = std::any_of(pred.begin(), pred.end(),
                                 [&](const BevBox& p) { return p.class_id == g.class_id && metrics::iou(p, g) > 0.0; });
    if (!hit) out.push_back(g);
  }
  return out;
}

/// Every (cell, class) with p < gate, in (row, col, class) order.
inline std::vector<MissCandidate> miss_candidates(const Tensor3& p, double gate = 0.05) {
  if (!(gate > 0.0 && gate < 1.0)) throw ConfigError("miss_candidates: gate must be in (0,1)");
  std::vector<MissCandidate> out;
  for (std::size_t r = 0; r < p.rows(); ++r)
    for (std::size_t k = 0; k < p.cols(); ++k)
      for (std::size_t c = 0; c < p.channels(); ++c)
        if (p(c, r, k) < gate) out.push_back({r, k, int(c), 0.0, std::nullopt});
  return out;
}

/// Same gate as a {0,1} mask [C x H x D], used to restrict missed-head training.
inline Tensor3 gate_mask(const Tensor3& p, double gate = 0.05) {
  Tensor3 m(p.shape(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = p[i] < gate ? 1.0 : 0.0;
  return m;
}

/// Per-cell input of the missed-object head: features, then the C
/// probability channels, then the C uncertainty channels.
inline Tensor3 miss_head_inputs(const Tensor3& e, const Tensor3& p, const Tensor3& u) {
  require_same_shape(p.shape(), u.shape(), "miss_head_inputs");
  if (e.rows() != p.rows() || e.cols() != p.cols()) throw ShapeError("miss_head_inputs: grid sizes differ");
  const std::size_t f = e.channels(), c = p.channels();
  Tensor3 x({f + 2 * c, e.rows(), e.cols()});
  auto dst = x.values();
  const std::size_t cells = e.shape().cells();
  std::copy(e.values().begin(), e.values().end(), dst.begin());
  std::copy(p.values().begin(), p.values().end(), dst.begin() + std::ptrdiff_t(f * cells));
  std::copy(u.values().begin(), u.values().end(), dst.begin() + std::ptrdiff_t((f + c) * cells));
  return x;
}

/// p_miss = alpha / (alpha + beta) of the missed-object head.
inline Tensor3 miss_head_forward(const net::HeadParameters& m, const Tensor3& e, const Tensor3& p, const Tensor3& u) {
  if (m.kind != net::HeadKind::Evidential) throw ConfigError("miss_head_forward: head must be evidential");
  if (m.in_dim() != e.channels() + 2 * p.channels()) {
    throw ShapeError("miss_head_forward: head input " + std::to_string(m.in_dim()) + " != F + 2C = " +
                     std::to_string(e.channels() + 2 * p.channels()));
  }
  return predict_prob(net::predict_evidence(m, miss_head_inputs(e, p, u)));
}

struct MissSelection {
  std::size_t selected = 0;
  std::size_t matches = 0;
  std::size_t missed = 0;
  metrics::PrecisionRecall pr;
  std::vector<MissCandidate> picks; // with `matched` filled in
};

/// Orders candidates by descending score, ties toward smaller (row, col, class).
inline void rank_candidates(std::vector<MissCandidate>& c) {
  std::stable_sort(c.begin(), c.end(), [](const MissCandidate& a, const MissCandidate& b) {
    if (a.p_miss != b.p_miss) return a.p_miss > b.p_miss;
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.class_id < b.class_id;
  });
}

/// Top-k candidates by p_miss; each takes the nearest unmatched missed GT
/// center within distance d (grid units). Candidates must carry p_miss.
inline MissSelection select_missed(std::vector<MissCandidate> candidates, std::size_t k,
                                   const std::vector<BevBox>& missed_gt, double d) {
  if (k < 1) throw ConfigError("select_missed: k must be >= 1");
  if (!(d > 0.0)) throw ConfigError("select_missed: d must be > 0");
  rank_candidates(candidates);
  if (candidates.size() > k) candidates.resize(k);
  std::vector<char> used(missed_gt.size(), 0);
  MissSelection s;
  s.missed = missed_gt.size();
  s.selected = candidates.size();
  for (auto& c : candidates) {
    std::size_t best = missed_gt.size();
    double best_d = d;
    for (std::size_t j = 0; j < missed_gt.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::hypot(double(c.col) - missed_gt[j].cx, double(c.row) - missed_gt[j].cy);
      if (dist <= best_d && (best == missed_gt.size() || dist < best_d)) {
        best = j;
        best_d = dist;
      }
    }
    c.matched = best != missed_gt.size();
    if (*c.matched) {
      used[best] = 1;
      ++s.matches;
    }
  }
  s.picks = std::move(candidates);
  s.pr = metrics::precision_recall(s.matches, s.selected, s.missed);
  return s;
}

/// Fills p_miss of each candidate from a score map [C x H x D].
inline void assign_scores(std::vector<MissCandidate>& c, const Tensor3& score) {
  for (auto& m : c) m.p_miss = score(std::size_t(m.class_id), m.row, m.col);
}

/// Sums per-scene selections into one precision / recall / F1.
inline MissSelection pool(const std::vector<MissSelection>& per_scene) {
  MissSelection t;
  for (const auto& s : per_scene) {
    t.selected += s.selected;
    t.matches += s.matches;
    t.missed += s.missed;
  }
  t.pr = metrics::precision_recall(t.matches, t.selected, t.missed);
  return t;
}

// ---------------------------------------------------------------------------
// JSONL records
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SceneScore& s) {
  return {{"scene_id", s.scene_id}, {"score", s.score}, {"domain", to_string(s.domain_truth)}};
}

inline nlohmann::json to_json(const ScoredBox& s) {
  return {{"box", box_to_json(s.box, true)}, {"u_b", s.u_b}, {"best_iou", s.best_iou}, {"erroneous", s.erroneous}};
}

inline nlohmann::json to_json(const MissCandidate& c) {
  nlohmann::json j{{"row", c.row}, {"col", c.col}, {"class_id", c.class_id}, {"p_miss", c.p_miss}};
  if (c.matched) j["matched"] = *c.matched;
  return j;
}

} // namespace edlbev::tasks
