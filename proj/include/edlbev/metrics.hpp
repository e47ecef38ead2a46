#pragma once

// ROC / PR curves, precision-recall-F1 and center-distance mAP.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "edlbev/error.hpp"
#include "edlbev/synthbev.hpp"

namespace edlbev::metrics {

struct BinaryScoredSample {
  double score = 0.0;
  bool label = false;
};

struct CurveReport {
  std::vector<std::pair<double, double>> points; // ROC: (fpr, tpr); PR: (recall, precision)
  double auc = 0.0;
};

inline std::vector<BinaryScoredSample> make_samples(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("make_samples: scores and labels differ in length");
  std::vector<BinaryScoredSample> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = {scores[i], labels[i] != 0};
  return out;
}

namespace detail {

inline void check_finite(std::span<const BinaryScoredSample> s) {
  for (const auto& x : s)
    if (!std::isfinite(x.score)) throw NumericError("scored sample with non-finite score");
}

/// Indices sorted by descending score; equal scores form one group.
inline std::vector<std::size_t> descending_order(std::span<const BinaryScoredSample> s) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a].score > s[b].score; });
  return idx;
}

} // namespace detail

/// Area under ROC as the Mann-Whitney statistic with midranks for ties.
/// Curve points step once per distinct score.
inline CurveReport roc_auc(std::span<const BinaryScoredSample> samples) {
  detail::check_finite(samples);
  const std::size_t n_pos = std::count_if(samples.begin(), samples.end(), [](const auto& x) { return x.label; });
  const std::size_t n_neg = samples.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("roc_auc needs at least one positive and one negative sample");

  // Rank sum of positives in ascending order, ties get the average rank.
  std::vector<std::size_t> asc(samples.size());
  std::iota(asc.begin(), asc.end(), 0);
  std::stable_sort(asc.begin(), asc.end(), [&](std::size_t a, std::size_t b) { return samples[a].score < samples[b].score; });
  long double rank_sum = 0.0L;
  for (std::size_t i = 0; i < asc.size();) {
    std::size_t j = i;
    while (j < asc.size() && samples[asc[j]].score == samples[asc[i]].score) ++j;
    const long double midrank = 0.5L * (long double)(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (samples[asc[t]].label) rank_sum += midrank;
    i = j;
  }
  const long double u = rank_sum - (long double)n_pos * (long double)(n_pos + 1) / 2.0L;

  CurveReport r;
  r.auc = double(u / ((long double)n_pos * (long double)n_neg));
  r.points.emplace_back(0.0, 0.0);
  const auto desc = detail::descending_order(samples);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < desc.size();) {
    std::size_t j = i;
    while (j < desc.size() && samples[desc[j]].score == samples[desc[i]].score) {
      (samples[desc[j]].label ? tp : fp) += 1;
      ++j;
    }
    r.points.emplace_back(double(fp) / double(n_neg), double(tp) / double(n_pos));
    i = j;
  }
  return r;
}

/// Average precision: sum over distinct thresholds of (recall step) x
/// (precision at that threshold). Without ties this is the mean of
/// precision@rank over the positives.
inline CurveReport pr_auc(std::span<const BinaryScoredSample> samples) {
  detail::check_finite(samples);
  const std::size_t n_pos = std::count_if(samples.begin(), samples.end(), [](const auto& x) { return x.label; });
  if (n_pos == 0) throw DataError("pr_auc needs at least one positive sample");
  CurveReport r;
  r.points.emplace_back(0.0, 1.0);
  const auto desc = detail::descending_order(samples);
  std::size_t tp = 0, seen = 0;
  long double ap = 0.0L;
  for (std::size_t i = 0; i < desc.size();) {
    std::size_t j = i;
    std::size_t tp_group = 0;
    while (j < desc.size() && samples[desc[j]].score == samples[desc[i]].score) {
      if (samples[desc[j]].label) ++tp_group;
      ++j;
    }
    tp += tp_group;
    seen = j;
    const double precision = double(tp) / double(seen);
    const double recall = double(tp) / double(n_pos);
    ap += (long double)tp_group / (long double)n_pos * precision;
    r.points.emplace_back(recall, precision);
    i = j;
  }
  r.auc = double(ap);
  return r;
}

inline CurveReport roc_auc(const std::vector<BinaryScoredSample>& s) { return roc_auc(std::span<const BinaryScoredSample>(s)); }
inline CurveReport pr_auc(const std::vector<BinaryScoredSample>& s) { return pr_auc(std::span<const BinaryScoredSample>(s)); }

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision with no predictions is 0; recall with nothing to find is 1.
inline PrecisionRecall precision_recall(std::size_t tp, std::size_t n_pred, std::size_t n_true) {
  PrecisionRecall r;
  r.precision = n_pred == 0 ? 0.0 : double(tp) / double(n_pred);
  r.recall = n_true == 0 ? 1.0 : double(tp) / double(n_true);
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

/// Axis-aligned IoU. Degenerate (zero-area) pairs give 0.
inline double iou(const BevBox& a, const BevBox& b) {
  const double iw = std::max(0.0, std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0()));
  const double ih = std::max(0.0, std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0()));
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

inline double center_distance(const BevBox& a, const BevBox& b) { return std::hypot(a.cx - b.cx, a.cy - b.cy); }

struct MapReport {
  double map = 0.0;
  std::vector<double> thresholds;
  std::vector<int> classes;            // classes with at least one GT box
  std::vector<std::vector<double>> ap; // [threshold][class index into `classes`]
};

/// Average precision of one class at one center-distance threshold. Predictions
/// are ranked by score over all scenes (ties keep scene order, then box order)
/// and each takes the nearest unmatched GT of its scene within the threshold.
inline double class_ap(const std::vector<std::vector<BevBox>>& pred, const std::vector<std::vector<BevBox>>& gt, int cls,
                       double threshold) {
  struct Ref {
    double score;
    std::size_t scene, box;
  };
  std::vector<Ref> ranked;
  std::size_t n_gt = 0;
  std::vector<std::vector<char>> used(gt.size());
  for (std::size_t s = 0; s < gt.size(); ++s) {
    used[s].assign(gt[s].size(), 0);
    for (const auto& g : gt[s]) n_gt += g.class_id == cls;
  }
  if (n_gt == 0) return 0.0;
  for (std::size_t s = 0; s < pred.size(); ++s)
    for (std::size_t i = 0; i < pred[s].size(); ++i)
      if (pred[s][i].class_id == cls) ranked.push_back({pred[s][i].score.value_or(0.0), s, i});
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ref& a, const Ref& b) { return a.score > b.score; });

  std::size_t tp = 0;
  long double ap = 0.0L;
  for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
    const auto& p = pred[ranked[rank].scene][ranked[rank].box];
    const auto& g = gt[ranked[rank].scene];
    auto& u = used[ranked[rank].scene];
    std::size_t best = g.size();
    double best_d = threshold;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (u[j] || g[j].class_id != cls) continue;
      const double d = center_distance(p, g[j]);
      if (d <= best_d && (best == g.size() || d < best_d)) {
        best = j;
        best_d = d;
      }
    }
    if (best != g.size()) {
      u[best] = 1;
      ++tp;
      ap += (long double)tp / (long double)(rank + 1);
    }
  }
  return double(ap / (long double)n_gt);
}

/// Mean AP over the classes present in the ground truth and over thresholds.
inline MapReport map_center_distance(const std::vector<std::vector<BevBox>>& pred, const std::vector<std::vector<BevBox>>& gt,
                                     const std::vector<double>& thresholds = {0.5, 1.0, 2.0, 4.0}) {
  if (thresholds.empty()) throw ConfigError("map_center_distance: thresholds must be nonempty");
  if (pred.size() != gt.size()) throw ShapeError("map_center_distance: prediction and GT scene counts differ");
  MapReport r;
  r.thresholds = thresholds;
  for (const auto& scene : gt)
    for (const auto& b : scene)
      if (std::find(r.classes.begin(), r.classes.end(), b.class_id) == r.classes.end()) r.classes.push_back(b.class_id);
  std::sort(r.classes.begin(), r.classes.end());
  if (r.classes.empty()) return r;
  long double sum = 0.0L;
  for (double t : thresholds) {
    auto& row = r.ap.emplace_back();
    for (int c : r.classes) {
      row.push_back(class_ap(pred, gt, c, t));
      sum += row.back();
    }
  }
  r.map = double(sum / (long double)(thresholds.size() * r.classes.size()));
  return r;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline void write_curve_csv(std::ostream& os, const CurveReport& r, const char* x_name, const char* y_name) {
  os << x_name << ',' << y_name << '\n';
  os.precision(17);
  for (const auto& [x, y] : r.points) os << x << ',' << y << '\n';
}

inline nlohmann::json to_json(const PrecisionRecall& r) {
  return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
}

inline nlohmann::json to_json(const MapReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t t = 0; t < r.thresholds.size() && t < r.ap.size(); ++t) {
    nlohmann::json row;
    row["threshold"] = r.thresholds[t];
    for (std::size_t c = 0; c < r.classes.size(); ++c) row["ap"][std::to_string(r.classes[c])] = r.ap[t][c];
    per.push_back(row);
  }
  return {{"map", r.map}, {"thresholds", r.thresholds}, {"per_threshold", per}};
}

} // namespace edlbev::metrics
