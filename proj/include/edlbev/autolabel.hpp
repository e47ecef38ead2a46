#pragma once

// Auto-labeling with uncertainty-driven verification, and its two
// baselines, on the synthetic world. The human annotator is simulated by
// ground-truth lookup.
//
//   R: train on the first n labeled scenes, evaluate.
//   P: R's model pseudo-labels every other training scene; retrain from
//      scratch on real + pseudo labels, evaluate.
//   U: train on n - s scenes, pseudo-label the rest, then spend the label
//      budget on (1) relabeling the most uncertain scenes, (2) checking the
//      most uncertain pseudo boxes and (3) inspecting the top missed-object
//      locations; retrain from scratch on the corrected set, evaluate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edlbev/experiment.hpp"
#include "edlbev/metrics.hpp"
#include "edlbev/synthbev.hpp"
#include "edlbev/tasks.hpp"

namespace edlbev::autolabel {

enum class Variant { R, P, U };

inline const char* to_string(Variant v) {
  switch (v) {
  case Variant::R: return "Nk-R";
  case Variant::P: return "Nk-P";
  case Variant::U: return "Nk-U";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "R" || s == "Nk-R") return Variant::R;
  if (s == "P" || s == "Nk-P") return Variant::P;
  if (s == "U" || s == "Nk-U") return Variant::U;
  throw ConfigError("unknown variant '" + s + "' (expected R, P or U)");
}

struct BudgetPlan {
  std::size_t total_labels = 0;
  std::size_t scene_relabels = 0; // in labels (a scene costs its GT count, at least 1)
  std::size_t box_verifications = 0;
  std::size_t missed_labels = 0;

  /// Equal thirds; the remainder goes to scenes, then boxes, then missed.
  static BudgetPlan equal_split(std::size_t total) {
    BudgetPlan b{total, total / 3, total / 3, total / 3};
    std::size_t rest = total - 3 * (total / 3);
    for (std::size_t* slot : {&b.scene_relabels, &b.box_verifications, &b.missed_labels}) {
      if (rest == 0) break;
      ++*slot;
      --rest;
    }
    return b;
  }

  std::size_t allocated() const { return scene_relabels + box_verifications + missed_labels; }

  void validate() const {
    if (allocated() > total_labels) throw ConfigError("BudgetPlan: per-category budgets exceed total_labels");
  }
};

struct BudgetSpent {
  std::size_t scene_labels = 0;
  std::size_t scenes_relabeled = 0;
  std::size_t boxes_checked = 0;
  std::size_t boxes_replaced = 0;
  std::size_t boxes_removed = 0;
  std::size_t missed_inspected = 0;
  std::size_t missed_added = 0;

  std::size_t total() const { return scene_labels + boxes_checked + missed_inspected; }
};

struct Config {
  std::size_t n_labeled = 100;
  std::size_t holdback = 10; // s: scenes U gives up from the labeled set
  BudgetPlan budget = BudgetPlan::equal_split(900);
  double pseudo_threshold = 0.3; // decode threshold for pseudo labels
  bool relabel_excludes_other_pools = true;

  void validate() const {
    if (n_labeled < 1) throw ConfigError("autolabel.n_labeled must be >= 1");
    budget.validate();
    if (!(pseudo_threshold > 0.0 && pseudo_threshold < 1.0)) {
      throw ConfigError("autolabel.pseudo_threshold must be in (0,1)");
    }
  }
};

/// Scenes available to the pipeline. `labeled` are scenes whose labels may
/// be used for training (the first n of them are); `unlabeled` only ever
/// reach the trainer through pseudo labels or the oracle.
struct World {
  WorldConfig cfg;
  std::vector<SyntheticScene> labeled;
  std::vector<SyntheticScene> unlabeled;
  std::vector<SyntheticScene> test;
};

inline World make_world(const WorldConfig& cfg, std::size_t labeled, std::size_t unlabeled, std::size_t test) {
  World w{cfg, {}, {}, {}};
  for (auto& s : generate_scenes(cfg, {labeled, test, 0, unlabeled})) {
    if (s.split == Split::Train) w.labeled.push_back(std::move(s));
    else if (s.split == Split::Test) w.test.push_back(std::move(s));
    else w.unlabeled.push_back(std::move(s));
  }
  return w;
}

struct SceneLabels {
  std::string scene_id;
  std::vector<BevBox> boxes;
};

struct PipelineRun {
  Variant variant = Variant::R;
  std::size_t n_labeled = 0;
  std::uint64_t seed = 0;
  metrics::MapReport map;
  BudgetSpent spent;
  std::size_t pseudo_scenes = 0;
  std::size_t label_errors_before = 0; // over the pseudo-labeled scenes
  std::size_t label_errors_after = 0;
  std::vector<SceneLabels> labels; // final labels of the pseudo-labeled scenes
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Label bookkeeping
// ---------------------------------------------------------------------------

/// Greedy same-class matching with IoU >= tau, pairs taken by descending IoU
/// (ties by label index, then GT index). Returns, per label, the matched GT
/// index or -1.
inline std::vector<long> match_labels(const std::vector<BevBox>& labels, const std::vector<BevBox>& gt, double tau) {
  struct Pair {
    double iou;
    std::size_t l, g;
  };
  std::vector<Pair> pairs;
  for (std::size_t l = 0; l < labels.size(); ++l)
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (labels[l].class_id != gt[g].class_id) continue;
      const double v = metrics::iou(labels[l], gt[g]);
      if (v >= tau && v > 0.0) pairs.push_back({v, l, g});
    }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.iou > b.iou; });
  std::vector<long> out(labels.size(), -1);
  std::vector<char> g_used(gt.size(), 0);
  for (const auto& p : pairs) {
    if (out[p.l] != -1 || g_used[p.g]) continue;
    out[p.l] = long(p.g);
    g_used[p.g] = 1;
  }
  return out;
}

/// Unmatched labels plus unmatched GT boxes.
inline std::size_t label_errors(const std::vector<BevBox>& labels, const std::vector<BevBox>& gt, double tau = 0.3) {
  const auto m = match_labels(labels, gt, tau);
  const std::size_t matched = std::size_t(std::count_if(m.begin(), m.end(), [](long x) { return x >= 0; }));
  return (labels.size() - matched) + (gt.size() - matched);
}

/// Ground-truth lookup standing in for the human annotator.
class OracleAnnotator {
public:
  explicit OracleAnnotator(double tau) : tau_(tau) {}

  /// Full relabel: the scene's GT boxes.
  std::vector<BevBox> relabel(const SyntheticScene& s) const {
    auto out = s.objects;
    for (auto& b : out) b.provenance = Provenance::Verified;
    return out;
  }

  /// Checks label i: a label matched to a GT becomes that GT; an unmatched
  /// label becomes an overlapping GT nobody else covers, or is removed.
  /// Returns true when the label was replaced, false when removed.
  bool verify_box(std::vector<BevBox>& labels, std::size_t i, const SyntheticScene& s) const {
    const auto m = match_labels(labels, s.objects, tau_);
    if (m[i] >= 0) {
      labels[i] = s.objects[std::size_t(m[i])];
      labels[i].provenance = Provenance::Verified;
      return true;
    }
    std::vector<char> covered(s.objects.size(), 0);
    for (long g : m)
      if (g >= 0) covered[std::size_t(g)] = 1;
    std::size_t best = s.objects.size();
    double best_iou = 0.0;
    for (std::size_t g = 0; g < s.objects.size(); ++g) {
      if (covered[g]) continue;
      const double v = metrics::iou(labels[i], s.objects[g]);
      if (v > best_iou) {
        best_iou = v;
        best = g;
      }
    }
    if (best == s.objects.size()) {
      labels.erase(labels.begin() + std::ptrdiff_t(i));
      return false;
    }
    labels[i] = s.objects[best];
    labels[i].provenance = Provenance::Verified;
    return true;
  }

  /// Inspects a location: adds the nearest uncovered GT whose center is
  /// within d, if any.
  bool inspect_location(std::vector<BevBox>& labels, std::size_t row, std::size_t col, double d,
                        const SyntheticScene& s) const {
    const auto m = match_labels(labels, s.objects, tau_);
    std::vector<char> covered(s.objects.size(), 0);
    for (long g : m)
      if (g >= 0) covered[std::size_t(g)] = 1;
    std::size_t best = s.objects.size();
    double best_d = d;
    for (std::size_t g = 0; g < s.objects.size(); ++g) {
      if (covered[g]) continue;
      const double dist = std::hypot(double(col) - s.objects[g].cx, double(row) - s.objects[g].cy);
      if (dist <= best_d && (best == s.objects.size() || dist < best_d)) {
        best = g;
        best_d = dist;
      }
    }
    if (best == s.objects.size()) return false;
    BevBox b = s.objects[best];
    b.provenance = Provenance::Verified;
    labels.push_back(b);
    return true;
  }

private:
  double tau_;
};

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct Settings {
  experiment::ModelConfig model;
  experiment::TaskConfig task;
  Config autolabel;
};

inline metrics::MapReport evaluate_map(const net::HeadParameters& head, const World& w, const experiment::TaskConfig& t) {
  std::vector<std::vector<BevBox>> pred, gt;
  pred.reserve(w.test.size());
  gt.reserve(w.test.size());
  for (const auto& s : w.test) {
    pred.push_back(tasks::decode_boxes(net::predict_probability(head, s.features), t.gate, w.cfg.class_sizes));
    gt.push_back(s.objects);
  }
  return metrics::map_center_distance(pred, gt, t.thresholds);
}

namespace detail {

/// A scene that enters training through labels other than its own GT.
struct PseudoScene {
  const SyntheticScene* scene;
  std::vector<BevBox> labels;
  TargetGrid target;
  bool relabeled = false;
};

inline std::vector<const SyntheticScene*> first_n(const World& w, std::size_t n) {
  std::vector<const SyntheticScene*> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(&w.labeled[i]);
  return out;
}

inline std::vector<const SyntheticScene*> rest_after(const World& w, std::size_t n) {
  std::vector<const SyntheticScene*> out;
  for (std::size_t i = n; i < w.labeled.size(); ++i) out.push_back(&w.labeled[i]);
  for (const auto& s : w.unlabeled) out.push_back(&s);
  return out;
}

inline std::vector<PseudoScene> pseudo_label(const net::HeadParameters& head,
                                             const std::vector<const SyntheticScene*>& scenes, const World& w,
                                             double threshold) {
  std::vector<PseudoScene> out;
  out.reserve(scenes.size());
  for (const auto* s : scenes) {
    auto boxes = tasks::decode_boxes(net::predict_probability(head, s->features), threshold, w.cfg.class_sizes);
    for (auto& b : boxes) {
      b.provenance = Provenance::Pseudo;
      b.score.reset();
    }
    out.push_back({s, std::move(boxes), {}, false});
  }
  return out;
}

inline net::HeadParameters retrain(const std::vector<const SyntheticScene*>& real, std::vector<PseudoScene>& pseudo,
                                   const World& w, const Settings& st, std::uint64_t seed) {
  std::vector<net::Example> data = experiment::examples(real);
  for (auto& p : pseudo) {
    p.target = splat_targets(p.labels, w.cfg);
    data.push_back({&p.scene->features, &p.target, nullptr});
  }
  return experiment::train_detector(data, w.cfg.features, w.cfg.classes, net::HeadKind::Evidential, st.model, seed);
}

inline std::size_t count_errors(const std::vector<PseudoScene>& pseudo, double tau) {
  std::size_t e = 0;
  for (const auto& p : pseudo) e += label_errors(p.labels, p.scene->objects, tau);
  return e;
}

inline std::vector<SceneLabels> export_labels(const std::vector<PseudoScene>& pseudo) {
  std::vector<SceneLabels> out;
  out.reserve(pseudo.size());
  for (const auto& p : pseudo) out.push_back({p.scene->scene_id, p.labels});
  return out;
}

inline void check_n(const World& w, std::size_t n) {
  if (n == 0) throw ConfigError("autolabel: n_labeled must be >= 1");
  if (n > w.labeled.size()) {
    throw DataError("autolabel: n_labeled = " + std::to_string(n) + " exceeds the labeled pool of " +
                    std::to_string(w.labeled.size()) + " scenes");
  }
}

} // namespace detail

inline PipelineRun run_baseline_r(const World& w, const Settings& st, std::uint64_t seed) {
  const std::size_t n = st.autolabel.n_labeled;
  detail::check_n(w, n);
  const auto data = experiment::examples(detail::first_n(w, n));
  const auto head =
      experiment::train_detector(data, w.cfg.features, w.cfg.classes, net::HeadKind::Evidential, st.model, seed);
  PipelineRun run;
  run.variant = Variant::R;
  run.n_labeled = n;
  run.seed = seed;
  run.map = evaluate_map(head, w, st.task);
  return run;
}

inline PipelineRun run_baseline_p(const World& w, const Settings& st, std::uint64_t seed) {
  const std::size_t n = st.autolabel.n_labeled;
  detail::check_n(w, n);
  const auto real = detail::first_n(w, n);
  const auto head = experiment::train_detector(experiment::examples(real), w.cfg.features, w.cfg.classes,
                                               net::HeadKind::Evidential, st.model, seed);
  PipelineRun run;
  run.variant = Variant::P;
  run.n_labeled = n;
  run.seed = seed;
  auto pseudo = detail::pseudo_label(head, detail::rest_after(w, n), w, st.autolabel.pseudo_threshold);
  run.pseudo_scenes = pseudo.size();
  if (pseudo.empty()) {
    run.map = evaluate_map(head, w, st.task);
    return run;
  }
  run.label_errors_before = run.label_errors_after = detail::count_errors(pseudo, st.task.tau);
  run.labels = detail::export_labels(pseudo);
  run.map = evaluate_map(detail::retrain(real, pseudo, w, st, seed), w, st.task);
  return run;
}

inline PipelineRun run_ours_u(const World& w, const Settings& st, std::uint64_t seed) {
  const std::size_t n = st.autolabel.n_labeled;
  detail::check_n(w, n);
  if (n < 2) throw ConfigError("Nk-U needs n_labeled >= 2");
  const std::size_t s_back = std::min(st.autolabel.holdback, n - 1);
  const auto real = detail::first_n(w, n - s_back);
  const auto& task = st.task;
  const auto head = experiment::train_detector(experiment::examples(real), w.cfg.features, w.cfg.classes,
                                               net::HeadKind::Evidential, st.model, seed);

  PipelineRun run;
  run.variant = Variant::U;
  run.n_labeled = n;
  run.seed = seed;
  if (s_back != st.autolabel.holdback) run.warnings.push_back("holdback clipped to n_labeled - 1");

  auto pseudo = detail::pseudo_label(head, detail::rest_after(w, n - s_back), w, st.autolabel.pseudo_threshold);
  run.pseudo_scenes = pseudo.size();
  run.label_errors_before = detail::count_errors(pseudo, task.tau);
  const OracleAnnotator oracle(task.tau);
  const BudgetPlan& budget = st.autolabel.budget;

  std::vector<experiment::EvidentialMaps> maps;
  maps.reserve(pseudo.size());
  for (const auto& p : pseudo) maps.push_back(experiment::evidential_maps(head, p.scene->features));

  // (1) whole-scene relabels, most uncertain scenes first.
  {
    std::vector<std::size_t> order(pseudo.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> score(pseudo.size());
    for (std::size_t i = 0; i < pseudo.size(); ++i) score[i] = tasks::scene_uncertainty(maps[i].u);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    std::size_t left = budget.scene_relabels;
    for (std::size_t i : order) {
      const std::size_t cost = std::max<std::size_t>(1, pseudo[i].scene->objects.size());
      if (cost > left) continue;
      left -= cost;
      pseudo[i].labels = oracle.relabel(*pseudo[i].scene);
      pseudo[i].relabeled = true;
      run.spent.scene_labels += cost;
      ++run.spent.scenes_relabeled;
    }
    if (run.spent.scenes_relabeled == pseudo.size() && left > 0) {
      run.warnings.push_back("scene budget exceeds the pseudo-labeled scenes; clipped");
    }
  }
  auto in_pool = [&](const detail::PseudoScene& p) { return !(st.autolabel.relabel_excludes_other_pools && p.relabeled); };

  // (2) box verification, highest u_b first.
  {
    struct Ref {
      double u_b;
      std::size_t scene;
      BevBox box;
    };
    std::vector<Ref> refs;
    for (std::size_t i = 0; i < pseudo.size(); ++i) {
      if (!in_pool(pseudo[i])) continue;
      for (const auto& b : pseudo[i].labels)
        if (b.provenance == Provenance::Pseudo) refs.push_back({tasks::box_uncertainty(maps[i].u, b), i, b});
    }
    std::stable_sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) { return a.u_b > b.u_b; });
    const std::size_t take = std::min(refs.size(), budget.box_verifications);
    if (take < budget.box_verifications) run.warnings.push_back("box budget exceeds the pseudo boxes; clipped");
    for (std::size_t j = 0; j < take; ++j) {
      auto& labels = pseudo[refs[j].scene].labels;
      const auto it = std::find_if(labels.begin(), labels.end(), [&](const BevBox& b) {
        return b.provenance == Provenance::Pseudo && b.cx == refs[j].box.cx && b.cy == refs[j].box.cy &&
               b.class_id == refs[j].box.class_id;
      });
      ++run.spent.boxes_checked;
      if (it == labels.end()) continue;
      if (oracle.verify_box(labels, std::size_t(it - labels.begin()), *pseudo[refs[j].scene].scene)) {
        ++run.spent.boxes_replaced;
      } else {
        ++run.spent.boxes_removed;
      }
    }
  }

  // (3) missed-object locations, highest p_miss first, pooled over scenes.
  if (budget.missed_labels > 0) {
    const auto miss = experiment::train_miss_head(head, real, w.cfg.features, w.cfg.classes, st.model, task.gate, seed);
    struct Loc {
      double p;
      std::size_t scene, row, col;
      int cls;
    };
    std::vector<Loc> locs;
    for (std::size_t i = 0; i < pseudo.size(); ++i) {
      if (!in_pool(pseudo[i])) continue;
      const auto p_miss = tasks::miss_head_forward(miss, pseudo[i].scene->features, maps[i].p, maps[i].u);
      for (const auto& c : tasks::miss_candidates(maps[i].p, task.gate))
        locs.push_back({p_miss(std::size_t(c.class_id), c.row, c.col), i, c.row, c.col, c.class_id});
    }
    std::stable_sort(locs.begin(), locs.end(), [](const Loc& a, const Loc& b) {
      if (a.p != b.p) return a.p > b.p;
      if (a.scene != b.scene) return a.scene < b.scene;
      if (a.row != b.row) return a.row < b.row;
      if (a.col != b.col) return a.col < b.col;
      return a.cls < b.cls;
    });
    const std::size_t take = std::min(locs.size(), budget.missed_labels);
    if (take < budget.missed_labels) run.warnings.push_back("missed budget exceeds the candidate locations; clipped");
    for (std::size_t j = 0; j < take; ++j) {
      ++run.spent.missed_inspected;
      auto& p = pseudo[locs[j].scene];
      if (oracle.inspect_location(p.labels, locs[j].row, locs[j].col, task.d.front(), *p.scene)) ++run.spent.missed_added;
    }
  }

  run.label_errors_after = detail::count_errors(pseudo, task.tau);
  run.labels = detail::export_labels(pseudo);
  run.map = evaluate_map(detail::retrain(real, pseudo, w, st, seed), w, task);
  return run;
}

inline PipelineRun run_variant(Variant v, const World& w, const Settings& st, std::uint64_t seed) {
  switch (v) {
  case Variant::R: return run_baseline_r(w, st, seed);
  case Variant::P: return run_baseline_p(w, st, seed);
  case Variant::U: return run_ours_u(w, st, seed);
  }
  throw ConfigError("unknown variant");
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct VariantSummary {
  Variant variant;
  std::vector<double> map; // per seed, in seed order
  double mean = 0.0;
  double stddev = 0.0;
};

struct Comparison {
  std::vector<VariantSummary> variants;
  std::vector<std::uint64_t> seeds;
  bool has_ordering = false;
  bool ordering_holds = false;          // mean U >= mean P >= mean R
  std::size_t seeds_u_above_p = 0;      // seeds with U - P > 0
};

inline Comparison compare_runs(const std::vector<PipelineRun>& runs) {
  Comparison c;
  for (const auto& r : runs) {
    if (std::find(c.seeds.begin(), c.seeds.end(), r.seed) == c.seeds.end()) c.seeds.push_back(r.seed);
    auto it = std::find_if(c.variants.begin(), c.variants.end(), [&](const auto& v) { return v.variant == r.variant; });
    if (it == c.variants.end()) {
      c.variants.push_back({r.variant, {}, 0.0, 0.0});
      it = c.variants.end() - 1;
    }
    it->map.push_back(r.map.map);
  }
  for (auto& v : c.variants) {
    long double s = 0.0L;
    for (double x : v.map) s += x;
    v.mean = double(s / (long double)v.map.size());
    long double q = 0.0L;
    for (double x : v.map) q += (x - v.mean) * (x - v.mean);
    v.stddev = v.map.size() > 1 ? std::sqrt(double(q / (long double)(v.map.size() - 1))) : 0.0;
  }
  auto find = [&](Variant v) -> const VariantSummary* {
    for (const auto& s : c.variants)
      if (s.variant == v) return &s;
    return nullptr;
  };
  const auto *r = find(Variant::R), *p = find(Variant::P), *u = find(Variant::U);
  if (r && p && u) {
    c.has_ordering = true;
    c.ordering_holds = u->mean >= p->mean && p->mean >= r->mean;
    for (std::size_t i = 0; i < std::min(u->map.size(), p->map.size()); ++i) c.seeds_u_above_p += u->map[i] > p->map[i];
  }
  return c;
}

inline nlohmann::json to_json(const BudgetPlan& b) {
  return {{"total_labels", b.total_labels},
          {"scene_relabels", b.scene_relabels},
          {"box_verifications", b.box_verifications},
          {"missed_labels", b.missed_labels}};
}

inline nlohmann::json to_json(const BudgetSpent& b) {
  return {{"scene_labels", b.scene_labels},       {"scenes_relabeled", b.scenes_relabeled},
          {"boxes_checked", b.boxes_checked},     {"boxes_replaced", b.boxes_replaced},
          {"boxes_removed", b.boxes_removed},     {"missed_inspected", b.missed_inspected},
          {"missed_added", b.missed_added},       {"total", b.total()}};
}

/// One JSON line per pseudo-labeled scene.
inline std::string labels_to_jsonl(const PipelineRun& r) {
  std::string out;
  for (const auto& s : r.labels) {
    nlohmann::json j{{"scene_id", s.scene_id}, {"objects", nlohmann::json::array()}};
    for (const auto& b : s.boxes) j["objects"].push_back(box_to_json(b, true));
    out += j.dump() + '\n';
  }
  return out;
}

inline nlohmann::json to_json(const PipelineRun& r) {
  return {{"variant", to_string(r.variant)},
          {"n_labeled", r.n_labeled},
          {"seed", r.seed},
          {"map", metrics::to_json(r.map)},
          {"spent", to_json(r.spent)},
          {"pseudo_scenes", r.pseudo_scenes},
          {"label_errors_before", r.label_errors_before},
          {"label_errors_after", r.label_errors_after},
          {"warnings", r.warnings}};
}

inline nlohmann::json to_json(const Comparison& c) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& s : c.variants)
    v.push_back({{"variant", to_string(s.variant)}, {"map", s.map}, {"mean", s.mean}, {"stddev", s.stddev}});
  nlohmann::json j{{"seeds", c.seeds}, {"variants", v}, {"metric", "center-distance mAP (NDS not computed)"}};
  if (c.has_ordering) {
    j["ordering"] = {{"check", "Nk-U >= Nk-P >= Nk-R (mean over seeds)"},
                     {"holds", c.ordering_holds},
                     {"seeds_u_above_p", c.seeds_u_above_p}};
  }
  return j;
}

} // namespace edlbev::autolabel
