#pragma once

// End-to-end runs on the synthetic world: detector training, the three
// uncertainty evaluations and their baselines. Shared by the CLI and the
// acceptance suite.

#include <cstdint>
#include <functional>
#include <utility>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edlbev/diffnet.hpp"
#include "edlbev/evidential.hpp"
#include "edlbev/metrics.hpp"
#include "edlbev/synthbev.hpp"
#include "edlbev/tasks.hpp"

namespace edlbev::experiment {

struct ModelConfig {
  std::vector<std::size_t> hidden{32};
  net::TrainConfig train = [] {
    net::TrainConfig t;
    t.learning_rate = 1e-2;
    t.steps = 600;
    return t;
  }();
  LossConfig loss{};

  std::vector<std::size_t> dims(std::size_t in, std::size_t out) const {
    std::vector<std::size_t> d{in};
    d.insert(d.end(), hidden.begin(), hidden.end());
    d.push_back(out);
    return d;
  }
};

struct TaskConfig {
  double tau = 0.3;
  double gate = 0.05;
  std::size_t k = 15;
  std::vector<double> d{2.0, 4.0};
  std::vector<double> thresholds{0.5, 1.0, 2.0, 4.0};
  double box_threshold = 0.3; // score threshold of final predictions
  std::size_t ensemble = 5;

  void validate() const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("task.tau must be in [0,1]");
    if (!(gate > 0.0 && gate < 1.0)) throw ConfigError("task.gate must be in (0,1)");
    if (k < 1) throw ConfigError("task.k must be >= 1");
    if (d.empty()) throw ConfigError("task.d must be nonempty");
    for (double x : d)
      if (!(x > 0.0)) throw ConfigError("task.d values must be > 0");
    if (thresholds.empty()) throw ConfigError("task.thresholds must be nonempty");
    if (!(box_threshold > 0.0 && box_threshold < 1.0)) throw ConfigError("task.box_threshold must be in (0,1)");
    if (ensemble < 2) throw ConfigError("task.ensemble must be >= 2");
  }
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Training examples over scenes whose labels are visible.
inline std::vector<net::Example> examples(const std::vector<const SyntheticScene*>& scenes) {
  std::vector<net::Example> out;
  out.reserve(scenes.size());
  for (const auto* s : scenes) out.push_back({&s->features, &s->target, nullptr});
  return out;
}

inline std::vector<const SyntheticScene*> select(const std::vector<SyntheticScene>& all, Domain d, Split s) {
  std::vector<const SyntheticScene*> out;
  for (const auto& x : all)
    if (x.domain == d && x.split == s) out.push_back(&x);
  return out;
}

inline net::HeadParameters train_detector(const std::vector<net::Example>& data, std::size_t features,
                                          std::size_t classes, net::HeadKind kind, const ModelConfig& m,
                                          std::uint64_t seed, std::vector<double>* history = nullptr) {
  const std::size_t out = kind == net::HeadKind::Evidential ? 2 * classes : classes;
  net::TrainConfig tc = m.train;
  tc.seed = seed;
  return net::train_head(net::init_head(m.dims(features, out), kind, seed), data, tc, m.loss, history);
}

/// Seed of ensemble member i; disjoint from the run seed used by the EDL and
/// entropy heads.
inline std::uint64_t member_seed(std::uint64_t seed, std::size_t i) { return (seed ^ 0x656e73ULL) + i; }

/// Per-cell outputs of a trained evidential detector on one scene.
struct EvidentialMaps {
  Tensor3 p;
  Tensor3 u;
};

inline EvidentialMaps evidential_maps(const net::HeadParameters& head, const Tensor3& features) {
  const auto ev = net::predict_evidence(head, features);
  return {predict_prob(ev), predict_uncertainty(ev)};
}

/// Binary entropy of a sigmoid head's probabilities.
inline Tensor3 entropy_map(const net::HeadParameters& head, const Tensor3& features) {
  return entropy_score(net::predict_sigmoid(head, features));
}

/// Entropy of the members' mean probability.
inline Tensor3 ensemble_entropy_map(const std::vector<net::HeadParameters>& members, const Tensor3& features) {
  Tensor3 mean = net::predict_sigmoid(members.front(), features);
  for (std::size_t i = 1; i < members.size(); ++i) {
    const Tensor3 p = net::predict_sigmoid(members[i], features);
    for (std::size_t j = 0; j < mean.size(); ++j) mean.values()[j] += p.values()[j];
  }
  for (double& v : mean.values()) v /= double(members.size());
  return entropy_score(mean);
}

/// Missed-object head: evidential loss and trainer of the detector, over
/// inputs [features, p, u] of the given detector, restricted to gated cells.
inline net::HeadParameters train_miss_head(const net::HeadParameters& detector,
                                           const std::vector<const SyntheticScene*>& scenes, std::size_t features,
                                           std::size_t classes, const ModelConfig& model, double gate,
                                           std::uint64_t seed) {
  std::vector<Tensor3> inputs, masks;
  inputs.reserve(scenes.size());
  masks.reserve(scenes.size());
  for (const auto* s : scenes) {
    const auto m = evidential_maps(detector, s->features);
    inputs.push_back(tasks::miss_head_inputs(s->features, m.p, m.u));
    masks.push_back(tasks::gate_mask(m.p, gate));
  }
  std::vector<net::Example> data;
  data.reserve(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) data.push_back({&inputs[i], &scenes[i]->target, &masks[i]});
  return train_detector(data, features + 2 * classes, classes, net::HeadKind::Evidential, model,
                        seed ^ 0x6d697373ULL);
}

// ---------------------------------------------------------------------------
// Evaluations
// ---------------------------------------------------------------------------

struct MethodCurve {
  std::string method;
  metrics::CurveReport roc;
  metrics::CurveReport pr;
};

inline MethodCurve method_curve(std::string name, const std::vector<metrics::BinaryScoredSample>& samples) {
  return {std::move(name), metrics::roc_auc(samples), metrics::pr_auc(samples)};
}

struct OodReport {
  std::vector<tasks::SceneScore> scenes; // EDL scene uncertainty, ID then OOD
  std::vector<MethodCurve> methods;      // "edl", "entropy", optionally "ensemble"
};

/// Scene-level OOD detection: mean per-cell uncertainty of each scene, OOD
/// scenes positive.
inline OodReport run_ood(const std::vector<const SyntheticScene*>& id, const std::vector<const SyntheticScene*>& ood,
                         const net::HeadParameters& edl, const net::HeadParameters* entropy,
                         const std::vector<net::HeadParameters>* ensemble) {
  if (id.empty() || ood.empty()) throw DataError("run_ood: need both ID and OOD test scenes");
  OodReport rep;
  std::vector<metrics::BinaryScoredSample> s_edl, s_ent, s_ens;
  auto visit = [&](const SyntheticScene& s, bool label) {
    const double u = tasks::scene_uncertainty(evidential_maps(edl, s.features).u);
    rep.scenes.push_back({s.scene_id, u, s.domain});
    s_edl.push_back({u, label});
    if (entropy) s_ent.push_back({tasks::scene_uncertainty(entropy_map(*entropy, s.features)), label});
    if (ensemble) s_ens.push_back({tasks::scene_uncertainty(ensemble_entropy_map(*ensemble, s.features)), label});
  };
  for (const auto* s : id) visit(*s, false);
  for (const auto* s : ood) visit(*s, true);
  rep.methods.push_back(method_curve("edl", s_edl));
  if (entropy) rep.methods.push_back(method_curve("entropy", s_ent));
  if (ensemble) rep.methods.push_back(method_curve("ensemble", s_ens));
  return rep;
}

struct BoxMethodReport {
  MethodCurve curve;
  std::vector<tasks::ScoredBox> boxes;
  std::size_t erroneous = 0;
};

struct BoxReport {
  std::vector<BoxMethodReport> methods;
};

namespace detail {

inline BoxMethodReport score_method(std::string name, const std::vector<const SyntheticScene*>& scenes,
                                    const std::function<std::pair<Tensor3, Tensor3>(const Tensor3&)>& p_and_unc,
                                    const WorldConfig& world, const TaskConfig& t) {
  BoxMethodReport r;
  std::vector<metrics::BinaryScoredSample> samples;
  for (const auto* s : scenes) {
    const auto [p, unc] = p_and_unc(s->features);
    const auto pred = tasks::decode_boxes(p, t.box_threshold, world.class_sizes);
    for (auto& b : tasks::score_boxes(unc, pred, s->objects, t.tau)) {
      samples.push_back({b.u_b, b.erroneous});
      r.erroneous += b.erroneous;
      r.boxes.push_back(std::move(b));
    }
  }
  const bool both = r.erroneous > 0 && r.erroneous < samples.size();
  if (!both) throw DataError("run_boxes: " + name + " boxes are all erroneous or all correct; AUC undefined");
  r.curve = method_curve(std::move(name), samples);
  return r;
}

} // namespace detail

/// Box-level error flagging: each method decodes its own boxes and scores
/// them by footprint uncertainty; erroneous (IoU < tau) boxes are positive.
inline BoxReport run_boxes(const std::vector<const SyntheticScene*>& scenes, const net::HeadParameters& edl,
                           const net::HeadParameters* entropy, const WorldConfig& world, const TaskConfig& t) {
  BoxReport rep;
  rep.methods.push_back(detail::score_method(
      "edl", scenes,
      [&](const Tensor3& f) {
        auto m = evidential_maps(edl, f);
        return std::pair{std::move(m.p), std::move(m.u)};
      },
      world, t));
  if (entropy) {
    rep.methods.push_back(detail::score_method(
        "entropy", scenes,
        [&](const Tensor3& f) {
          auto p = net::predict_sigmoid(*entropy, f);
          auto h = entropy_score(p);
          return std::pair{std::move(p), std::move(h)};
        },
        world, t));
  }
  return rep;
}

struct MissedMethod {
  std::string method;
  std::vector<double> d;
  std::vector<tasks::MissSelection> pooled; // one per d
};

struct MissedReport {
  std::size_t scenes = 0;
  std::size_t missed_gt = 0;
  std::vector<MissedMethod> methods; // "m_miss", "u_rank", "random"
};

/// Missed-object search on scenes: final predictions come from the EDL
/// detector at box_threshold; the gated candidates of each scene are ranked
/// by the M^miss head, by u alone and at random, top k taken per scene.
inline MissedReport run_missed(const std::vector<const SyntheticScene*>& scenes, const net::HeadParameters& edl,
                               const net::HeadParameters& miss, const WorldConfig& world, const TaskConfig& t,
                               std::uint64_t seed) {
  MissedReport rep;
  rep.scenes = scenes.size();
  const std::vector<std::string> names{"m_miss", "u_rank", "random"};
  std::vector<std::vector<std::vector<tasks::MissSelection>>> per(names.size(),
                                                                  std::vector<std::vector<tasks::MissSelection>>(t.d.size()));
  std::mt19937_64 rng(seed ^ 0x72616e64ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto* s : scenes) {
    const auto m = evidential_maps(edl, s->features);
    const auto pred = tasks::decode_boxes(m.p, t.box_threshold, world.class_sizes);
    const auto missed = tasks::missed_ground_truth(pred, s->objects);
    rep.missed_gt += missed.size();
    // Scenes without gated candidates still count their missed objects.
    const auto base = tasks::miss_candidates(m.p, t.gate);
    const Tensor3 p_miss = tasks::miss_head_forward(miss, s->features, m.p, m.u);
    for (std::size_t mth = 0; mth < names.size(); ++mth) {
      auto c = base;
      if (mth == 0) tasks::assign_scores(c, p_miss);
      else if (mth == 1) tasks::assign_scores(c, m.u);
      else
        for (auto& x : c) x.p_miss = unif(rng);
      for (std::size_t j = 0; j < t.d.size(); ++j) per[mth][j].push_back(tasks::select_missed(c, t.k, missed, t.d[j]));
    }
  }
  for (std::size_t mth = 0; mth < names.size(); ++mth) {
    MissedMethod mm{names[mth], t.d, {}};
    for (std::size_t j = 0; j < t.d.size(); ++j) mm.pooled.push_back(tasks::pool(per[mth][j]));
    rep.methods.push_back(std::move(mm));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const MethodCurve& c) {
  return {{"method", c.method}, {"roc_auc", c.roc.auc}, {"pr_auc", c.pr.auc}};
}

inline nlohmann::json to_json(const OodReport& r) {
  nlohmann::json m = nlohmann::json::array();
  for (const auto& c : r.methods) m.push_back(to_json(c));
  return {{"task", "ood"}, {"scenes", r.scenes.size()}, {"methods", m}};
}

inline nlohmann::json to_json(const BoxReport& r) {
  nlohmann::json m = nlohmann::json::array();
  for (const auto& b : r.methods) {
    auto j = to_json(b.curve);
    j["boxes"] = b.boxes.size();
    j["erroneous"] = b.erroneous;
    m.push_back(j);
  }
  return {{"task", "boxes"}, {"methods", m}};
}

inline nlohmann::json to_json(const MissedReport& r) {
  nlohmann::json m = nlohmann::json::array();
  for (const auto& mm : r.methods) {
    nlohmann::json per_d = nlohmann::json::array();
    for (std::size_t j = 0; j < mm.d.size(); ++j) {
      const auto& s = mm.pooled[j];
      per_d.push_back({{"d", mm.d[j]},
                       {"selected", s.selected},
                       {"matches", s.matches},
                       {"precision", s.pr.precision},
                       {"recall", s.pr.recall},
                       {"f1", s.pr.f1}});
    }
    m.push_back({{"method", mm.method}, {"per_d", per_d}});
  }
  return {{"task", "missed"}, {"scenes", r.scenes}, {"missed_gt", r.missed_gt}, {"methods", m}};
}

} // namespace edlbev::experiment
