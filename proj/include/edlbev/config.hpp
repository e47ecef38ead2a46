#pragma once

// Run configuration: one JSON document, with EDLBEV_<SECTION>_<KEY>
// environment overrides applied on top of it.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edlbev/autolabel.hpp"
#include "edlbev/experiment.hpp"
#include "edlbev/synthbev.hpp"

extern char** environ;

namespace edlbev {

struct RunConfig {
  WorldConfig world;
  DatasetCounts counts{1000, 200, 200, 0};
  experiment::ModelConfig model;
  experiment::TaskConfig task;
  autolabel::Config autolabel;
  std::size_t autolabel_pool = 1000; // training scenes in the auto-label world
  std::size_t autolabel_test = 200;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  void validate() const {
    world.validate();
    model.train.validate();
    model.loss.validate();
    task.validate();
    autolabel.validate();
    if (model.hidden.empty()) throw ConfigError("model.hidden must list at least one layer width");
    for (auto h : model.hidden)
      if (h == 0) throw ConfigError("model.hidden widths must be >= 1");
    if (seeds.empty()) throw ConfigError("seeds must be nonempty");
    if (autolabel.n_labeled > autolabel_pool) throw ConfigError("autolabel.n_labeled exceeds autolabel.pool");
  }
};

inline const char* to_string(net::Optimizer o) { return o == net::Optimizer::Adam ? "adam" : "sgd"; }

inline nlohmann::json to_json(const RunConfig& c) {
  return {
      {"world", to_json(c.world)},
      {"counts", counts_to_json(c.counts)},
      {"model", {{"hidden", c.model.hidden}}},
      {"train",
       {{"learning_rate", c.model.train.learning_rate},
        {"steps", c.model.train.steps},
        {"batch_scenes", c.model.train.batch_scenes},
        {"optimizer", to_string(c.model.train.optimizer)},
        {"beta1", c.model.train.beta1},
        {"beta2", c.model.train.beta2},
        {"epsilon", c.model.train.epsilon}}},
      {"loss", {{"gamma", c.model.loss.gamma}, {"eta", c.model.loss.eta}, {"lambda", c.model.loss.lambda}}},
      {"task",
       {{"tau", c.task.tau},
        {"gate", c.task.gate},
        {"k", c.task.k},
        {"d", c.task.d},
        {"thresholds", c.task.thresholds},
        {"box_threshold", c.task.box_threshold},
        {"ensemble", c.task.ensemble}}},
      {"autolabel",
       {{"n_labeled", c.autolabel.n_labeled},
        {"holdback", c.autolabel.holdback},
        {"pool", c.autolabel_pool},
        {"test", c.autolabel_test},
        {"budget", autolabel::to_json(c.autolabel.budget)},
        {"pseudo_threshold", c.autolabel.pseudo_threshold},
        {"relabel_excludes_other_pools", c.autolabel.relabel_excludes_other_pools}}},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir},
      {"seed", c.seed},
  };
}

namespace detail {

/// Throws on any key of `j` that has no counterpart in `ref`.
inline void check_known_keys(const nlohmann::json& j, const nlohmann::json& ref, const std::string& where) {
  if (!j.is_object()) return;
  if (!ref.is_object()) throw ConfigError("config: '" + where + "' must not be an object");
  for (const auto& [k, v] : j.items()) {
    const std::string path = where.empty() ? k : where + "." + k;
    if (!ref.contains(k)) throw ConfigError("config: unknown key '" + path + "'");
    if (v.is_object()) check_known_keys(v, ref.at(k), path);
  }
}

inline net::Optimizer optimizer_from_string(const std::string& s) {
  if (s == "adam") return net::Optimizer::Adam;
  if (s == "sgd") return net::Optimizer::GradientDescent;
  throw ConfigError("train.optimizer must be 'adam' or 'sgd'");
}

} // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  detail::check_known_keys(j, to_json(c), "");
  try {
    if (j.contains("world")) from_json(j.at("world"), c.world);
    if (j.contains("counts")) {
      const auto& n = j.at("counts");
      c.counts.train = n.value("train", c.counts.train);
      c.counts.test_id = n.value("test_id", c.counts.test_id);
      c.counts.test_ood = n.value("test_ood", c.counts.test_ood);
      c.counts.unlabeled = n.value("unlabeled", c.counts.unlabeled);
    }
    if (j.contains("model")) c.model.hidden = j.at("model").value("hidden", c.model.hidden);
    if (j.contains("train")) {
      const auto& t = j.at("train");
      auto& tc = c.model.train;
      tc.learning_rate = t.value("learning_rate", tc.learning_rate);
      tc.steps = t.value("steps", tc.steps);
      tc.batch_scenes = t.value("batch_scenes", tc.batch_scenes);
      if (t.contains("optimizer")) tc.optimizer = detail::optimizer_from_string(t.at("optimizer").get<std::string>());
      tc.beta1 = t.value("beta1", tc.beta1);
      tc.beta2 = t.value("beta2", tc.beta2);
      tc.epsilon = t.value("epsilon", tc.epsilon);
    }
    if (j.contains("loss")) {
      const auto& l = j.at("loss");
      c.model.loss.gamma = l.value("gamma", c.model.loss.gamma);
      c.model.loss.eta = l.value("eta", c.model.loss.eta);
      c.model.loss.lambda = l.value("lambda", c.model.loss.lambda);
    }
    if (j.contains("task")) {
      const auto& t = j.at("task");
      c.task.tau = t.value("tau", c.task.tau);
      c.task.gate = t.value("gate", c.task.gate);
      c.task.k = t.value("k", c.task.k);
      c.task.d = t.value("d", c.task.d);
      c.task.thresholds = t.value("thresholds", c.task.thresholds);
      c.task.box_threshold = t.value("box_threshold", c.task.box_threshold);
      c.task.ensemble = t.value("ensemble", c.task.ensemble);
    }
    if (j.contains("autolabel")) {
      const auto& a = j.at("autolabel");
      c.autolabel.n_labeled = a.value("n_labeled", c.autolabel.n_labeled);
      c.autolabel.holdback = a.value("holdback", c.autolabel.holdback);
      c.autolabel_pool = a.value("pool", c.autolabel_pool);
      c.autolabel_test = a.value("test", c.autolabel_test);
      c.autolabel.pseudo_threshold = a.value("pseudo_threshold", c.autolabel.pseudo_threshold);
      c.autolabel.relabel_excludes_other_pools =
          a.value("relabel_excludes_other_pools", c.autolabel.relabel_excludes_other_pools);
      if (a.contains("budget")) {
        const auto& b = a.at("budget");
        auto& bp = c.autolabel.budget;
        if (b.contains("total_labels") && !b.contains("scene_relabels") && !b.contains("box_verifications") &&
            !b.contains("missed_labels")) {
          bp = autolabel::BudgetPlan::equal_split(b.at("total_labels").get<std::size_t>());
        } else {
          bp.total_labels = b.value("total_labels", bp.total_labels);
          bp.scene_relabels = b.value("scene_relabels", bp.scene_relabels);
          bp.box_verifications = b.value("box_verifications", bp.box_verifications);
          bp.missed_labels = b.value("missed_labels", bp.missed_labels);
        }
      }
    }
    c.seeds = j.value("seeds", c.seeds);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

/// Applies EDLBEV_<SECTION>_<KEY>=value overrides to a config document.
/// SECTION and KEY are matched case-insensitively against existing keys;
/// EDLBEV_<KEY> addresses top-level keys. Values are parsed as JSON when
/// possible, else taken as strings.
inline void apply_env_overrides(nlohmann::json& j, const std::vector<std::pair<std::string, std::string>>& env) {
  auto lower = [](std::string s) {
    for (char& ch : s) ch = char(std::tolower(static_cast<unsigned char>(ch)));
    return s;
  };
  auto parse_value = [](const std::string& v) {
    auto parsed = nlohmann::json::parse(v, nullptr, false);
    return parsed.is_discarded() ? nlohmann::json(v) : parsed;
  };
  for (const auto& [name, value] : env) {
    if (name.rfind("EDLBEV_", 0) != 0) continue;
    const std::string rest = lower(name.substr(7));
    if (j.contains(rest) && !j.at(rest).is_object()) {
      j[rest] = parse_value(value);
      continue;
    }
    bool applied = false;
    for (auto& [section, body] : j.items()) {
      if (!body.is_object() || rest.rfind(section + "_", 0) != 0) continue;
      const std::string key = rest.substr(section.size() + 1);
      if (body.contains(key)) {
        body[key] = parse_value(value);
        applied = true;
        break;
      }
    }
    if (!applied) throw ConfigError("environment override " + name + " matches no config key");
  }
}

inline std::vector<std::pair<std::string, std::string>> process_environment() {
  std::vector<std::pair<std::string, std::string>> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string kv(*e);
    const auto eq = kv.find('=');
    if (eq != std::string::npos) out.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return out;
}

/// Defaults, then the JSON file (if any), then environment overrides.
inline RunConfig load_run_config(const std::string& path,
                                 const std::vector<std::pair<std::string, std::string>>& env = process_environment()) {
  nlohmann::json j = to_json(RunConfig{});
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open config file " + path);
    nlohmann::json file = nlohmann::json::parse(is, nullptr, false);
    if (file.is_discarded() || !file.is_object()) throw ConfigError("config file " + path + " is not a JSON object");
    detail::check_known_keys(file, j, "");
    // A budget given only as a total means an equal split of that total.
    if (file.contains("autolabel") && file["autolabel"].contains("budget")) j["autolabel"].erase("budget");
    j.merge_patch(file);
  }
  apply_env_overrides(j, env);
  return run_config_from_json(j);
}

} // namespace edlbev
