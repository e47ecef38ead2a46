// edlbev: generate synthetic BEV worlds, train evidential heads, run the
// uncertainty evaluations and the auto-labeling comparison.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "edlbev/autolabel.hpp"
#include "edlbev/config.hpp"
#include "edlbev/experiment.hpp"
#include "edlbev/selftest.hpp"

#ifndef EDLBEV_VERSION
#define EDLBEV_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edlbev;

namespace {

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
  kShape = 5,
  kCheckFailed = 6,
};

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw DataError("cannot read '" + p.string() + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string file_digest(const fs::path& p) { return sha256_hex(read_file(p)); }

/// Writes through a temporary file so readers never see a partial file.
void write_file(const fs::path& p, const std::string& content) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw DataError("cannot write '" + tmp.string() + "'");
    os << content;
    if (!os) throw DataError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, p, ec);
  if (ec) throw DataError("cannot rename '" + tmp.string() + "': " + ec.message());
}

void write_json(const fs::path& p, const json& j) { write_file(p, j.dump(2) + "\n"); }

std::string curve_csv(const metrics::CurveReport& r, const char* x, const char* y) {
  std::ostringstream os;
  metrics::write_curve_csv(os, r, x, y);
  return os.str();
}

/// Manifest with the resolved config, tool version and digests of inputs
/// and outputs. No timestamps: identical runs give identical manifests.
class Manifest {
public:
  Manifest(std::string command, const RunConfig& cfg) {
    j_ = {{"command", std::move(command)},
          {"tool", "edlbev"},
          {"version", EDLBEV_VERSION},
          {"config", to_json(cfg)},
          {"inputs", json::object()},
          {"outputs", json::object()}};
  }
  void input(const std::string& name, const std::string& digest) { j_["inputs"][name] = digest; }
  void output(const fs::path& root, const fs::path& p) {
    j_["outputs"][fs::relative(p, root).generic_string()] = file_digest(p);
  }
  void set(const std::string& key, json v) { j_[key] = std::move(v); }
  void write(const fs::path& p) const { write_json(p, j_); }

private:
  json j_;
};

struct Common {
  std::string config_path;
  std::string output_dir;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = load_run_config(c.config_path);
  if (!c.output_dir.empty()) cfg.output_dir = c.output_dir;
  return cfg;
}

fs::path dataset_dir(const RunConfig& cfg, const std::string& flag) {
  return flag.empty() ? fs::path(cfg.output_dir) / "dataset" : fs::path(flag);
}

/// Loads a dataset and checks it was generated for a world with the same
/// grid and class layout as the config.
Dataset load_dataset(const fs::path& dir, WorldConfig& world) {
  Dataset ds = read_dataset(dir);
  from_json(ds.manifest.at("world"), world);
  return ds;
}

net::HeadParameters load_head(const fs::path& p, std::size_t in_dim, std::size_t classes, net::HeadKind kind) {
  auto h = net::load_checkpoint(p.string());
  if (h.kind != kind) throw ShapeError("'" + p.string() + "': unexpected head kind");
  if (h.in_dim() != in_dim || h.classes() != classes) {
    throw ShapeError("'" + p.string() + "': head is " + std::to_string(h.in_dim()) + " -> " +
                     std::to_string(h.classes()) + " classes, world needs " + std::to_string(in_dim) + " -> " +
                     std::to_string(classes));
  }
  return h;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

int cmd_gen(const Common& c) {
  const RunConfig cfg = resolve(c);
  const fs::path out(cfg.output_dir);
  const fs::path dir = out / "dataset";
  const Dataset ds = generate_dataset(cfg.world, cfg.counts, dir);
  Manifest m("gen", cfg);
  m.output(out, dir / "scenes.jsonl");
  m.output(out, dir / "manifest.json");
  m.set("dataset_digest", ds.manifest.at("digest"));
  m.write(out / "gen_manifest.json");
  std::cout << ds.manifest.at("digest").get<std::string>() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainFlags {
  std::string dataset;
  bool grad_check = false;
  bool entropy = false;
  bool miss = false;
  std::size_t ensemble = 0;
};

std::string history_csv(const std::vector<double>& h) {
  std::ostringstream os;
  os << "step,loss\n";
  os.precision(17);
  for (std::size_t i = 0; i < h.size(); ++i) os << i << "," << h[i] << "\n";
  return os.str();
}

int cmd_train(const Common& c, const TrainFlags& f) {
  RunConfig cfg = resolve(c);
  const fs::path out(cfg.output_dir), ddir = dataset_dir(cfg, f.dataset);
  const Dataset ds = load_dataset(ddir, cfg.world);
  const auto train = experiment::select(ds.scenes, Domain::InDistribution, Split::Train);
  if (train.empty()) throw DataError("'" + ddir.string() + "' has no in-distribution training scenes");
  const auto data = experiment::examples(train);
  const std::size_t F = cfg.world.features, C = cfg.world.classes;

  Manifest m("train", cfg);
  m.input("dataset", ds.manifest.at("digest"));

  if (f.grad_check) {
    const auto head = net::init_head(cfg.model.dims(F, 2 * C), net::HeadKind::Evidential, cfg.seed);
    std::size_t kinks = 0;
    const double err = net::grad_check(head, data.front(), cfg.model.loss, cfg.seed, 200, 1e-5, 1e-6, &kinks);
    std::cout << "grad-check max_rel_error " << err << " (" << kinks << " probes at ReLU kinks skipped)\n";
    m.set("grad_check", {{"max_rel_error", err}, {"kinks_skipped", kinks}});
    if (!(err < 1e-4)) {
      std::cerr << "grad-check failed: " << err << " >= 1e-4\n";
      return kNumeric;
    }
  }

  const fs::path ck = out / "checkpoints";
  fs::create_directories(ck);
  auto train_one = [&](const std::string& name, net::HeadKind kind, std::uint64_t seed) {
    std::vector<double> hist;
    const auto head = experiment::train_detector(data, F, C, kind, cfg.model, seed, &hist);
    net::save_checkpoint((ck / (name + ".json")).string(), head);
    write_file(ck / ("train_curve_" + name + ".csv"), history_csv(hist));
    m.output(out, ck / (name + ".json"));
    m.output(out, ck / ("train_curve_" + name + ".csv"));
    std::cout << name << ": loss " << hist.front() << " -> " << hist.back() << "\n";
    return head;
  };

  const auto edl = train_one("edl", net::HeadKind::Evidential, cfg.seed);
  if (f.entropy) train_one("entropy", net::HeadKind::Sigmoid, cfg.seed);
  if (f.ensemble == 1) throw ConfigError("--ensemble needs at least 2 members");
  for (std::size_t i = 0; i < f.ensemble; ++i) {
    train_one("ensemble_" + std::to_string(i), net::HeadKind::Sigmoid, experiment::member_seed(cfg.seed, i));
  }
  if (f.miss) {
    const auto miss = experiment::train_miss_head(edl, train, F, C, cfg.model, cfg.task.gate, cfg.seed);
    net::save_checkpoint((ck / "miss.json").string(), miss);
    m.output(out, ck / "miss.json");
  }
  m.write(out / "train_manifest.json");
  return kOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalFlags {
  std::string dataset;
  std::string which;
  std::string checkpoint;
  std::string entropy_checkpoint;
  std::vector<std::string> ensemble_checkpoints;
  std::string miss_checkpoint;
};

int cmd_eval(const Common& c, EvalFlags f) {
  RunConfig cfg = resolve(c);
  const fs::path out(cfg.output_dir), ddir = dataset_dir(cfg, f.dataset);
  const Dataset ds = load_dataset(ddir, cfg.world);
  const std::size_t F = cfg.world.features, C = cfg.world.classes;
  const fs::path ck = out / "checkpoints";
  auto default_path = [&](std::string& flag, const std::string& name) {
    if (flag.empty() && fs::exists(ck / name)) flag = (ck / name).string();
  };
  default_path(f.checkpoint, "edl.json");
  default_path(f.entropy_checkpoint, "entropy.json");
  default_path(f.miss_checkpoint, "miss.json");
  if (f.ensemble_checkpoints.empty()) {
    for (std::size_t i = 0; fs::exists(ck / ("ensemble_" + std::to_string(i) + ".json")); ++i) {
      f.ensemble_checkpoints.push_back((ck / ("ensemble_" + std::to_string(i) + ".json")).string());
    }
  }
  if (f.checkpoint.empty()) throw DataError("no EDL checkpoint (pass --checkpoint or run train first)");

  Manifest m("eval " + f.which, cfg);
  m.input("dataset", ds.manifest.at("digest"));
  const auto edl = load_head(f.checkpoint, F, C, net::HeadKind::Evidential);
  m.input("checkpoint", file_digest(f.checkpoint));
  std::optional<net::HeadParameters> entropy;
  if (!f.entropy_checkpoint.empty()) {
    entropy = load_head(f.entropy_checkpoint, F, C, net::HeadKind::Sigmoid);
    m.input("entropy_checkpoint", file_digest(f.entropy_checkpoint));
  }

  const auto id = experiment::select(ds.scenes, Domain::InDistribution, Split::Test);
  const fs::path ev = out / "eval";
  json metrics_json;

  if (f.which == "ood") {
    std::vector<net::HeadParameters> ens;
    for (std::size_t i = 0; i < f.ensemble_checkpoints.size(); ++i) {
      ens.push_back(load_head(f.ensemble_checkpoints[i], F, C, net::HeadKind::Sigmoid));
      m.input("ensemble_" + std::to_string(i), file_digest(f.ensemble_checkpoints[i]));
    }
    const auto ood = experiment::select(ds.scenes, Domain::Ood, Split::Test);
    const auto rep = experiment::run_ood(id, ood, edl, entropy ? &*entropy : nullptr, ens.size() >= 2 ? &ens : nullptr);
    metrics_json = experiment::to_json(rep);
    std::string scores;
    for (const auto& s : rep.scenes) scores += tasks::to_json(s).dump() + "\n";
    write_file(ev / "ood_scenes.jsonl", scores);
    m.output(out, ev / "ood_scenes.jsonl");
    for (const auto& mc : rep.methods) {
      write_file(ev / ("ood_roc_" + mc.method + ".csv"), curve_csv(mc.roc, "fpr", "tpr"));
      write_file(ev / ("ood_pr_" + mc.method + ".csv"), curve_csv(mc.pr, "recall", "precision"));
      m.output(out, ev / ("ood_roc_" + mc.method + ".csv"));
      m.output(out, ev / ("ood_pr_" + mc.method + ".csv"));
    }
  } else if (f.which == "boxes") {
    const auto rep = experiment::run_boxes(id, edl, entropy ? &*entropy : nullptr, cfg.world, cfg.task);
    metrics_json = experiment::to_json(rep);
    for (const auto& b : rep.methods) {
      std::string lines;
      for (const auto& sb : b.boxes) lines += tasks::to_json(sb).dump() + "\n";
      const std::string name = b.curve.method;
      write_file(ev / ("boxes_" + name + ".jsonl"), lines);
      write_file(ev / ("boxes_roc_" + name + ".csv"), curve_csv(b.curve.roc, "fpr", "tpr"));
      write_file(ev / ("boxes_pr_" + name + ".csv"), curve_csv(b.curve.pr, "recall", "precision"));
      for (const char* k : {"boxes_", "boxes_roc_", "boxes_pr_"}) {
        m.output(out, ev / (std::string(k) + name + (std::string(k) == "boxes_" ? ".jsonl" : ".csv")));
      }
    }
  } else if (f.which == "missed") {
    if (f.miss_checkpoint.empty()) throw DataError("no M^miss checkpoint (pass --miss-checkpoint or train --miss)");
    const auto miss = load_head(f.miss_checkpoint, F + 2 * C, C, net::HeadKind::Evidential);
    m.input("miss_checkpoint", file_digest(f.miss_checkpoint));
    metrics_json = experiment::to_json(experiment::run_missed(id, edl, miss, cfg.world, cfg.task, cfg.seed));
  } else if (f.which == "map") {
    std::vector<std::vector<BevBox>> pred, gt;
    for (const auto* s : id) {
      pred.push_back(tasks::decode_boxes(net::predict_probability(edl, s->features), cfg.task.gate,
                                         cfg.world.class_sizes));
      gt.push_back(s->objects);
    }
    metrics_json = metrics::to_json(metrics::map_center_distance(pred, gt, cfg.task.thresholds));
    metrics_json["task"] = "map";
  } else {
    throw ConfigError("--which must be one of ood, boxes, missed, map");
  }

  write_json(ev / (f.which + ".json"), metrics_json);
  m.output(out, ev / (f.which + ".json"));
  m.write(out / ("eval_" + f.which + "_manifest.json"));
  std::cout << metrics_json.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// autolabel
// ---------------------------------------------------------------------------

struct AutolabelFlags {
  std::vector<std::string> variants{"R", "P", "U"};
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> n_labeled;
};

int cmd_autolabel(const Common& c, const AutolabelFlags& f) {
  RunConfig cfg = resolve(c);
  if (f.budget) cfg.autolabel.budget = autolabel::BudgetPlan::equal_split(*f.budget);
  if (f.n_labeled) cfg.autolabel.n_labeled = *f.n_labeled;
  if (!f.seeds.empty()) cfg.seeds = f.seeds;
  cfg.validate();
  std::vector<autolabel::Variant> variants;
  for (const auto& v : f.variants) variants.push_back(autolabel::variant_from_string(v));

  const fs::path out = fs::path(cfg.output_dir) / "autolabel";
  Manifest m("autolabel", cfg);
  json variant_names = json::array();
  for (auto v : variants) variant_names.push_back(autolabel::to_string(v));
  m.set("variants", variant_names);

  const autolabel::Settings st{cfg.model, cfg.task, cfg.autolabel};
  std::vector<autolabel::PipelineRun> runs;
  json spent = json::array();
  for (std::uint64_t seed : cfg.seeds) {
    WorldConfig w = cfg.world;
    w.seed = seed;
    const auto world = autolabel::make_world(w, cfg.autolabel.n_labeled, cfg.autolabel_pool - cfg.autolabel.n_labeled,
                                             cfg.autolabel_test);
    for (auto v : variants) {
      auto run = autolabel::run_variant(v, world, st, seed);
      for (const auto& warning : run.warnings) std::cerr << "warning: " << warning << "\n";
      const std::string stem = std::string(autolabel::to_string(v)) + "_seed" + std::to_string(seed);
      write_json(out / "runs" / (stem + ".json"), autolabel::to_json(run));
      m.output(fs::path(cfg.output_dir), out / "runs" / (stem + ".json"));
      if (!run.labels.empty()) {
        write_file(out / "labels" / (stem + ".jsonl"), autolabel::labels_to_jsonl(run));
        m.output(fs::path(cfg.output_dir), out / "labels" / (stem + ".jsonl"));
      }
      spent.push_back({{"variant", autolabel::to_string(v)}, {"seed", seed}, {"spent", autolabel::to_json(run.spent)}});
      std::cout << stem << " mAP " << run.map.map << "\n";
      run.labels.clear();
      runs.push_back(std::move(run));
    }
  }
  json report = autolabel::to_json(autolabel::compare_runs(runs));
  report["budget"] = autolabel::to_json(cfg.autolabel.budget);
  report["spent"] = spent;
  write_json(out / "comparison.json", report);
  m.output(fs::path(cfg.output_dir), out / "comparison.json");
  m.write(fs::path(cfg.output_dir) / "autolabel_manifest.json");
  std::cout << report.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// gradcheck / selftest
// ---------------------------------------------------------------------------

void print_check(const selftest::CheckResult& r) {
  std::printf("[%s] %s: worst %.3g (tol %.0e, %.2fs) %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.worst,
              r.tolerance, r.seconds, r.detail.c_str());
}

int cmd_gradcheck() {
  const auto r = selftest::gradient_suite();
  print_check(r);
  return r.passed ? kOk : kCheckFailed;
}

int cmd_selftest() {
  bool ok = true;
  for (const auto& r : selftest::run_all()) {
    print_check(r);
    ok = ok && r.passed;
  }
  return ok ? kOk : kCheckFailed;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ShapeError& e) {
    std::cerr << "dimension mismatch: " << e.what() << "\n";
    return kShape;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidential uncertainty for BEV detection heads on a synthetic world"};
  app.set_version_flag("--version", std::string(EDLBEV_VERSION));
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config_path, "run config JSON (defaults if omitted)");
  app.add_option("-o,--output-dir", common.output_dir, "output directory (overrides the config)");

  auto* gen = app.add_subcommand("gen", "generate the synthetic dataset");

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "train the EDL head and optional baselines");
  train->add_option("--dataset", tf.dataset, "dataset directory (default <out>/dataset)");
  train->add_flag("--grad-check", tf.grad_check, "finite-difference check before training; abort on failure");
  train->add_flag("--entropy", tf.entropy, "also train the entropy-baseline (sigmoid) head");
  train->add_option("--ensemble", tf.ensemble, "also train an ensemble of N sigmoid heads");
  train->add_flag("--miss", tf.miss, "also train the missed-object head");

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "evaluate a trained head");
  eval->add_option("--which", ef.which, "ood | boxes | missed | map")
      ->required()
      ->check(CLI::IsMember({"ood", "boxes", "missed", "map"}));
  eval->add_option("--dataset", ef.dataset, "dataset directory (default <out>/dataset)");
  eval->add_option("--checkpoint", ef.checkpoint, "EDL checkpoint (default <out>/checkpoints/edl.json)");
  eval->add_option("--entropy-checkpoint", ef.entropy_checkpoint, "entropy-baseline checkpoint");
  eval->add_option("--ensemble-checkpoints", ef.ensemble_checkpoints, "ensemble member checkpoints");
  eval->add_option("--miss-checkpoint", ef.miss_checkpoint, "missed-object head checkpoint");

  AutolabelFlags af;
  std::size_t budget = 0, n_labeled = 0;
  auto* al = app.add_subcommand("autolabel", "compare Nk-R / Nk-P / Nk-U auto-labeling");
  al->add_option("--variants", af.variants, "subset of R P U")->delimiter(',');
  al->add_option("--seeds", af.seeds, "seeds (default from config)")->delimiter(',');
  auto* budget_opt = al->add_option("--budget", budget, "total verification labels, split equally");
  auto* n_opt = al->add_option("--n", n_labeled, "labeled scenes N");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  auto* st = app.add_subcommand("selftest", "quadrature and finite-difference oracle suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  if (*budget_opt) af.budget = budget;
  if (*n_opt) af.n_labeled = n_labeled;

  if (*gen) return guarded([&] { return cmd_gen(common); });
  if (*train) return guarded([&] { return cmd_train(common, tf); });
  if (*eval) return guarded([&] { return cmd_eval(common, ef); });
  if (*al) return guarded([&] { return cmd_autolabel(common, af); });
  if (*gc) return guarded([&] { return cmd_gradcheck(); });
  if (*st) return guarded([&] { return cmd_selftest(); });
  return kInternal;
}
