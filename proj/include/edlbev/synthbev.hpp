#pragma once

// Synthetic bird's-eye-view world. Each scene is a [F x H x D] feature grid
// with a handful of axis-aligned objects. Inside an object's footprint every
// cell carries the class template: a fixed per-class feature direction scaled
// by a Gaussian profile peaked at the object center. Gaussian noise is added
// everywhere. The OOD regime skews the class mix, scales object sizes and
// shifts the per-channel feature means by +/- shift*sigma with balanced signs
// (half the channels up, half down, drawn per scene), so the grand mean of a
// scene is not itself a domain label.
//
// Coordinates: cell (r, k) has its center at (x = k, y = r); a box is
// (cx, cy, w, h) with w along x (columns) and h along y (rows).

#include <Eigen/Dense>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "edlbev/error.hpp"
#include "edlbev/evidential.hpp"
#include "edlbev/tensor.hpp"

namespace edlbev {

enum class Provenance { GroundTruth, Predicted, Pseudo, Verified };
enum class Domain { InDistribution, Ood };
enum class Split { Train, Test, Unlabeled };

inline const char* to_string(Provenance p) {
  switch (p) {
  case Provenance::GroundTruth: return "ground-truth";
  case Provenance::Predicted: return "predicted";
  case Provenance::Pseudo: return "pseudo";
  case Provenance::Verified: return "verified";
  }
  return "?";
}
inline const char* to_string(Domain d) { return d == Domain::Ood ? "ood" : "in-distribution"; }
inline const char* to_string(Split s) {
  switch (s) {
  case Split::Train: return "train";
  case Split::Test: return "test";
  case Split::Unlabeled: return "unlabeled";
  }
  return "?";
}
inline Domain domain_from_string(const std::string& s) {
  if (s == "ood") return Domain::Ood;
  if (s == "in-distribution") return Domain::InDistribution;
  throw DataError("unknown domain '" + s + "'");
}
inline Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  if (s == "unlabeled") return Split::Unlabeled;
  throw DataError("unknown split '" + s + "'");
}

struct BevBox {
  double cx = 0.0, cy = 0.0;
  double w = 1.0, h = 1.0;
  int class_id = 0;
  std::optional<double> score;
  Provenance provenance = Provenance::GroundTruth;

  static BevBox from_corners(double x0, double y0, double x1, double y1, int cls = 0) {
    return BevBox{0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0, cls, std::nullopt, Provenance::GroundTruth};
  }
  double x0() const { return cx - 0.5 * w; }
  double x1() const { return cx + 0.5 * w; }
  double y0() const { return cy - 0.5 * h; }
  double y1() const { return cy + 0.5 * h; }
  long center_col() const { return std::lround(cx); }
  long center_row() const { return std::lround(cy); }
};

struct OodShift {
  std::vector<double> class_mix{0.2, 0.3, 0.5};
  // RMS per-channel displacement of the background mean, in units of
  // feature_noise_sigma. With a ground signature it is realized by rotating
  // the ground direction (channel sum kept); without one, as +/- offsets.
  double feature_mean_shift = 0.6;
  double size_scale = 1.4;
};

struct WorldConfig {
  std::size_t rows = 32;     // H
  std::size_t cols = 32;     // D
  std::size_t features = 16; // F
  std::size_t classes = 3;   // C
  std::size_t objects_min = 1;
  std::size_t objects_max = 6;
  std::vector<double> class_mix{0.5, 0.3, 0.2};
  std::vector<std::array<double, 2>> class_sizes{{3.0, 3.0}, {2.0, 2.0}, {4.0, 2.0}}; // (w, h)
  double size_jitter = 0.2;
  double signal = 2.0;
  double feature_noise_sigma = 1.0;
  double sigma_splat = 1.5;
  // Background signature: free cells carry ground * a * (1 - occupancy) with a
  // per-scene amplitude a drawn from [1 - ground_jitter, 1 + ground_jitter].
  double ground_level = 0.6; // RMS per channel
  double ground_jitter = 0.3;
  // Fraction of objects whose template is scaled by a visibility drawn from
  // occluded_visibility.
  double occluded_fraction = 0.3;
  std::array<double, 2> occluded_visibility{0.2, 0.7};
  OodShift ood;
  std::uint64_t seed = 1;

  Shape3 target_shape() const { return {classes, rows, cols}; }
  Shape3 feature_shape() const { return {features, rows, cols}; }

  void validate() const {
    if (rows < 8 || cols < 8) throw ConfigError("WorldConfig: H and D must be >= 8");
    if (classes < 2) throw ConfigError("WorldConfig: C must be >= 2");
    if (features < 4) throw ConfigError("WorldConfig: F must be >= 4");
    if (objects_min > objects_max) throw ConfigError("WorldConfig: objects_min > objects_max");
    if (class_mix.size() != classes || ood.class_mix.size() != classes) {
      throw ConfigError("WorldConfig: class mix must have one weight per class");
    }
    if (class_sizes.size() != classes) throw ConfigError("WorldConfig: class_sizes must have one entry per class");
    for (const auto& s : class_sizes)
      if (!(s[0] > 0.0 && s[1] > 0.0)) throw ConfigError("WorldConfig: class sizes must be positive");
    if (!(sigma_splat > 0.0)) throw ConfigError("WorldConfig: sigma_splat must be > 0");
    if (!(feature_noise_sigma >= 0.0)) throw ConfigError("WorldConfig: feature_noise_sigma must be >= 0");
    if (!(size_jitter >= 0.0 && size_jitter < 1.0)) throw ConfigError("WorldConfig: size_jitter must be in [0,1)");
    if (!(ood.size_scale > 0.0)) throw ConfigError("WorldConfig: ood size_scale must be > 0");
    if (!(ood.feature_mean_shift >= 0.0)) throw ConfigError("WorldConfig: ood feature_mean_shift must be >= 0");
    if (!(ground_level >= 0.0)) throw ConfigError("WorldConfig: ground_level must be >= 0");
    if (!(ground_jitter >= 0.0 && ground_jitter < 1.0)) throw ConfigError("WorldConfig: ground_jitter must be in [0,1)");
    if (!(occluded_fraction >= 0.0 && occluded_fraction <= 1.0)) {
      throw ConfigError("WorldConfig: occluded_fraction must be in [0,1]");
    }
    if (!(occluded_visibility[0] > 0.0 && occluded_visibility[0] <= occluded_visibility[1] &&
          occluded_visibility[1] <= 1.0)) {
      throw ConfigError("WorldConfig: occluded_visibility must satisfy 0 < lo <= hi <= 1");
    }
  }
};

struct SyntheticScene {
  std::string scene_id;
  Tensor3 features; // [F x H x D]
  std::vector<BevBox> objects;
  TargetGrid target; // [C x H x D]
  Domain domain = Domain::InDistribution;
  Split split = Split::Train;
  bool labels_visible = true; // unlabeled scenes keep ground truth for the oracle annotator only
};

// ---------------------------------------------------------------------------

/// SplitMix64 finalizer, used to derive independent per-scene streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t scene_seed(std::uint64_t world_seed, Domain d, Split s, std::size_t index) {
  return mix64(world_seed ^ mix64((std::uint64_t(d) << 8 | std::uint64_t(s)) * 0x100000001b3ULL + index));
}

/// Per-class feature directions; a pure function of the world seed.
inline std::vector<std::vector<double>> class_templates(const WorldConfig& cfg) {
  std::mt19937_64 rng(mix64(cfg.seed ^ 0x7e3a1a7eULL));
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<std::vector<double>> t(cfg.classes, std::vector<double>(cfg.features));
  for (auto& v : t)
    for (auto& x : v) x = cfg.signal * n01(rng);
  return t;
}

/// Ground signature of the in-distribution world and its rotated OOD
/// counterpart; a pure function of the world seed. Both have the same channel
/// sum and norm, and differ by feature_mean_shift * sigma * sqrt(F) in norm.
struct GroundSignature {
  std::vector<double> id;
  std::vector<double> ood;
};

inline GroundSignature ground_signature(const WorldConfig& cfg) {
  const std::size_t F = cfg.features;
  GroundSignature g{std::vector<double>(F, 0.0), std::vector<double>(F, 0.0)};
  if (cfg.ground_level == 0.0) return g;
  std::mt19937_64 rng(mix64(cfg.seed ^ 0x67726e64ULL));
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::VectorXd v(F), q(F);
  for (std::size_t f = 0; f < F; ++f) v[Eigen::Index(f)] = n01(rng);
  for (std::size_t f = 0; f < F; ++f) q[Eigen::Index(f)] = n01(rng);
  v *= cfg.ground_level / std::sqrt(v.squaredNorm() / double(F));
  // Rotate within the zero-sum subspace so the channel sum is unchanged.
  const Eigen::VectorXd z = (v.array() - v.mean()).matrix();
  q = (q.array() - q.mean()).matrix();
  q -= (q.dot(z) / z.squaredNorm()) * z;
  q *= z.norm() / q.norm();
  const double disp = cfg.ood.feature_mean_shift * cfg.feature_noise_sigma * std::sqrt(double(F));
  const double theta = 2.0 * std::asin(std::min(1.0, disp / (2.0 * z.norm())));
  const Eigen::VectorXd o = (v - z) + std::cos(theta) * z + std::sin(theta) * q;
  for (std::size_t f = 0; f < F; ++f) {
    g.id[f] = v[Eigen::Index(f)];
    g.ood[f] = theta == 0.0 ? g.id[f] : o[Eigen::Index(f)];
  }
  return g;
}

/// Gaussian center profile of an object at cell (r, k); footprint test
/// included (0 outside the box).
inline double object_profile(const BevBox& b, std::size_t r, std::size_t k) {
  const double dx = double(k) - b.cx, dy = double(r) - b.cy;
  if (std::abs(dx) > 0.5 * b.w || std::abs(dy) > 0.5 * b.h) return 0.0;
  const double sx = 0.25 * b.w, sy = 0.25 * b.h;
  return std::exp(-0.5 * (dx * dx / (sx * sx) + dy * dy / (sy * sy)));
}

inline TargetGrid splat_targets(const std::vector<BevBox>& objects, const WorldConfig& cfg) {
  TargetGrid t(cfg.target_shape());
  const double inv2s2 = 1.0 / (2.0 * cfg.sigma_splat * cfg.sigma_splat);
  for (const auto& b : objects) {
    if (b.class_id < 0 || std::size_t(b.class_id) >= cfg.classes) throw DataError("splat_targets: class out of range");
    const long r0 = std::clamp(b.center_row(), 0L, long(cfg.rows) - 1);
    const long k0 = std::clamp(b.center_col(), 0L, long(cfg.cols) - 1);
    const std::size_t c = std::size_t(b.class_id);
    for (std::size_t r = 0; r < cfg.rows; ++r) {
      for (std::size_t k = 0; k < cfg.cols; ++k) {
        const double dr = double(r) - double(r0), dk = double(k) - double(k0);
        const double v = std::exp(-(dr * dr + dk * dk) * inv2s2);
        double& cell = t.y_soft(c, r, k);
        cell = std::max(cell, v);
      }
    }
    t.y(c, std::size_t(r0), std::size_t(k0)) = 1.0;
    t.y_soft(c, std::size_t(r0), std::size_t(k0)) = 1.0;
  }
  return t;
}

namespace detail {

inline std::size_t draw_class(std::mt19937_64& rng, const std::vector<double>& mix) {
  std::discrete_distribution<std::size_t> d(mix.begin(), mix.end());
  return d(rng);
}

} // namespace detail

/// Per-world quantities shared by every scene.
struct WorldBasis {
  std::vector<std::vector<double>> templates;
  GroundSignature ground;

  explicit WorldBasis(const WorldConfig& cfg) : templates(class_templates(cfg)), ground(ground_signature(cfg)) {}
};

inline SyntheticScene generate_scene(const WorldConfig& cfg, Domain domain, Split split, std::uint64_t stream_seed,
                                     std::string scene_id, const WorldBasis* basis = nullptr) {
  cfg.validate();
  std::optional<WorldBasis> own;
  if (!basis) basis = &own.emplace(cfg);
  std::mt19937_64 rng(stream_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  const bool ood = domain == Domain::Ood;

  SyntheticScene s;
  s.scene_id = std::move(scene_id);
  s.domain = domain;
  s.split = split;
  s.labels_visible = split != Split::Unlabeled;

  const std::size_t n_obj = std::uniform_int_distribution<std::size_t>(cfg.objects_min, cfg.objects_max)(rng);
  std::vector<double> visibility;
  for (std::size_t i = 0; i < n_obj; ++i) {
    for (int attempt = 0; attempt < 32; ++attempt) {
      BevBox b;
      b.class_id = int(detail::draw_class(rng, ood ? cfg.ood.class_mix : cfg.class_mix));
      const auto& size = cfg.class_sizes[std::size_t(b.class_id)];
      const double scale = ood ? cfg.ood.size_scale : 1.0;
      b.w = size[0] * scale * (1.0 + cfg.size_jitter * (2.0 * unit(rng) - 1.0));
      b.h = size[1] * scale * (1.0 + cfg.size_jitter * (2.0 * unit(rng) - 1.0));
      b.cx = unit(rng) * double(cfg.cols - 1);
      b.cy = unit(rng) * double(cfg.rows - 1);
      const bool clash = std::any_of(s.objects.begin(), s.objects.end(), [&](const BevBox& o) {
        return o.center_row() == b.center_row() && o.center_col() == b.center_col();
      });
      if (!clash) {
        s.objects.push_back(b);
        const auto [lo, hi] = cfg.occluded_visibility;
        visibility.push_back(unit(rng) < cfg.occluded_fraction ? lo + (hi - lo) * unit(rng) : 1.0);
        break;
      }
    }
  }

  s.features = Tensor3(cfg.feature_shape(), 0.0);
  const double amplitude = 1.0 + cfg.ground_jitter * (2.0 * unit(rng) - 1.0);
  std::vector<double> shift(cfg.features, 0.0);
  if (ood && cfg.ood.feature_mean_shift != 0.0 && cfg.ground_level == 0.0) {
    std::vector<std::size_t> channels(cfg.features);
    for (std::size_t f = 0; f < cfg.features; ++f) channels[f] = f;
    std::shuffle(channels.begin(), channels.end(), rng);
    const double mag = cfg.ood.feature_mean_shift * cfg.feature_noise_sigma;
    for (std::size_t i = 0; i < cfg.features; ++i) shift[channels[i]] = (i < cfg.features / 2) ? mag : -mag;
  }
  for (std::size_t f = 0; f < cfg.features; ++f) {
    auto plane = s.features.channel(f);
    for (auto& v : plane) v = shift[f] + (cfg.feature_noise_sigma > 0.0 ? cfg.feature_noise_sigma * n01(rng) : 0.0);
  }
  const auto& ground = ood ? basis->ground.ood : basis->ground.id;
  for (std::size_t r = 0; r < cfg.rows; ++r) {
    for (std::size_t k = 0; k < cfg.cols; ++k) {
      double occupancy = 0.0;
      for (const auto& b : s.objects) occupancy = std::max(occupancy, object_profile(b, r, k));
      const double free = amplitude * (1.0 - occupancy);
      for (std::size_t f = 0; f < cfg.features; ++f) s.features(f, r, k) += ground[f] * free;
    }
  }
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& b = s.objects[i];
    const auto& tpl = basis->templates[std::size_t(b.class_id)];
    for (std::size_t r = 0; r < cfg.rows; ++r) {
      for (std::size_t k = 0; k < cfg.cols; ++k) {
        const double prof = object_profile(b, r, k) * visibility[i];
        if (prof == 0.0) continue;
        for (std::size_t f = 0; f < cfg.features; ++f) s.features(f, r, k) += tpl[f] * prof;
      }
    }
  }
  s.target = splat_targets(s.objects, cfg);
  return s;
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct DatasetCounts {
  std::size_t train = 0;
  std::size_t test_id = 0;
  std::size_t test_ood = 0;
  std::size_t unlabeled = 0;

  std::size_t total() const { return train + test_id + test_ood + unlabeled; }
};

/// Scenes in a fixed order: train, test-ID, test-OOD, unlabeled (ID).
inline std::vector<SyntheticScene> generate_scenes(const WorldConfig& cfg, const DatasetCounts& counts) {
  cfg.validate();
  const WorldBasis basis(cfg);
  std::vector<SyntheticScene> out;
  out.reserve(counts.total());
  auto emit = [&](Domain d, Split s, std::size_t n, const char* prefix) {
    for (std::size_t i = 0; i < n; ++i) {
      std::ostringstream id;
      id << prefix << '-' << std::setw(5) << std::setfill('0') << i;
      out.push_back(generate_scene(cfg, d, s, scene_seed(cfg.seed, d, s, i), id.str(), &basis));
    }
  };
  emit(Domain::InDistribution, Split::Train, counts.train, "train");
  emit(Domain::InDistribution, Split::Test, counts.test_id, "test-id");
  emit(Domain::Ood, Split::Test, counts.test_ood, "test-ood");
  emit(Domain::InDistribution, Split::Unlabeled, counts.unlabeled, "unlabeled");
  return out;
}

inline nlohmann::json box_to_json(const BevBox& b, bool with_meta = false) {
  nlohmann::json j{{"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h}, {"class_id", b.class_id}};
  if (with_meta) {
    if (b.score) j["score"] = *b.score;
    j["provenance"] = to_string(b.provenance);
  }
  return j;
}

inline BevBox box_from_json(const nlohmann::json& j) {
  BevBox b{j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("w").get<double>(), j.at("h").get<double>(),
           j.at("class_id").get<int>(), std::nullopt, Provenance::GroundTruth};
  if (j.contains("score")) b.score = j.at("score").get<double>();
  if (j.contains("provenance")) {
    const auto p = j.at("provenance").get<std::string>();
    if (p == "predicted") b.provenance = Provenance::Predicted;
    else if (p == "pseudo") b.provenance = Provenance::Pseudo;
    else if (p == "verified") b.provenance = Provenance::Verified;
  }
  return b;
}

/// One JSONL line. Floats use the shortest representation that round-trips.
inline std::string scene_to_jsonl(const SyntheticScene& s) {
  nlohmann::json j;
  j["scene_id"] = s.scene_id;
  j["H"] = s.features.rows();
  j["D"] = s.features.cols();
  j["F"] = s.features.channels();
  j["C"] = s.target.shape().channels;
  j["domain"] = to_string(s.domain);
  j["split"] = to_string(s.split);
  j["labels_visible"] = s.labels_visible;
  j["objects"] = nlohmann::json::array();
  for (const auto& b : s.objects) j["objects"].push_back(box_to_json(b));
  j["features"] = s.features.vector();
  j["target_y"] = s.target.y.vector();
  j["target_soft"] = s.target.y_soft.vector();
  return j.dump();
}

inline SyntheticScene scene_from_json(const nlohmann::json& j) {
  SyntheticScene s;
  s.scene_id = j.at("scene_id").get<std::string>();
  const auto h = j.at("H").get<std::size_t>(), d = j.at("D").get<std::size_t>();
  const auto f = j.at("F").get<std::size_t>(), c = j.at("C").get<std::size_t>();
  s.domain = domain_from_string(j.at("domain").get<std::string>());
  s.split = split_from_string(j.at("split").get<std::string>());
  s.labels_visible = j.value("labels_visible", s.split != Split::Unlabeled);
  for (const auto& jb : j.at("objects")) s.objects.push_back(box_from_json(jb));
  s.features = Tensor3({f, h, d}, j.at("features").get<std::vector<double>>());
  s.target = TargetGrid(Tensor3({c, h, d}, j.at("target_y").get<std::vector<double>>()),
                        Tensor3({c, h, d}, j.at("target_soft").get<std::vector<double>>()));
  return s;
}

class Sha256 {
public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes) { EVP_DigestUpdate(ctx_, bytes.data(), bytes.size()); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
  }

private:
  EVP_MD_CTX* ctx_;
};

inline std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex();
}

nlohmann::json to_json(const WorldConfig& cfg);

struct Dataset {
  std::vector<SyntheticScene> scenes;
  nlohmann::json manifest;
};

inline nlohmann::json counts_to_json(const DatasetCounts& c) {
  return {{"train", c.train}, {"test_id", c.test_id}, {"test_ood", c.test_ood}, {"unlabeled", c.unlabeled}};
}

/// Generates the scenes, and optionally writes scenes.jsonl + manifest.json
/// into dir. The manifest is written last, through a temporary file, so a
/// failed run never leaves a manifest behind.
inline Dataset generate_dataset(const WorldConfig& cfg, const DatasetCounts& counts,
                                const std::optional<std::filesystem::path>& dir = std::nullopt) {
  namespace fs = std::filesystem;
  Dataset ds;
  ds.scenes = generate_scenes(cfg, counts);
  Sha256 digest;
  std::ofstream os;
  fs::path tmp_scenes;
  if (dir) {
    std::error_code ec;
    fs::create_directories(*dir, ec);
    tmp_scenes = *dir / "scenes.jsonl.tmp";
    os.open(tmp_scenes, std::ios::binary);
    if (!os) throw DataError("cannot write '" + tmp_scenes.string() + "'");
  }
  for (const auto& s : ds.scenes) {
    const std::string line = scene_to_jsonl(s) + '\n';
    digest.update(line);
    if (dir) os << line;
  }
  ds.manifest = {{"format", "edlbev-dataset"},
                 {"version", 1},
                 {"world", to_json(cfg)},
                 {"seed", cfg.seed},
                 {"counts", counts_to_json(counts)},
                 {"scene_file", "scenes.jsonl"},
                 {"digest", digest.hex()}};
  if (dir) {
    os.close();
    if (!os) throw DataError("write failed for '" + tmp_scenes.string() + "'");
    fs::rename(tmp_scenes, *dir / "scenes.jsonl");
    const fs::path tmp_manifest = *dir / "manifest.json.tmp";
    {
      std::ofstream ms(tmp_manifest);
      if (!ms) throw DataError("cannot write '" + tmp_manifest.string() + "'");
      ms << ds.manifest.dump(2) << '\n';
      if (!ms) throw DataError("write failed for '" + tmp_manifest.string() + "'");
    }
    fs::rename(tmp_manifest, *dir / "manifest.json");
  }
  return ds;
}

inline Dataset read_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  const auto manifest_path = dir / "manifest.json";
  std::ifstream ms(manifest_path);
  if (!ms) throw DataError("cannot read '" + manifest_path.string() + "'");
  try {
    ds.manifest = nlohmann::json::parse(ms);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + manifest_path.string() + "': " + e.what());
  }
  const auto scene_path = dir / ds.manifest.value("scene_file", std::string("scenes.jsonl"));
  std::ifstream is(scene_path, std::ios::binary);
  if (!is) throw DataError("cannot read '" + scene_path.string() + "'");
  Sha256 digest;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    digest.update(line + '\n');
    try {
      ds.scenes.push_back(scene_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(scene_path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (ds.manifest.value("digest", std::string()) != digest.hex()) {
    throw DataError("'" + scene_path.string() + "' does not match the manifest digest");
  }
  return ds;
}

// ---------------------------------------------------------------------------
// WorldConfig <-> JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const WorldConfig& c) {
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& s : c.class_sizes) sizes.push_back({s[0], s[1]});
  return {{"H", c.rows},
          {"D", c.cols},
          {"F", c.features},
          {"C", c.classes},
          {"objects_min", c.objects_min},
          {"objects_max", c.objects_max},
          {"class_mix", c.class_mix},
          {"class_sizes", sizes},
          {"size_jitter", c.size_jitter},
          {"signal", c.signal},
          {"feature_noise_sigma", c.feature_noise_sigma},
          {"sigma_splat", c.sigma_splat},
          {"ground_level", c.ground_level},
          {"ground_jitter", c.ground_jitter},
          {"occluded_fraction", c.occluded_fraction},
          {"occluded_visibility", c.occluded_visibility},
          {"ood_shift",
           {{"class_mix", c.ood.class_mix},
            {"feature_mean_shift", c.ood.feature_mean_shift},
            {"size_scale", c.ood.size_scale}}},
          {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, WorldConfig& c) {
  c.rows = j.value("H", c.rows);
  c.cols = j.value("D", c.cols);
  c.features = j.value("F", c.features);
  c.classes = j.value("C", c.classes);
  c.objects_min = j.value("objects_min", c.objects_min);
  c.objects_max = j.value("objects_max", c.objects_max);
  c.class_mix = j.value("class_mix", c.class_mix);
  if (j.contains("class_sizes")) {
    c.class_sizes.clear();
    for (const auto& s : j.at("class_sizes")) c.class_sizes.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
  }
  c.size_jitter = j.value("size_jitter", c.size_jitter);
  c.signal = j.value("signal", c.signal);
  c.feature_noise_sigma = j.value("feature_noise_sigma", c.feature_noise_sigma);
  c.sigma_splat = j.value("sigma_splat", c.sigma_splat);
  c.ground_level = j.value("ground_level", c.ground_level);
  c.ground_jitter = j.value("ground_jitter", c.ground_jitter);
  c.occluded_fraction = j.value("occluded_fraction", c.occluded_fraction);
  c.occluded_visibility = j.value("occluded_visibility", c.occluded_visibility);
  if (j.contains("ood_shift")) {
    const auto& o = j.at("ood_shift");
    c.ood.class_mix = o.value("class_mix", c.ood.class_mix);
    c.ood.feature_mean_shift = o.value("feature_mean_shift", c.ood.feature_mean_shift);
    c.ood.size_scale = o.value("size_scale", c.ood.size_scale);
  }
  c.seed = j.value("seed", c.seed);
}

} // namespace edlbev
