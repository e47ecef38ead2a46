#pragma once

// A per-cell multilayer head (1x1-convolution semantics: one MLP shared by
// every BEV cell), its reverse-mode gradient, first-order optimizers and a
// deterministic trainer.
//
// A [F x H x D] channel-major feature tensor is, bit for bit, a column-major
// (H*D) x F matrix, so scenes are fed to Eigen without copying.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edlbev/error.hpp"
#include "edlbev/evidential.hpp"
#include "edlbev/tensor.hpp"

namespace edlbev::net {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ConstMatrixMap = Eigen::Map<const Matrix>;

/// What the output layer means and which loss trains it.
enum class HeadKind {
  Evidential, // 2C outputs: first C are alpha logits, last C are beta logits
  Sigmoid,    // C outputs: per-class objectness logits (entropy baseline)
};

enum class Activation { Relu };

struct Layer {
  Matrix weight; // out x in
  Vector bias;   // out
};

struct HeadParameters {
  HeadKind kind = HeadKind::Evidential;
  Activation activation = Activation::Relu;
  std::vector<Layer> layers;

  std::size_t in_dim() const { return layers.empty() ? 0 : std::size_t(layers.front().weight.cols()); }
  std::size_t out_dim() const { return layers.empty() ? 0 : std::size_t(layers.back().weight.rows()); }
  std::size_t classes() const { return kind == HeadKind::Evidential ? out_dim() / 2 : out_dim(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += std::size_t(l.weight.size() + l.bias.size());
    return n;
  }

  void validate() const {
    if (layers.empty()) throw ShapeError("HeadParameters: no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      if (layers[k].bias.size() != layers[k].weight.rows()) {
        throw ShapeError("HeadParameters: bias/weight mismatch in layer " + std::to_string(k));
      }
      if (k > 0 && layers[k].weight.cols() != layers[k - 1].weight.rows()) {
        throw ShapeError("HeadParameters: layer " + std::to_string(k) + " input " +
                         std::to_string(layers[k].weight.cols()) + " does not chain to previous output " +
                         std::to_string(layers[k - 1].weight.rows()));
      }
    }
    if (kind == HeadKind::Evidential && out_dim() % 2 != 0) {
      throw ShapeError("HeadParameters: evidential head needs an even output width (2C)");
    }
  }

  /// Row-major flattening, layer by layer: weight then bias.
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& l : layers) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
    }
    return out;
  }

  void assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw ShapeError("HeadParameters::assign: wrong parameter count");
    std::size_t i = 0;
    for (auto& l : layers) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[i++];
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat[i++];
    }
  }

  friend bool operator==(const HeadParameters& a, const HeadParameters& b) {
    return a.kind == b.kind && a.activation == b.activation && a.layers.size() == b.layers.size() &&
           a.flatten() == b.flatten() && [&] {
             for (std::size_t k = 0; k < a.layers.size(); ++k)
               if (a.layers[k].weight.rows() != b.layers[k].weight.rows() ||
                   a.layers[k].weight.cols() != b.layers[k].weight.cols())
                 return false;
             return true;
           }();
  }
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
/// dims = {in, hidden..., out}.
inline HeadParameters init_head(std::span<const std::size_t> dims, HeadKind kind, std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("init_head: need at least input and output widths");
  std::mt19937_64 rng(seed);
  HeadParameters p;
  p.kind = kind;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto in = Eigen::Index(dims[k]);
    const auto out = Eigen::Index(dims[k + 1]);
    const double bound = 1.0 / std::sqrt(double(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Layer l{Matrix(out, in), Vector::Zero(out)};
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = dist(rng);
    p.layers.push_back(std::move(l));
  }
  p.validate();
  return p;
}

inline HeadParameters init_head(std::initializer_list<std::size_t> dims, HeadKind kind, std::uint64_t seed) {
  const std::vector<std::size_t> v(dims);
  return init_head(std::span<const std::size_t>(v), kind, seed);
}

inline ConstMatrixMap as_cell_matrix(const Tensor3& features) {
  return ConstMatrixMap(features.values().data(), Eigen::Index(features.shape().cells()),
                        Eigen::Index(features.channels()));
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

/// Activations kept for the backward pass. pre[k] is layer k's output before
/// the nonlinearity; the last entry is the raw head output (N x out).
struct ForwardCache {
  std::vector<Matrix> pre;
};

template <class Derived>
Matrix forward_matrix(const HeadParameters& params, const Eigen::MatrixBase<Derived>& x, ForwardCache* cache = nullptr) {
  if (std::size_t(x.cols()) != params.in_dim()) {
    throw ShapeError("head forward: input width " + std::to_string(x.cols()) + " != head input " +
                     std::to_string(params.in_dim()));
  }
  Matrix act = x;
  if (cache) cache->pre.clear();
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& l = params.layers[k];
    Matrix z = act * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    if (cache) cache->pre.push_back(z);
    if (k + 1 < params.layers.size()) {
      act = z.cwiseMax(0.0);
    } else {
      act = std::move(z);
    }
  }
  return act;
}

struct HeadGradient {
  std::vector<Matrix> d_weight;
  std::vector<Vector> d_bias;

  std::vector<double> flatten() const {
    std::vector<double> out;
    for (std::size_t k = 0; k < d_weight.size(); ++k) {
      for (Eigen::Index r = 0; r < d_weight[k].rows(); ++r)
        for (Eigen::Index c = 0; c < d_weight[k].cols(); ++c) out.push_back(d_weight[k](r, c));
      for (Eigen::Index r = 0; r < d_bias[k].size(); ++r) out.push_back(d_bias[k](r));
    }
    return out;
  }
};

inline HeadGradient zero_gradient(const HeadParameters& params) {
  HeadGradient g;
  for (const auto& l : params.layers) {
    g.d_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.d_bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

/// Accumulates dLoss/dparams into grad given dLoss/d(output).
template <class Derived>
void backward_matrix(const HeadParameters& params, const Eigen::MatrixBase<Derived>& x, const ForwardCache& cache,
                     Matrix d_out, HeadGradient& grad) {
  const std::size_t n_layers = params.layers.size();
  Matrix dz = std::move(d_out);
  for (std::size_t k = n_layers; k-- > 0;) {
    if (k > 0) {
      const Matrix a_prev = cache.pre[k - 1].cwiseMax(0.0);
      grad.d_weight[k].noalias() += dz.transpose() * a_prev;
    } else {
      grad.d_weight[k].noalias() += dz.transpose() * x;
    }
    grad.d_bias[k] += dz.colwise().sum().transpose();
    if (k > 0) {
      Matrix da = dz * params.layers[k].weight;
      const Matrix& z_prev = cache.pre[k - 1];
      dz = da.cwiseProduct((z_prev.array() > 0.0).cast<double>().matrix());
    }
  }
}

/// Split head output into the two evidence-logit tensors [C x H x D].
struct EvidenceLogits {
  Tensor3 e_a;
  Tensor3 e_b;
};

inline Tensor3 column_block_to_grid(const Matrix& out, std::size_t first_col, std::size_t count, std::size_t rows,
                                    std::size_t cols) {
  Tensor3 t({count, rows, cols});
  const std::size_t n = rows * cols;
  for (std::size_t c = 0; c < count; ++c)
    for (std::size_t i = 0; i < n; ++i) t[c * n + i] = out(Eigen::Index(i), Eigen::Index(first_col + c));
  return t;
}

inline EvidenceLogits head_forward(const HeadParameters& params, const Tensor3& features) {
  params.validate();
  if (params.kind != HeadKind::Evidential) throw ConfigError("head_forward: not an evidential head");
  if (features.channels() != params.in_dim()) {
    throw ShapeError("head_forward: feature channels " + std::to_string(features.channels()) + " != head input " +
                     std::to_string(params.in_dim()));
  }
  const Matrix out = forward_matrix(params, as_cell_matrix(features));
  const std::size_t c = params.classes();
  return {column_block_to_grid(out, 0, c, features.rows(), features.cols()),
          column_block_to_grid(out, c, c, features.rows(), features.cols())};
}

inline EvidenceGrid predict_evidence(const HeadParameters& params, const Tensor3& features) {
  const auto logits = head_forward(params, features);
  return evidence_from_logits(logits.e_a, logits.e_b);
}

/// Sigmoid probabilities of a baseline head, [C x H x D].
inline Tensor3 predict_sigmoid(const HeadParameters& params, const Tensor3& features) {
  params.validate();
  if (params.kind != HeadKind::Sigmoid) throw ConfigError("predict_sigmoid: not a sigmoid head");
  if (features.channels() != params.in_dim()) throw ShapeError("predict_sigmoid: feature/head width mismatch");
  const Matrix out = forward_matrix(params, as_cell_matrix(features));
  Tensor3 p = column_block_to_grid(out, 0, params.out_dim(), features.rows(), features.cols());
  for (auto& v : p.values()) v = specfun::sigmoid(v);
  return p;
}

/// Per-cell probability for either head kind: alpha/(alpha+beta) or sigmoid.
inline Tensor3 predict_probability(const HeadParameters& params, const Tensor3& features) {
  if (params.kind == HeadKind::Evidential) return predict_prob(predict_evidence(params, features));
  return predict_sigmoid(params, features);
}

// ---------------------------------------------------------------------------
// Loss on head outputs
// ---------------------------------------------------------------------------

/// One training scene: per-cell inputs [in x H x D], targets [C x H x D] and
/// an optional per-entry weight mask (same shape as the targets).
struct Example {
  const Tensor3* inputs = nullptr;
  const TargetGrid* target = nullptr;
  const Tensor3* mask = nullptr;
};

struct OutputLoss {
  long double value = 0.0L;
  Matrix d_out;
  std::optional<std::size_t> bad_entry; // first non-finite (class * cells + cell)
};

inline OutputLoss output_loss(const HeadParameters& params, const Matrix& out, const Example& ex,
                              const LossConfig& cfg, bool want_grad) {
  const TargetGrid& t = *ex.target;
  const std::size_t n = t.shape().cells();
  const std::size_t c = t.shape().channels;
  if (params.classes() != c || std::size_t(out.rows()) != n) {
    throw ShapeError("output_loss: head/target shape mismatch");
  }
  OutputLoss res;
  if (want_grad) res.d_out = Matrix::Zero(out.rows(), out.cols());
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = k * n + i;
      const double w = ex.mask ? (*ex.mask)[idx] : 1.0;
      if (w == 0.0) continue;
      const double y = t.y[idx], ys = t.y_soft[idx];
      double v;
      if (params.kind == HeadKind::Evidential) {
        const double ea = out(Eigen::Index(i), Eigen::Index(k));
        const double eb = out(Eigen::Index(i), Eigen::Index(c + k));
        const double a = specfun::softplus(ea) + 1.0;
        const double b = specfun::softplus(eb) + 1.0;
        v = term::combined(a, b, y, ys, cfg);
        if (want_grad) {
          const auto [da, db] = term::combined_grad(a, b, y, ys, cfg);
          res.d_out(Eigen::Index(i), Eigen::Index(k)) = w * da * specfun::sigmoid(ea);
          res.d_out(Eigen::Index(i), Eigen::Index(c + k)) = w * db * specfun::sigmoid(eb);
        }
      } else {
        const double z = out(Eigen::Index(i), Eigen::Index(k));
        v = term::gaussian_focal(z, y, ys, cfg);
        if (want_grad) res.d_out(Eigen::Index(i), Eigen::Index(k)) = w * term::gaussian_focal_grad(z, y, ys, cfg);
      }
      if (!std::isfinite(v) && !res.bad_entry) res.bad_entry = idx;
      res.value += w * v;
    }
  }
  return res;
}

inline double example_loss(const HeadParameters& params, const Example& ex, const LossConfig& cfg) {
  const Matrix out = forward_matrix(params, as_cell_matrix(*ex.inputs));
  return double(output_loss(params, out, ex, cfg, false).value);
}

struct LossAndGradient {
  double loss = 0.0;
  HeadGradient grad;
};

inline LossAndGradient loss_and_gradient(const HeadParameters& params, std::span<const Example> batch,
                                         const LossConfig& cfg, std::size_t step = 0) {
  LossAndGradient res{0.0, zero_gradient(params)};
  long double total = 0.0L;
  for (const auto& ex : batch) {
    const auto x = as_cell_matrix(*ex.inputs);
    ForwardCache cache;
    const Matrix out = forward_matrix(params, x, &cache);
    OutputLoss ol = output_loss(params, out, ex, cfg, true);
    if (ol.bad_entry) {
      const std::size_t cells = ex.target->shape().cells();
      const std::size_t cls = *ol.bad_entry / cells, cell = *ol.bad_entry % cells;
      const std::size_t cols = ex.target->shape().cols;
      std::ostringstream msg;
      msg << "non-finite loss at step " << step << ", class " << cls << ", cell (" << cell / cols << ", "
          << cell % cols << ")";
      throw NumericError(msg.str());
    }
    total += ol.value;
    backward_matrix(params, x, cache, std::move(ol.d_out), res.grad);
  }
  res.loss = double(total);
  return res;
}

// ---------------------------------------------------------------------------
// Optimizers and trainer
// ---------------------------------------------------------------------------

enum class Optimizer { GradientDescent, Adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t steps = 400;
  std::size_t batch_scenes = 8;
  std::uint64_t seed = 0; // drives the scene order
  Optimizer optimizer = Optimizer::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be > 0");
    if (steps < 1) throw ConfigError("TrainConfig: steps must be >= 1");
    if (batch_scenes < 1) throw ConfigError("TrainConfig: batch_scenes must be >= 1");
  }
};

class AdamState {
public:
  explicit AdamState(const HeadParameters& p) : m_(zero_gradient(p)), v_(zero_gradient(p)) {}

  void step(HeadParameters& p, const HeadGradient& g, const TrainConfig& cfg) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg.beta1, double(t_));
    const double c2 = 1.0 - std::pow(cfg.beta2, double(t_));
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
      update(p.layers[k].weight, m_.d_weight[k], v_.d_weight[k], g.d_weight[k], cfg, c1, c2);
      update(p.layers[k].bias, m_.d_bias[k], v_.d_bias[k], g.d_bias[k], cfg, c1, c2);
    }
  }

private:
  template <class P, class G>
  static void update(P& param, P& m, P& v, const G& g, const TrainConfig& cfg, double c1, double c2) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    param.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
  }

  HeadGradient m_, v_;
  std::size_t t_ = 0;
};

/// Deterministic epoch-shuffled scene order.
class BatchSampler {
public:
  BatchSampler(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    reshuffle();
  }

  std::vector<std::size_t> next(std::size_t count) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < count && !order_.empty(); ++i) {
      if (pos_ == order_.size()) reshuffle();
      out.push_back(order_[pos_++]);
    }
    return out;
  }

private:
  void reshuffle() {
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }
  std::vector<std::size_t> order_;
  std::mt19937_64 rng_;
  std::size_t pos_ = 0;
};

/// Trains a copy of params and returns it.
/// history, when given, receives the batch loss of every step.
inline HeadParameters train_head(HeadParameters params, std::span<const Example> data, const TrainConfig& cfg,
                                 const LossConfig& loss_cfg, std::vector<double>* history = nullptr) {
  cfg.validate();
  loss_cfg.validate();
  params.validate();
  if (data.empty()) throw DataError("train_head: no training scenes");
  const Shape3 first_in = data.front().inputs->shape();
  const Shape3 first_t = data.front().target->shape();
  for (const auto& ex : data) {
    if (ex.inputs->rows() != first_in.rows || ex.inputs->cols() != first_in.cols ||
        ex.inputs->channels() != first_in.channels || !(ex.target->shape() == first_t)) {
      throw ShapeError("train_head: scenes do not share grid and feature dimensions");
    }
  }
  if (first_in.channels != params.in_dim()) throw ShapeError("train_head: feature width != head input");

  BatchSampler sampler(data.size(), cfg.seed);
  AdamState adam(params);
  std::vector<Example> batch;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    batch.clear();
    for (std::size_t idx : sampler.next(cfg.batch_scenes)) batch.push_back(data[idx]);
    auto lg = loss_and_gradient(params, batch, loss_cfg, step);
    if (!std::isfinite(lg.loss)) throw NumericError("non-finite loss at step " + std::to_string(step));
    if (history) history->push_back(lg.loss);
    if (cfg.optimizer == Optimizer::Adam) {
      adam.step(params, lg.grad, cfg);
    } else {
      for (std::size_t k = 0; k < params.layers.size(); ++k) {
        params.layers[k].weight -= cfg.learning_rate * lg.grad.d_weight[k];
        params.layers[k].bias -= cfg.learning_rate * lg.grad.d_bias[k];
      }
    }
  }
  return params;
}

/// Signs of every hidden pre-activation, one entry per (cell, unit).
inline std::vector<bool> relu_pattern(const HeadParameters& params, const Tensor3& inputs) {
  ForwardCache cache;
  forward_matrix(params, as_cell_matrix(inputs), &cache);
  std::vector<bool> out;
  for (std::size_t k = 0; k + 1 < cache.pre.size(); ++k)
    for (Eigen::Index i = 0; i < cache.pre[k].size(); ++i) out.push_back(cache.pre[k].data()[i] > 0.0);
  return out;
}

/// Maximum relative error between backpropagated parameter gradients and
/// central finite differences (step h) on up to max_params sampled
/// parameters. Relative error is |g - fd| / max(|g|, |fd|, floor).
/// Parameters whose +-h probes flip a ReLU somewhere are skipped (the
/// difference quotient straddles a kink there) and counted in *kinks.
inline double grad_check(const HeadParameters& params, const Example& scene, const LossConfig& loss_cfg,
                         std::uint64_t seed = 0, std::size_t max_params = 200, double h = 1e-5,
                         double floor = 1e-6, std::size_t* kinks = nullptr) {
  const Example batch[1] = {scene};
  const auto analytic = loss_and_gradient(params, batch, loss_cfg).grad.flatten();
  std::vector<std::size_t> idx(analytic.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (idx.size() > max_params) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(max_params);
  }
  const std::vector<double> base = params.flatten();
  HeadParameters probe = params;
  std::vector<double> flat = base;
  double worst = 0.0;
  const auto pattern = relu_pattern(params, *scene.inputs);
  if (kinks) *kinks = 0;
  // Rounding in a loss of size |L| leaves about eps |L| / h of noise in each
  // difference; components far below that cannot be resolved at 1e-4.
  const double noise_floor =
      1e4 * std::numeric_limits<double>::epsilon() * std::abs(example_loss(params, scene, loss_cfg)) / h;
  for (std::size_t i : idx) {
    flat[i] = base[i] + h;
    probe.assign(flat);
    const double up = example_loss(probe, scene, loss_cfg);
    const bool flip_up = relu_pattern(probe, *scene.inputs) != pattern;
    flat[i] = base[i] - h;
    probe.assign(flat);
    const double down = example_loss(probe, scene, loss_cfg);
    const bool flip_down = relu_pattern(probe, *scene.inputs) != pattern;
    flat[i] = base[i];
    if (flip_up || flip_down) {
      if (kinks) ++*kinks;
      continue;
    }
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(fd), floor, noise_floor});
    worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
  }
  return worst;
}

/// count members; member i is initialized from seed base_seed + i and all
/// members share cfg's scene order.
inline std::vector<HeadParameters> train_ensemble(std::size_t count, std::span<const std::size_t> dims, HeadKind kind,
                                                  std::uint64_t base_seed, std::span<const Example> data,
                                                  const TrainConfig& cfg, const LossConfig& loss_cfg) {
  if (count < 2) throw ConfigError("train_ensemble: count must be >= 2");
  std::vector<HeadParameters> members;
  for (std::size_t i = 0; i < count; ++i) {
    members.push_back(train_head(init_head(dims, kind, base_seed + i), data, cfg, loss_cfg));
  }
  return members;
}

// ---------------------------------------------------------------------------
// Checkpoints: JSON, shortest round-trip doubles, so reload is bit-exact.
// ---------------------------------------------------------------------------

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json to_json(const HeadParameters& p) {
  nlohmann::json j;
  j["format"] = "edlbev-head";
  j["version"] = kCheckpointVersion;
  j["kind"] = p.kind == HeadKind::Evidential ? "evidential" : "sigmoid";
  j["activation"] = "relu";
  j["layers"] = nlohmann::json::array();
  for (const auto& l : p.layers) {
    nlohmann::json jl;
    jl["out"] = l.weight.rows();
    jl["in"] = l.weight.cols();
    std::vector<double> w;
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    jl["weight"] = w;
    jl["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    j["layers"].push_back(std::move(jl));
  }
  return j;
}

inline HeadParameters from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "edlbev-head") throw DataError("checkpoint: not an edlbev head");
  if (j.value("version", 0) != kCheckpointVersion) throw DataError("checkpoint: unsupported version");
  HeadParameters p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "evidential") p.kind = HeadKind::Evidential;
  else if (kind == "sigmoid") p.kind = HeadKind::Sigmoid;
  else throw DataError("checkpoint: unknown head kind '" + kind + "'");
  for (const auto& jl : j.at("layers")) {
    const auto out = jl.at("out").get<Eigen::Index>();
    const auto in = jl.at("in").get<Eigen::Index>();
    const auto w = jl.at("weight").get<std::vector<double>>();
    const auto b = jl.at("bias").get<std::vector<double>>();
    if (w.size() != std::size_t(out * in) || b.size() != std::size_t(out)) {
      throw DataError("checkpoint: layer payload does not match its declared shape");
    }
    Layer l{Matrix(out, in), Vector(out)};
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = w[std::size_t(r * in + c)];
    for (Eigen::Index r = 0; r < out; ++r) l.bias(r) = b[std::size_t(r)];
    p.layers.push_back(std::move(l));
  }
  p.validate();
  return p;
}

inline void save_checkpoint(const std::string& path, const HeadParameters& p) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write checkpoint '" + path + "'");
  os << to_json(p).dump() << '\n';
  if (!os) throw DataError("write failed for checkpoint '" + path + "'");
}

inline HeadParameters load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read checkpoint '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint '" + path + "': " + e.what());
  }
}

} // namespace edlbev::net
