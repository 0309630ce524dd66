// Copyright 2026 The AXIMS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "axims/errors.hpp"
#include "axims/nn/fixed_point.hpp"
#include "axims/nn/smote.hpp"
#include "axims/random.hpp"

namespace axims {

struct DenseLayer {
  Eigen::MatrixXd w;     // out x in
  Eigen::VectorXd b;     // out
  Eigen::MatrixXd mask;  // 1 keeps a weight, 0 prunes it

  Eigen::Index in() const noexcept { return w.cols(); }
  Eigen::Index out() const noexcept { return w.rows(); }
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double lambda = 0.0;
  double learning_rate = 0.0;
  int batch_size = 0;
  double sparsity_target = 0.0;
};

// Hidden layers use ReLU; the last layer is a single sigmoid unit.
struct MlpModel {
  std::vector<DenseLayer> layers;
  TrainingMeta meta;

  std::size_t input_dim() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().in()); }

  void validate() const {
    if (layers.empty()) throw DimensionError("model has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      if (L.b.size() != L.out() || L.mask.rows() != L.out() || L.mask.cols() != L.in()) {
        throw DimensionError("layer " + std::to_string(l) + " has inconsistent shapes");
      }
      if (l > 0 && L.in() != layers[l - 1].out()) {
        throw DimensionError("layer " + std::to_string(l) + " input does not chain");
      }
    }
    if (layers.back().out() != 1) throw DimensionError("output layer must have one unit");
  }
};

inline const std::vector<int> kDefaultHidden = {32, 32};

// He-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
inline MlpModel make_mlp(int input_dim, const std::vector<int>& hidden, std::uint64_t seed) {
  if (input_dim < 1) throw DimensionError("input dimension must be positive");
  Rng rng(derive_seed(seed, 0x1A17));
  MlpModel m;
  int in = input_dim;
  std::vector<int> sizes = hidden;
  sizes.push_back(1);
  for (int out : sizes) {
    if (out < 1) throw DimensionError("layer widths must be positive");
    DenseLayer L;
    const double lim = std::sqrt(6.0 / in);
    L.w.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) L.w(r, c) = rng.uniform(-lim, lim);
    }
    L.b = Eigen::VectorXd::Zero(out);
    L.mask = Eigen::MatrixXd::Ones(out, in);
    m.layers.push_back(std::move(L));
    in = out;
  }
  m.meta.seed = seed;
  return m;
}

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// BCE on a logit, computed as softplus(z) - y*z.
inline double bce_from_logit(double z, double y) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
}

// Quantization applied inside the forward pass. Empty formats leave the
// network in full precision.
struct QuantSpec {
  std::optional<FixedFormat> weight;
  std::optional<FixedFormat> activation;
};

namespace detail {

inline Eigen::MatrixXd quantize_matrix(const Eigen::MatrixXd& m, const std::optional<FixedFormat>& f) {
  if (!f) return m;
  return m.unaryExpr([&](double v) { return fake_quantize(v, *f); });
}

inline Eigen::VectorXd quantize_vector(const Eigen::VectorXd& v, const std::optional<FixedFormat>& f) {
  if (!f) return v;
  return v.unaryExpr([&](double x) { return fake_quantize(x, *f); });
}

struct Forward {
  std::vector<Eigen::MatrixXd> weights;  // effective (masked, quantized)
  std::vector<Eigen::MatrixXd> acts;     // acts[0] = input, acts[l+1] = output of layer l
  Eigen::RowVectorXd logits;
};

// Columns of `x_t` are samples.
inline Forward forward(const MlpModel& m, const Eigen::MatrixXd& x_t, const QuantSpec& q) {
  Forward f;
  f.acts.push_back(quantize_matrix(x_t, q.activation));
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& L = m.layers[l];
    f.weights.push_back(quantize_matrix(L.w.cwiseProduct(L.mask), q.weight));
    const Eigen::VectorXd b = quantize_vector(L.b, q.weight);
    Eigen::MatrixXd z = f.weights.back() * f.acts.back();
    z.colwise() += b;
    z = quantize_matrix(z, q.activation);
    if (l + 1 < m.layers.size()) z = z.cwiseMax(0.0);
    f.acts.push_back(std::move(z));
  }
  f.logits = f.acts.back().row(0);
  return f;
}

}  // namespace detail

struct Gradients {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

// Mean BCE plus lambda * sum of squared (masked) weights, with gradients.
// Quantizers are treated as identity in the backward pass.
inline double loss_and_gradients(const MlpModel& m, const Eigen::MatrixXd& x, const std::vector<int>& y,
                                 double lambda, Gradients* g, const QuantSpec& q = {}) {
  const auto n = x.rows();
  if (n == 0) throw InsufficientData("empty batch");
  if (x.cols() != static_cast<Eigen::Index>(m.input_dim())) throw DimensionError("batch width does not match model");
  const detail::Forward f = detail::forward(m, x.transpose(), q);
  double loss = 0.0;
  Eigen::MatrixXd delta(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = f.logits(i);
    const double t = y[static_cast<std::size_t>(i)];
    loss += bce_from_logit(z, t);
    delta(0, i) = (sigmoid(z) - t) / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  for (const auto& L : m.layers) loss += lambda * L.w.cwiseProduct(L.mask).squaredNorm();
  if (!g) return loss;

  const std::size_t nl = m.layers.size();
  g->w.assign(nl, {});
  g->b.assign(nl, {});
  for (std::size_t l = nl; l-- > 0;) {
    const auto& L = m.layers[l];
    g->w[l] = (delta * f.acts[l].transpose() + 2.0 * lambda * L.w.cwiseProduct(L.mask)).cwiseProduct(L.mask);
    g->b[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = f.weights[l].transpose() * delta;
    delta = back.cwiseProduct((f.acts[l].array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

struct TrainOptions {
  int epochs = 200;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  int batch_size = 64;
  double lambda = 1e-4;
  std::uint64_t seed = 0;
  std::vector<int> hidden = kDefaultHidden;
  QuantSpec quant;
  double sparsity_target = 0.0;
  double prune_ramp_fraction = 0.5;  // masks freeze after this share of epochs
  std::function<void(int epoch, double loss)> on_epoch;
  std::optional<MlpModel> initial;  // start from these weights instead of a fresh init

  void validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (!(sparsity_target >= 0.0 && sparsity_target < 1.0)) throw ConfigError("sparsity target must be in [0, 1)");
    if (!(prune_ramp_fraction > 0.0 && prune_ramp_fraction <= 1.0)) throw ConfigError("prune ramp must be in (0, 1]");
    if (quant.weight) quant.weight->validate();
    if (quant.activation) quant.activation->validate();
  }
};

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_curve;  // [0] before training, [e] after epoch e
};

inline double dataset_loss(const MlpModel& m, const LabeledSet& s, double lambda, const QuantSpec& q = {}) {
  return loss_and_gradients(m, s.x, s.y, lambda, nullptr, q);
}

inline double weight_norm(const MlpModel& m) {
  double s = 0.0;
  for (const auto& L : m.layers) s += L.w.squaredNorm();
  return std::sqrt(s);
}

inline double sparsity(const MlpModel& m) {
  std::size_t zero = 0, total = 0;
  for (const auto& L : m.layers) {
    zero += static_cast<std::size_t>((L.w.array() == 0.0).count());
    total += static_cast<std::size_t>(L.w.size());
  }
  return total ? static_cast<double>(zero) / static_cast<double>(total) : 0.0;
}

namespace detail {

// Masks the smallest-magnitude `fraction` of a layer. Already-masked
// entries rank first, so a pruned weight never comes back.
inline void prune_layer(DenseLayer& L, double fraction) {
  const auto n = static_cast<std::size_t>(L.w.size());
  const auto target = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double* w = L.w.data();
  const double* mk = L.mask.data();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (mk[a] != mk[b]) return mk[a] < mk[b];
    return std::abs(w[a]) < std::abs(w[b]);
  });
  for (std::size_t i = 0; i < std::min(target, n); ++i) L.mask.data()[order[i]] = 0.0;
  L.w = L.w.cwiseProduct(L.mask);
}

}  // namespace detail

// Mini-batch Adam on mean BCE + L2. With a sparsity target, per-layer
// magnitude pruning follows s_e = target * (1 - (1 - e/E_r)^3) at the start
// of epochs 1..E_r and masks are frozen afterwards.
inline TrainResult train(const LabeledSet& data, const TrainOptions& opt) {
  opt.validate();
  if (data.size() == 0) throw InsufficientData("training set is empty");
  TrainResult res;
  if (opt.initial) {
    opt.initial->validate();
    if (opt.initial->input_dim() != data.dim()) throw DimensionError("initial model does not match the data width");
    res.model = *opt.initial;
  } else {
    res.model = make_mlp(static_cast<int>(data.dim()), opt.hidden, opt.seed);
  }
  auto& m = res.model;
  m.meta = {opt.seed, opt.epochs, opt.lambda, opt.learning_rate, opt.batch_size, opt.sparsity_target};
  res.loss_curve.push_back(dataset_loss(m, data, opt.lambda, opt.quant));
  if (opt.epochs == 0) return res;

  const std::size_t nl = m.layers.size();
  std::vector<Eigen::MatrixXd> mw(nl), vw(nl);
  std::vector<Eigen::VectorXd> mb(nl), vb(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    mw[l] = vw[l] = Eigen::MatrixXd::Zero(m.layers[l].out(), m.layers[l].in());
    mb[l] = vb[l] = Eigen::VectorXd::Zero(m.layers[l].out());
  }
  const int ramp_end = std::max(1, static_cast<int>(std::lround(opt.prune_ramp_fraction * opt.epochs)));
  Rng rng(derive_seed(opt.seed, 0xBA7C4));
  std::vector<Eigen::Index> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Eigen::MatrixXd xb;
  std::vector<int> yb;
  Gradients g;
  std::uint64_t step = 0;

  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    if (opt.sparsity_target > 0.0 && epoch <= ramp_end) {
      const double r = 1.0 - static_cast<double>(epoch) / ramp_end;
      const double s = opt.sparsity_target * (1.0 - r * r * r);
      for (auto& L : m.layers) detail::prune_layer(L, s);
      for (std::size_t l = 0; l < nl; ++l) {
        mw[l] = mw[l].cwiseProduct(m.layers[l].mask);
        vw[l] = vw[l].cwiseProduct(m.layers[l].mask);
      }
    }
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opt.batch_size));
      xb.resize(static_cast<Eigen::Index>(end - start), data.x.cols());
      yb.resize(end - start);
      for (std::size_t i = start; i < end; ++i) {
        xb.row(static_cast<Eigen::Index>(i - start)) = data.x.row(order[i]);
        yb[i - start] = data.y[static_cast<std::size_t>(order[i])];
      }
      loss_and_gradients(m, xb, yb, opt.lambda, &g, opt.quant);
      ++step;
      const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
      const double a = opt.learning_rate;
      for (std::size_t l = 0; l < nl; ++l) {
        auto& L = m.layers[l];
        mw[l] = opt.beta1 * mw[l] + (1.0 - opt.beta1) * g.w[l];
        vw[l] = opt.beta2 * vw[l] + (1.0 - opt.beta2) * g.w[l].cwiseAbs2();
        L.w.array() -= a * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + opt.epsilon);
        L.w = L.w.cwiseProduct(L.mask);
        mb[l] = opt.beta1 * mb[l] + (1.0 - opt.beta1) * g.b[l];
        vb[l] = opt.beta2 * vb[l] + (1.0 - opt.beta2) * g.b[l].cwiseAbs2();
        L.b.array() -= a * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + opt.epsilon);
      }
    }
    const double loss = dataset_loss(m, data, opt.lambda, opt.quant);
    if (!std::isfinite(loss)) throw NumericError("training loss is not finite at epoch " + std::to_string(epoch));
    res.loss_curve.push_back(loss);
    if (opt.on_epoch) opt.on_epoch(epoch, loss);
  }
  return res;
}

inline double infer(const MlpModel& m, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != m.input_dim()) {
    throw DimensionError("input has " + std::to_string(v.size()) + " values, model expects " +
                         std::to_string(m.input_dim()));
  }
  Eigen::VectorXd a = v;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& L = m.layers[l];
    a = L.w.cwiseProduct(L.mask) * a + L.b;
    if (l + 1 < m.layers.size()) a = a.cwiseMax(0.0);
  }
  return sigmoid(a(0));
}

}  // namespace axims
