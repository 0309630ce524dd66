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

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axims/errors.hpp"
#include "axims/nn/fixed_point.hpp"
#include "axims/nn/mlp.hpp"

namespace axims {

inline constexpr int kModelVersion = 1;

// Integer layer in CSR form. Codes are signed W-bit values; `mask` records
// which positions survived pruning (a kept weight may still round to 0).
struct QuantizedLayer {
  int rows = 0;
  int cols = 0;
  std::vector<std::int32_t> bias;
  std::vector<std::uint8_t> mask;  // row-major rows x cols
  std::vector<std::int32_t> row_ptr;
  std::vector<std::int32_t> col_idx;
  std::vector<std::int32_t> values;

  static QuantizedLayer from_dense(int rows, int cols, const std::vector<std::int32_t>& codes,
                                   std::vector<std::int32_t> bias, std::vector<std::uint8_t> mask) {
    QuantizedLayer q;
    q.rows = rows;
    q.cols = cols;
    q.bias = std::move(bias);
    q.mask = std::move(mask);
    q.row_ptr.push_back(0);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const auto v = codes[static_cast<std::size_t>(r * cols + c)];
        if (v != 0) {
          q.col_idx.push_back(c);
          q.values.push_back(v);
        }
      }
      q.row_ptr.push_back(static_cast<std::int32_t>(q.values.size()));
    }
    return q;
  }

  std::vector<std::int32_t> dense() const {
    std::vector<std::int32_t> d(static_cast<std::size_t>(rows * cols), 0);
    for (int r = 0; r < rows; ++r) {
      for (auto i = row_ptr[static_cast<std::size_t>(r)]; i < row_ptr[static_cast<std::size_t>(r) + 1]; ++i) {
        d[static_cast<std::size_t>(r * cols + col_idx[static_cast<std::size_t>(i)])] = values[static_cast<std::size_t>(i)];
      }
    }
    return d;
  }

  std::size_t nonzeros() const noexcept { return values.size(); }

  friend bool operator==(const QuantizedLayer&, const QuantizedLayer&) = default;
};

struct QuantizedMlpModel {
  FixedFormat weight_format;
  FixedFormat activation_format = kActivationFormat;
  std::vector<QuantizedLayer> layers;
  TrainingMeta meta;

  std::size_t input_dim() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().cols); }

  double sparsity() const {
    std::size_t nz = 0, total = 0;
    for (const auto& L : layers) {
      nz += L.nonzeros();
      total += static_cast<std::size_t>(L.rows * L.cols);
    }
    return total ? 1.0 - static_cast<double>(nz) / static_cast<double>(total) : 0.0;
  }

  void validate() const {
    weight_format.validate();
    activation_format.validate();
    if (layers.empty()) throw DimensionError("model has no layers");
    if (layers.back().rows != 1) throw DimensionError("output layer must have one unit");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      if (l > 0 && L.cols != layers[l - 1].rows) throw DimensionError("layer " + std::to_string(l) + " does not chain");
      if (L.bias.size() != static_cast<std::size_t>(L.rows) || L.mask.size() != static_cast<std::size_t>(L.rows * L.cols) ||
          L.row_ptr.size() != static_cast<std::size_t>(L.rows) + 1) {
        throw DimensionError("layer " + std::to_string(l) + " has inconsistent shapes");
      }
      auto in_range = [&](std::int64_t c) { return c >= weight_format.min_code() && c <= weight_format.max_code(); };
      for (auto v : L.values) {
        if (!in_range(v)) throw FormatError("weight code out of " + weight_format.to_string() + " range");
      }
      for (auto v : L.bias) {
        if (!in_range(v)) throw FormatError("bias code out of " + weight_format.to_string() + " range");
      }
      // Accumulator: products use W_w + W_a bits, the sum adds ceil(log2 fan-in) + 1.
      const int fan_bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(L.cols) + 1.0))) + 1;
      if (weight_format.total_bits + activation_format.total_bits + fan_bits > 63) {
        throw FormatError("layer " + std::to_string(l) + " would overflow the 64-bit accumulator");
      }
    }
  }

  friend bool operator==(const QuantizedMlpModel& a, const QuantizedMlpModel& b) {
    return a.weight_format == b.weight_format && a.activation_format == b.activation_format && a.layers == b.layers &&
           a.meta.seed == b.meta.seed && a.meta.epochs == b.meta.epochs && a.meta.lambda == b.meta.lambda &&
           a.meta.learning_rate == b.meta.learning_rate && a.meta.batch_size == b.meta.batch_size &&
           a.meta.sparsity_target == b.meta.sparsity_target;
  }
};

// Rounds every weight and bias of `m` (after masking) into `fmt`.
inline QuantizedMlpModel quantize_model(const MlpModel& m, const FixedFormat& fmt,
                                        const FixedFormat& act = kActivationFormat) {
  fmt.validate();
  act.validate();
  m.validate();
  QuantizedMlpModel q;
  q.weight_format = fmt;
  q.activation_format = act;
  q.meta = m.meta;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& L = m.layers[l];
    const int rows = static_cast<int>(L.out()), cols = static_cast<int>(L.in());
    std::vector<std::int32_t> codes(static_cast<std::size_t>(rows * cols));
    std::vector<std::uint8_t> mask(codes.size());
    bool any = false;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const auto i = static_cast<std::size_t>(r * cols + c);
        mask[i] = L.mask(r, c) != 0.0;
        codes[i] = mask[i] ? static_cast<std::int32_t>(quantize_value(L.w(r, c), fmt)) : 0;
        any = any || codes[i] != 0;
      }
    }
    if (!any) {
      throw FormatError("format " + fmt.to_string() + " rounds every weight of layer " + std::to_string(l) + " to zero");
    }
    std::vector<std::int32_t> bias(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) bias[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(quantize_value(L.b(r), fmt));
    q.layers.push_back(QuantizedLayer::from_dense(rows, cols, codes, std::move(bias), std::move(mask)));
  }
  q.validate();
  return q;
}

// Float model whose weights are the dequantized codes.
inline MlpModel dequantize_model(const QuantizedMlpModel& q) {
  MlpModel m;
  m.meta = q.meta;
  for (const auto& L : q.layers) {
    DenseLayer d;
    const auto dense = L.dense();
    d.w.resize(L.rows, L.cols);
    d.mask.resize(L.rows, L.cols);
    d.b.resize(L.rows);
    for (int r = 0; r < L.rows; ++r) {
      d.b(r) = dequantize(L.bias[static_cast<std::size_t>(r)], q.weight_format);
      for (int c = 0; c < L.cols; ++c) {
        const auto i = static_cast<std::size_t>(r * L.cols + c);
        d.w(r, c) = dequantize(dense[i], q.weight_format);
        d.mask(r, c) = L.mask[i];
      }
    }
    m.layers.push_back(std::move(d));
  }
  return m;
}

struct QuantizedTrainResult {
  QuantizedMlpModel model;
  MlpModel shadow;
  std::vector<double> loss_curve;
};

// Quantization-aware training: the forward pass sees weights in `fmt` and
// activations in `opt.quant.activation` (default <16,8>) while Adam updates
// full-precision shadow weights.
inline QuantizedTrainResult train_quantized(const LabeledSet& data, const FixedFormat& fmt, double sparsity_target,
                                            TrainOptions opt) {
  fmt.validate();
  opt.quant.weight = fmt;
  if (!opt.quant.activation) opt.quant.activation = kActivationFormat;
  opt.sparsity_target = sparsity_target;
  TrainResult tr = train(data, opt);
  QuantizedTrainResult out;
  out.model = quantize_model(tr.model, fmt, *opt.quant.activation);
  out.shadow = std::move(tr.model);
  out.loss_curve = std::move(tr.loss_curve);
  return out;
}

// ---------------------------------------------------------------------------
// Integer inference
// ---------------------------------------------------------------------------

// T[i] = round(sigmoid(-8 + i/16) * 2^16), i = 0..255.
inline const std::array<std::int32_t, 256>& sigmoid_table() {
  static const std::array<std::int32_t, 256> t = [] {
    std::array<std::int32_t, 256> a{};
    for (int i = 0; i < 256; ++i) a[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(std::lround(sigmoid(-8.0 + i / 16.0) * 65536.0));
    return a;
  }();
  return t;
}

// Logit code in <16,8> to a Q16 probability. The logit is clamped to
// [-8, 8 - 2^-8]; the 4 low bits of the offset interpolate linearly between
// adjacent table entries, and the top interval is flat at T[255].
inline std::int32_t sigmoid_q16(std::int64_t logit_q8) {
  const auto& t = sigmoid_table();
  const std::int64_t z = std::clamp<std::int64_t>(logit_q8, -2048, 2047);
  const auto offset = static_cast<std::int32_t>(z + 2048);
  const auto idx = static_cast<std::size_t>(offset >> 4);
  const std::int32_t frac = offset & 15;
  const std::int32_t lo = t[idx];
  const std::int32_t hi = idx < 255 ? t[idx + 1] : t[255];
  return lo + (((hi - lo) * frac + 8) >> 4);
}

// Reusable scratch for allocation-free inference.
class IntegerEngine {
 public:
  explicit IntegerEngine(const QuantizedMlpModel& m) : m_(&m) {
    m.validate();
    std::size_t widest = m.input_dim();
    for (const auto& L : m.layers) widest = std::max(widest, static_cast<std::size_t>(L.rows));
    a_.resize(widest);
    b_.resize(widest);
  }

  // Returns the logit as an activation-format code.
  std::int64_t logit_code(const double* x, std::size_t n) {
    const QuantizedMlpModel& m = *m_;
    if (n != m.input_dim()) {
      throw DimensionError("input has " + std::to_string(n) + " values, model expects " + std::to_string(m.input_dim()));
    }
    const FixedFormat act = m.activation_format;
    const int fw = m.weight_format.fractional_bits();
    const int fa = act.fractional_bits();
    for (std::size_t i = 0; i < n; ++i) a_[i] = quantize_value(x[i], act);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      const auto& L = m.layers[l];
      const bool hidden = l + 1 < m.layers.size();
      for (int r = 0; r < L.rows; ++r) {
        std::int64_t acc = static_cast<std::int64_t>(L.bias[static_cast<std::size_t>(r)]) * (std::int64_t{1} << fa);
        const auto end = L.row_ptr[static_cast<std::size_t>(r) + 1];
        for (auto i = L.row_ptr[static_cast<std::size_t>(r)]; i < end; ++i) {
          acc += static_cast<std::int64_t>(L.values[static_cast<std::size_t>(i)]) * a_[static_cast<std::size_t>(L.col_idx[static_cast<std::size_t>(i)])];
        }
        std::int64_t v = saturate_code(shift_round_even(acc, fw), act);
        if (hidden && v < 0) v = 0;
        b_[static_cast<std::size_t>(r)] = v;
      }
      std::swap(a_, b_);
    }
    return a_[0];
  }

  double score(const double* x, std::size_t n) {
    const std::int64_t z = logit_code(x, n);
    const int fa = m_->activation_format.fractional_bits();
    const std::int64_t z8 = fa >= 8 ? shift_round_even(z, fa - 8) : z * (std::int64_t{1} << (8 - fa));
    return sigmoid_q16(z8) / 65536.0;
  }

  double score(const Eigen::VectorXd& v) { return score(v.data(), static_cast<std::size_t>(v.size())); }

 private:
  const QuantizedMlpModel* m_;
  std::vector<std::int64_t> a_, b_;
};

inline double infer(const QuantizedMlpModel& m, const Eigen::VectorXd& v) { return IntegerEngine(m).score(v); }

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json meta_to_json(const TrainingMeta& m) {
  return {{"seed", m.seed},
          {"epochs", m.epochs},
          {"lambda", m.lambda},
          {"learning_rate", m.learning_rate},
          {"batch_size", m.batch_size},
          {"sparsity_target", m.sparsity_target}};
}

inline TrainingMeta meta_from_json(const nlohmann::json& j) {
  TrainingMeta m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.epochs = j.at("epochs").get<int>();
  m.lambda = j.at("lambda").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.batch_size = j.at("batch_size").get<int>();
  m.sparsity_target = j.at("sparsity_target").get<double>();
  return m;
}

inline nlohmann::json to_json(const MlpModel& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& L : m.layers) {
    std::vector<double> w, mask;
    for (Eigen::Index r = 0; r < L.out(); ++r) {
      for (Eigen::Index c = 0; c < L.in(); ++c) {
        w.push_back(L.w(r, c));
        mask.push_back(L.mask(r, c));
      }
    }
    layers.push_back({{"rows", L.out()},
                      {"cols", L.in()},
                      {"weights", w},
                      {"bias", std::vector<double>(L.b.data(), L.b.data() + L.b.size())},
                      {"mask", mask}});
  }
  return {{"version", kModelVersion}, {"kind", "float"}, {"meta", meta_to_json(m.meta)}, {"layers", layers}};
}

inline nlohmann::json to_json(const QuantizedMlpModel& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& L : m.layers) {
    layers.push_back(
        {{"rows", L.rows}, {"cols", L.cols}, {"weights", L.dense()}, {"bias", L.bias}, {"mask", L.mask}});
  }
  return {{"version", kModelVersion},
          {"kind", "quantized"},
          {"weight_format", {m.weight_format.total_bits, m.weight_format.integer_bits}},
          {"activation_format", {m.activation_format.total_bits, m.activation_format.integer_bits}},
          {"meta", meta_to_json(m.meta)},
          {"layers", layers}};
}

namespace detail {
inline void check_model_header(const nlohmann::json& j, const char* kind) {
  if (j.at("version").get<int>() != kModelVersion) throw FormatError("unsupported model version " + j.at("version").dump());
  if (j.at("kind").get<std::string>() != kind) {
    throw FormatError("expected a " + std::string(kind) + " model, found " + j.at("kind").get<std::string>());
  }
}
}  // namespace detail

inline MlpModel mlp_from_json(const nlohmann::json& j) {
  try {
    detail::check_model_header(j, "float");
    MlpModel m;
    m.meta = meta_from_json(j.at("meta"));
    for (const auto& jl : j.at("layers")) {
      const auto rows = jl.at("rows").get<Eigen::Index>(), cols = jl.at("cols").get<Eigen::Index>();
      const auto w = jl.at("weights").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      const auto mask = jl.at("mask").get<std::vector<double>>();
      if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(mask.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
        throw FormatError("layer arrays disagree with shape");
      }
      DenseLayer L;
      L.w.resize(rows, cols);
      L.mask.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          L.w(r, c) = w[static_cast<std::size_t>(r * cols + c)];
          L.mask(r, c) = mask[static_cast<std::size_t>(r * cols + c)];
        }
      }
      L.b = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
      m.layers.push_back(std::move(L));
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

inline QuantizedMlpModel quantized_from_json(const nlohmann::json& j) {
  try {
    detail::check_model_header(j, "quantized");
    QuantizedMlpModel m;
    const auto wf = j.at("weight_format").get<std::array<int, 2>>();
    const auto af = j.at("activation_format").get<std::array<int, 2>>();
    m.weight_format = {wf[0], wf[1]};
    m.activation_format = {af[0], af[1]};
    m.meta = meta_from_json(j.at("meta"));
    for (const auto& jl : j.at("layers")) {
      const int rows = jl.at("rows").get<int>(), cols = jl.at("cols").get<int>();
      auto w = jl.at("weights").get<std::vector<std::int32_t>>();
      auto b = jl.at("bias").get<std::vector<std::int32_t>>();
      auto mask = jl.at("mask").get<std::vector<std::uint8_t>>();
      if (rows < 1 || cols < 1 || w.size() != static_cast<std::size_t>(rows * cols) ||
          mask.size() != w.size() || b.size() != static_cast<std::size_t>(rows)) {
        throw FormatError("layer arrays disagree with shape");
      }
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (mask[i] > 1) throw FormatError("mask entries must be 0 or 1");
        if (!mask[i] && w[i] != 0) throw FormatError("pruned weight is nonzero");
      }
      m.layers.push_back(QuantizedLayer::from_dense(rows, cols, w, std::move(b), std::move(mask)));
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  try {
    nlohmann::json j;
    is >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << j.dump(1) << '\n';
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace axims
