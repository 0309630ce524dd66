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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "axims/nn/fixed_point.hpp"
#include "axims/nn/metrics.hpp"
#include "axims/nn/mlp.hpp"
#include "axims/nn/quantized.hpp"
#include "axims/nn/smote.hpp"
#include "oracles.hpp"

namespace axims {
namespace {

// Two Gaussian blobs in `d` dimensions, centres at -1 and +1 on every axis.
LabeledSet blobs(std::size_t n0, std::size_t n1, int d, double sigma, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  LabeledSet s;
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    const int y = i < n0 ? 0 : 1;
    Eigen::VectorXd v(d);
    for (int c = 0; c < d; ++c) v(c) = (y ? 1.0 : -1.0) + noise(gen);
    s.push_back(v, y, y ? std::optional<AttackKind>(AttackKind::AwlenOverflow) : std::nullopt, i);
  }
  return s;
}

LabeledSet xor_set() {
  LabeledSet s;
  const double pts[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd v(2);
    v << pts[i][0], pts[i][1];
    s.push_back(v, (i == 1 || i == 2) ? 1 : 0, std::nullopt, static_cast<std::uint64_t>(i));
  }
  return s;
}

bool same_float_model(const MlpModel& a, const MlpModel& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (!(a.layers[l].w == b.layers[l].w) || !(a.layers[l].b == b.layers[l].b) ||
        !(a.layers[l].mask == b.layers[l].mask)) {
      return false;
    }
  }
  return true;
}

TEST(FixedPoint, FormatBounds) {
  const FixedFormat f85{8, 5};
  EXPECT_DOUBLE_EQ(f85.step(), 0.125);
  EXPECT_DOUBLE_EQ(f85.min_value(), -16.0);
  EXPECT_DOUBLE_EQ(f85.max_value(), 15.875);
  const FixedFormat f81{8, 1};
  EXPECT_DOUBLE_EQ(f81.min_value(), -1.0);
  EXPECT_DOUBLE_EQ(f81.max_value(), 1.0 - 1.0 / 128);
  const FixedFormat f20{2, 0};
  std::set<double> levels;
  for (double x = -2.0; x <= 2.0; x += 0.01) levels.insert(fake_quantize(x, f20));
  EXPECT_EQ(levels, (std::set<double>{-0.5, -0.25, 0.0, 0.25}));
}

TEST(FixedPoint, QuantizeExamples) {
  const FixedFormat f{8, 5};
  EXPECT_EQ(quantize_value(0.30, f), 2);
  EXPECT_DOUBLE_EQ(fake_quantize(0.30, f), 0.25);
  EXPECT_DOUBLE_EQ(fake_quantize(100.0, f), 15.875);
  EXPECT_DOUBLE_EQ(fake_quantize(-16.0, f), -16.0);
  EXPECT_DOUBLE_EQ(fake_quantize(-1e9, f), -16.0);
  EXPECT_EQ(quantize_value(std::nan(""), f), 0);
  // Ties go to even codes.
  EXPECT_EQ(quantize_value(0.0625, f), 0);
  EXPECT_EQ(quantize_value(0.1875, f), 2);
}

TEST(FixedPoint, RoundTripWithinHalfStep) {
  std::mt19937_64 gen(7);
  for (const FixedFormat f : {FixedFormat{8, 5}, FixedFormat{8, 3}, FixedFormat{8, 1}, FixedFormat{2, 0},
                              FixedFormat{16, 8}}) {
    std::uniform_real_distribution<double> in_range(f.min_value(), f.max_value());
    for (int i = 0; i < 20000; ++i) {
      const double x = in_range(gen);
      ASSERT_LE(std::abs(fake_quantize(x, f) - x), f.step() / 2 + 1e-15) << f.to_string() << " x=" << x;
    }
  }
}

TEST(FixedPoint, RejectsBadFormats) {
  EXPECT_THROW(parse_fixed_format("<8,9>"), FormatError);
  EXPECT_THROW(parse_fixed_format("8;5"), ConfigError);
  EXPECT_EQ(parse_fixed_format("8,5"), (FixedFormat{8, 5}));
  EXPECT_EQ(parse_fixed_format("<8,5>"), (FixedFormat{8, 5}));
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  for (int trial = 0; trial < 6; ++trial) {
    LabeledSet s = blobs(5, 5, 4, 0.8, 100 + trial);
    MlpModel m = make_mlp(4, {5, 3}, static_cast<std::uint64_t>(trial));
    // Zero biases can park a pre-activation exactly on the ReLU kink, where
    // central differences are meaningless.
    std::mt19937_64 gen(static_cast<std::uint64_t>(trial));
    std::uniform_real_distribution<double> bias(-0.5, 0.5);
    for (auto& L : m.layers) {
      for (Eigen::Index i = 0; i < L.b.size(); ++i) L.b(i) = bias(gen);
    }
    const double lambda = trial % 2 ? 1e-3 : 0.0;
    const auto gc = oracle::finite_difference_check(m, s.x, s.y, lambda);
    EXPECT_LT(gc.relative_error, 1e-6) << "trial " << trial;
    EXPECT_EQ(gc.parameters, 4u * 5 + 5 + 5 * 3 + 3 + 3 + 1);
  }
}

TEST(Mlp, LearnsXor) {
  TrainOptions opt;
  opt.epochs = 2000;
  opt.learning_rate = 1e-2;
  opt.batch_size = 4;
  opt.lambda = 0.0;
  opt.hidden = {8};
  opt.seed = 3;
  const LabeledSet s = xor_set();
  const auto res = train(s, opt);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = infer(res.model, s.x.row(static_cast<Eigen::Index>(i)).transpose());
    EXPECT_EQ(p >= 0.5 ? 1 : 0, s.y[i]) << "point " << i << " p=" << p;
  }
  EXPECT_LT(res.loss_curve.back(), res.loss_curve.front());
}

TEST(Mlp, WeightDecayShrinksWeights) {
  const LabeledSet s = blobs(200, 200, 6, 1.0, 11);
  TrainOptions opt;
  opt.epochs = 40;
  opt.hidden = {16};
  opt.seed = 5;
  opt.lambda = 0.0;
  const double free_norm = weight_norm(train(s, opt).model);
  opt.lambda = 1e-2;
  const double decayed_norm = weight_norm(train(s, opt).model);
  EXPECT_LT(decayed_norm, free_norm);
}

TEST(Mlp, ZeroEpochsLeavesModelUnchanged) {
  const LabeledSet s = blobs(20, 20, 3, 1.0, 2);
  TrainOptions opt;
  opt.epochs = 0;
  opt.hidden = {4};
  opt.seed = 9;
  const auto res = train(s, opt);
  EXPECT_TRUE(same_float_model(res.model, make_mlp(3, {4}, 9)));
  EXPECT_EQ(res.loss_curve.size(), 1u);
}

TEST(Mlp, TrainingIsDeterministic) {
  const LabeledSet s = blobs(50, 50, 4, 1.0, 4);
  TrainOptions opt;
  opt.epochs = 10;
  opt.hidden = {6};
  opt.seed = 12;
  EXPECT_TRUE(same_float_model(train(s, opt).model, train(s, opt).model));
}

TEST(Mlp, RejectsBadInputs) {
  TrainOptions opt;
  EXPECT_THROW(train(LabeledSet{}, opt), InsufficientData);
  opt.sparsity_target = 1.0;
  EXPECT_THROW(train(xor_set(), opt), ConfigError);
  const MlpModel m = make_mlp(3, {4}, 1);
  EXPECT_THROW(infer(m, Eigen::VectorXd::Zero(4)), DimensionError);
}

TEST(Pruning, TrainedModelMeetsTarget) {
  const LabeledSet s = blobs(150, 150, 8, 1.0, 21);
  TrainOptions opt;
  opt.epochs = 30;
  opt.hidden = {16, 8};
  opt.seed = 2;
  opt.sparsity_target = 0.8;
  const auto res = train(s, opt);
  EXPECT_GE(sparsity(res.model), 0.8 - 1e-9);
  for (const auto& L : res.model.layers) {
    for (Eigen::Index i = 0; i < L.w.size(); ++i) {
      if (L.mask.data()[i] == 0.0) {
        EXPECT_EQ(L.w.data()[i], 0.0);
      }
    }
  }
}

TEST(Pruning, MaskedWeightsNeverReturn) {
  // Follow the ramp while shaking the surviving weights between steps, as
  // training would. Once masked, an entry must stay masked.
  MlpModel m = make_mlp(10, {12}, 4);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> kick(0.0, 0.5);
  std::vector<Eigen::MatrixXd> before;
  for (int step = 1; step <= 15; ++step) {
    before.clear();
    for (const auto& L : m.layers) before.push_back(L.mask);
    const double r = 1.0 - step / 15.0;
    for (auto& L : m.layers) {
      for (Eigen::Index i = 0; i < L.w.size(); ++i) L.w.data()[i] += kick(gen) * L.mask.data()[i];
      detail::prune_layer(L, 0.8 * (1.0 - r * r * r));
    }
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      EXPECT_FALSE(((before[l].array() == 0.0) && (m.layers[l].mask.array() != 0.0)).any()) << "step " << step;
    }
  }
  EXPECT_GE(sparsity(m), 0.8 - 1e-9);
}

TEST(Pruning, ZeroTargetKeepsAllWeights) {
  const LabeledSet s = blobs(40, 40, 4, 1.0, 22);
  TrainOptions opt;
  opt.epochs = 5;
  opt.hidden = {6};
  const auto res = train(s, opt);
  for (const auto& L : res.model.layers) EXPECT_TRUE((L.mask.array() == 1.0).all());
}

TEST(Qat, WeightsOnGridAndSparse) {
  const LabeledSet s = blobs(200, 200, 8, 1.0, 31);
  TrainOptions opt;
  opt.epochs = 30;
  opt.hidden = {16, 16};
  opt.seed = 4;
  const FixedFormat f{8, 5};
  const auto res = train_quantized(s, f, 0.8, opt);
  EXPECT_GE(res.model.sparsity(), 0.8 - 1e-9);
  const MlpModel dq = dequantize_model(res.model);
  for (const auto& L : dq.layers) {
    for (Eigen::Index i = 0; i < L.w.size(); ++i) {
      const double w = L.w.data()[i];
      EXPECT_EQ(w, fake_quantize(w, f));
      EXPECT_GE(w, f.min_value());
      EXPECT_LE(w, f.max_value());
    }
  }
  EXPECT_EQ(res.model.weight_format, f);
  EXPECT_EQ(res.model.activation_format, kActivationFormat);
}

TEST(Qat, TinyFormatThatZeroesALayerIsRejected) {
  MlpModel m = make_mlp(4, {4}, 1);
  for (auto& L : m.layers) L.w *= 1e-3;
  EXPECT_THROW(quantize_model(m, FixedFormat{8, 5}), FormatError);
}

TEST(Qat, IntegerEngineAgreesWithFloatEvaluation) {
  const LabeledSet s = blobs(300, 300, 6, 1.2, 41);
  TrainOptions opt;
  opt.epochs = 25;
  opt.hidden = {12, 12};
  opt.seed = 8;
  const auto res = train_quantized(s, FixedFormat{8, 5}, 0.5, opt);
  const MlpModel dq = dequantize_model(res.model);
  IntegerEngine engine(res.model);
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(0.0, 1.5);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd v(6);
    for (int c = 0; c < 6; ++c) v(c) = nd(gen);
    agree += (engine.score(v) >= 0.5) == (infer(dq, v) >= 0.5);
  }
  EXPECT_GE(agree, 990);
}

TEST(Qat, IntegerEngineEdgeCases) {
  MlpModel m = make_mlp(3, {4}, 1);
  for (auto& L : m.layers) {
    L.w.setZero();
    L.b.setZero();
  }
  m.layers[0].w(0, 0) = 0.5;  // keep one code per layer so the model is valid
  m.layers[1].w(0, 1) = 0.5;
  const auto q = quantize_model(m, FixedFormat{8, 5});
  EXPECT_DOUBLE_EQ(infer(q, Eigen::VectorXd::Zero(3)), 0.5);
  Eigen::VectorXd v(3);
  v << 1.0, -2.0, 3.0;
  IntegerEngine e(q);
  EXPECT_EQ(e.score(v), e.score(v));
  EXPECT_THROW(e.score(Eigen::VectorXd::Zero(2)), DimensionError);
}

TEST(Metrics, AucExamples) {
  EXPECT_DOUBLE_EQ(auc_roc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(auc_roc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(auc_roc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}), 0.5);
  EXPECT_THROW(auc_roc({0.1, 0.2}, {1, 1}), DegenerateTestSet);
  EXPECT_THROW(auc_roc({0.1}, {1, 0}), DimensionError);
}

TEST(Metrics, AucMatchesPairwiseCount) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> s(10);
    std::vector<int> y(10);
    for (int i = 0; i < 10; ++i) {
      s[static_cast<std::size_t>(i)] = static_cast<double>(gen() % 6) / 5.0;
      y[static_cast<std::size_t>(i)] = i < 4 ? 1 : static_cast<int>(gen() % 2);
    }
    y[9] = 0;
    EXPECT_DOUBLE_EQ(auc_roc(s, y), oracle::pairwise_auc(s, y)) << "trial " << trial;
  }
}

TEST(Metrics, EvaluateConsistency) {
  const std::vector<double> scores = {0.9, 0.8, 0.3, 0.6, 0.1, 0.2, 0.7, 0.4};
  const std::vector<int> labels = {1, 1, 1, 0, 0, 0, 1, 0};
  const std::vector<std::optional<AttackKind>> kinds = {
      AttackKind::AwlenOverflow, AttackKind::AwlenOverflow, AttackKind::Mixed, std::nullopt,
      std::nullopt,              std::nullopt,              AttackKind::Mixed, std::nullopt};
  const auto r = evaluate(scores, labels, kinds);
  EXPECT_EQ(r.confusion.tp, 3u);
  EXPECT_EQ(r.confusion.fn, 1u);
  EXPECT_EQ(r.confusion.fp, 1u);
  EXPECT_EQ(r.confusion.tn, 3u);
  EXPECT_DOUBLE_EQ(r.accuracy, 6.0 / 8);
  EXPECT_DOUBLE_EQ(r.precision, 3.0 / 4);
  EXPECT_DOUBLE_EQ(r.recall, 3.0 / 4);
  EXPECT_DOUBLE_EQ(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall));
  EXPECT_DOUBLE_EQ(r.false_positive_rate, 1.0 / 4);
  ASSERT_EQ(r.per_kind.size(), 2u);
  EXPECT_EQ(r.per_kind[0].kind, AttackKind::AwlenOverflow);
  EXPECT_DOUBLE_EQ(r.per_kind[0].detection_rate, 1.0);
  EXPECT_DOUBLE_EQ(r.per_kind[0].precision, 2.0 / 3);
  EXPECT_DOUBLE_EQ(r.per_kind[1].detection_rate, 0.5);
  EXPECT_THROW(evaluate({}, {}, {}), InsufficientData);
}

Dataset labelled(std::size_t n0, std::size_t n1) {
  Dataset ds;
  ds.schema = {"a"};
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    const int y = i >= n0;
    ds.rows.push_back({i, i, {static_cast<double>(i)}, y, y ? std::optional(AttackKind::Mixed) : std::nullopt});
  }
  return ds;
}

TEST(Split, StratifiedAndDeterministic) {
  const Dataset ds = labelled(16'383, 3'242);
  const Split a = split_dataset(ds, 0.8, 42);
  EXPECT_EQ(a.train.rows.size(), 15'700u);
  EXPECT_EQ(a.test.rows.size(), 3'925u);
  EXPECT_EQ(a.train.count(1), 2'594u);
  EXPECT_EQ(a.test.count(1), 648u);
  const Split b = split_dataset(ds, 0.8, 42);
  EXPECT_EQ(a.train.rows, b.train.rows);
  std::set<std::uint64_t> seen;
  for (const auto& r : a.train.rows) seen.insert(r.sample_index);
  for (const auto& r : a.test.rows) EXPECT_FALSE(seen.count(r.sample_index));
  EXPECT_THROW(split_dataset(labelled(100, 3), 0.8, 1), InsufficientData);
  EXPECT_THROW(split_dataset(ds, 1.0, 1), ConfigError);
}

TEST(Smote, BalancedSetIsUnchanged) {
  const LabeledSet s = blobs(100, 100, 3, 1.0, 51);
  const LabeledSet out = smote(s, 5, 1);
  EXPECT_EQ(out.x, s.x);
  EXPECT_EQ(out.y, s.y);
}

TEST(Smote, SyntheticRowsLieOnNeighbourSegments) {
  const LabeledSet s = blobs(1000, 250, 3, 1.0, 52);
  const LabeledSet out = smote(s, 5, 7);
  ASSERT_EQ(out.count(0), 1000u);
  ASSERT_EQ(out.count(1), 1000u);
  // Brute-force neighbour lists for the minority rows.
  std::vector<Eigen::VectorXd> minority;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.y[i] == 1) minority.push_back(s.x.row(static_cast<Eigen::Index>(i)).transpose());
  }
  for (std::size_t r = s.size(); r < out.size(); ++r) {
    ASSERT_TRUE(out.synthetic[r]);
    ASSERT_EQ(out.y[r], 1);
    const Eigen::VectorXd p = out.x.row(static_cast<Eigen::Index>(r)).transpose();
    bool on_segment = false;
    for (std::size_t a = 0; a < minority.size() && !on_segment; ++a) {
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t b = 0; b < minority.size(); ++b) {
        if (b != a) d.push_back({(minority[a] - minority[b]).squaredNorm(), b});
      }
      std::partial_sort(d.begin(), d.begin() + 5, d.end());
      for (int k = 0; k < 5 && !on_segment; ++k) {
        const Eigen::VectorXd seg = minority[d[static_cast<std::size_t>(k)].second] - minority[a];
        const double u = seg.dot(p - minority[a]) / seg.squaredNorm();
        on_segment = u >= -1e-12 && u <= 1 + 1e-12 && (minority[a] + u * seg - p).norm() < 1e-9;
      }
    }
    ASSERT_TRUE(on_segment) << "synthetic row " << r;
    if (r > s.size() + 60) break;  // the brute-force search is quadratic; a prefix is enough
  }
  for (std::size_t r = 0; r < s.size(); ++r) EXPECT_FALSE(out.synthetic[r]);
}

TEST(Smote, IdenticalMinorityPointsYieldCopies) {
  LabeledSet s;
  Eigen::VectorXd same(2);
  same << 3.0, -1.0;
  for (int i = 0; i < 6; ++i) s.push_back(same, 1, AttackKind::Mixed, static_cast<std::uint64_t>(i));
  for (int i = 0; i < 20; ++i) s.push_back(Eigen::VectorXd::Constant(2, i), 0, std::nullopt, 100u + i);
  const LabeledSet out = smote(s, 5, 3);
  EXPECT_EQ(out.count(1), 20u);
  for (std::size_t r = s.size(); r < out.size(); ++r) EXPECT_EQ(out.x.row(static_cast<Eigen::Index>(r)), same.transpose());
  EXPECT_THROW(smote(s, 6, 3), InsufficientData);
}

TEST(ModelJson, RoundTrips) {
  const LabeledSet s = blobs(60, 60, 4, 1.0, 61);
  TrainOptions opt;
  opt.epochs = 5;
  opt.hidden = {6};
  opt.seed = 77;
  const auto f = train(s, opt).model;
  const MlpModel f2 = mlp_from_json(nlohmann::json::parse(to_json(f).dump()));
  EXPECT_TRUE(same_float_model(f, f2));
  EXPECT_EQ(f2.meta.seed, 77u);
  const auto q = train_quantized(s, FixedFormat{8, 3}, 0.5, opt).model;
  EXPECT_EQ(quantized_from_json(nlohmann::json::parse(to_json(q).dump())), q);
  nlohmann::json bad = to_json(q);
  bad["version"] = 99;
  EXPECT_THROW(quantized_from_json(bad), FormatError);
  EXPECT_THROW(mlp_from_json(to_json(q)), FormatError);
}

}  // namespace
}  // namespace axims
