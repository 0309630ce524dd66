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
#include <filesystem>
#include <vector>

#include "axims/capture/capture.hpp"
#include "axims/features/pipeline.hpp"
#include "axims/nn/smote.hpp"
#include "axims/workflow.hpp"
#include "oracles.hpp"
#include "txn_builder.hpp"

namespace axims {
namespace {

Dataset table(std::vector<std::string> schema, const std::vector<std::vector<double>>& rows) {
  Dataset ds;
  ds.schema = std::move(schema);
  for (std::size_t i = 0; i < rows.size(); ++i) ds.rows.push_back({i, 0, rows[i], 0, std::nullopt});
  return ds;
}

Dataset random_table(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> schema;
  for (std::size_t j = 0; j < d; ++j) schema.push_back("c" + std::to_string(j));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r;
    for (std::size_t j = 0; j < d; ++j) {
      // Mild correlations so the spectrum is not flat.
      r.push_back(rng.uniform(-1.0, 1.0) * static_cast<double>(j + 1) + (j > 0 ? 0.5 * r[0] : 0.0));
    }
    rows.push_back(std::move(r));
  }
  return table(schema, rows);
}

// Training split of the seed-42 default corpus, shared by the regression tests.
const Dataset& default_train() {
  static const Dataset train = [] {
    RunConfig rc;
    return split_dataset(capture(generate_trace(rc), seeded_sim(rc)), rc.train_fraction, rc.seed, rc.smote_k).train;
  }();
  return train;
}

TEST(Decode, DropsDebugColumnsAndKeepsProtocolOrder) {
  SimConfig c;
  c.cycles = 5'000;
  const Dataset raw = capture(simulate(c), c);
  ASSERT_EQ(raw.width(), 57u);
  const Dataset d = decode(raw);
  EXPECT_EQ(d.width(), 52u);
  EXPECT_EQ(d.schema, protocol_schema());
  ASSERT_EQ(d.rows.size(), raw.rows.size());
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    EXPECT_TRUE(std::equal(d.rows[i].values.begin(), d.rows[i].values.end(), raw.rows[i].values.begin()));
    EXPECT_EQ(d.rows[i].label, raw.rows[i].label);
  }
  EXPECT_EQ(decode(d), d);  // idempotent
}

TEST(Decode, BurstIncrIsOne) {
  SimConfig c;
  CaptureBuilder b(c);
  Dataset ds;
  ds.schema = capture_schema();
  ds.rows.push_back(b.add(testing::make_write(testing::TxnSpec{})));
  const Dataset d = decode(ds);
  EXPECT_EQ(d.rows[0].values[*d.column("aw_burst")], 1.0);
}

TEST(Decode, RejectsUnknownColumns) {
  Dataset ds = table({"aw_valid", "mystery"}, {{1, 2}});
  EXPECT_THROW(decode(ds), SchemaError);
  ds = table({"aw_valid"}, {{1}});  // known but incomplete
  EXPECT_THROW(decode(ds), SchemaError);
}

TEST(CorrelationPrune, DropsLaterOfPerfectlyCorrelatedPair) {
  const Dataset ds = table({"a", "b", "c"}, {{1, 2, 5}, {2, 4, 3}, {3, 6, 4}, {4, 8, 1}});
  const PruneResult p = correlation_prune(ds, 0.95);
  EXPECT_EQ(p.kept_columns, (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(p.correlated, (std::vector<std::string>{"b"}));
  EXPECT_EQ(p.data.schema, p.kept_columns);
  EXPECT_EQ(p.data.rows[1].values, (std::vector<double>{2, 3}));

  // Negative correlation counts by magnitude.
  const Dataset neg = table({"a", "b"}, {{1, -2}, {2, -4}, {3, -6.1}});
  EXPECT_EQ(correlation_prune(neg, 0.95).kept_columns, (std::vector<std::string>{"a"}));
}

TEST(CorrelationPrune, DropsConstantColumns) {
  const Dataset ds = table({"k", "x"}, {{7, 1}, {7, 3}, {7, 2}});
  const PruneResult p = correlation_prune(ds);
  EXPECT_EQ(p.kept_columns, (std::vector<std::string>{"x"}));
  EXPECT_EQ(p.zero_variance, (std::vector<std::string>{"k"}));
}

TEST(CorrelationPrune, RowOrderDoesNotMatter) {
  Dataset ds = random_table(300, 8, 11);
  // Add an exact linear copy and a near copy.
  ds.schema.push_back("copy");
  ds.schema.push_back("near");
  Rng rng(5);
  for (auto& r : ds.rows) {
    r.values.push_back(3.0 * r.values[2] - 1.0);
    r.values.push_back(r.values[4] + rng.uniform(-0.01, 0.01));
  }
  const auto kept = correlation_prune(ds).kept_columns;
  EXPECT_EQ(std::count(kept.begin(), kept.end(), "copy"), 0);
  EXPECT_EQ(std::count(kept.begin(), kept.end(), "near"), 0);
  Dataset shuffled = ds;
  rng.shuffle(shuffled.rows.begin(), shuffled.rows.end());
  EXPECT_EQ(correlation_prune(shuffled).kept_columns, kept);
}

TEST(CorrelationPrune, Errors) {
  EXPECT_THROW(correlation_prune(table({"a"}, {{1}})), InsufficientData);
  EXPECT_THROW(correlation_prune(table({"a"}, {{1}, {2}}), 0.0), ConfigError);
}

TEST(PcaFit, PerfectlyCorrelatedPairIsOneComponent) {
  const Dataset ds = table({"a", "b"}, {{1, 2}, {2, 4}, {3, 6}, {5, 10}});
  for (double target : {0.5, 0.9, 1.0}) {
    const FeatureTransform ft = pca_fit(ds, target);
    EXPECT_EQ(ft.output_dim(), 1u);
    EXPECT_NEAR(ft.explained_variance_ratios[0], 1.0, 1e-12);
  }
}

TEST(PcaFit, ThreeByThreeMatchesCharacteristicPolynomial) {
  const Dataset ds = random_table(40, 3, 21);
  oracle::Matrix x;
  for (const auto& r : ds.rows) x.push_back(r.values);
  const auto lambda = oracle::char_poly_eigenvalues_3x3(oracle::correlation_matrix(x));
  const FeatureTransform ft = pca_fit(ds, 1.0);
  ASSERT_EQ(ft.explained_variance_ratios.size(), 3u);
  const double trace = lambda[0] + lambda[1] + lambda[2];  // 3 for a correlation matrix
  EXPECT_NEAR(trace, 3.0, 1e-12);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(ft.explained_variance_ratios[i] * trace, lambda[i], 1e-9);

  // The components are eigenvectors of the same matrix.
  const auto c = oracle::correlation_matrix(x);
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (int i = 0; i < 3; ++i) {
      double cv = 0.0;
      for (int j = 0; j < 3; ++j) cv += c[i][j] * ft.pca_basis(r, j);
      EXPECT_NEAR(cv, lambda[r] * ft.pca_basis(r, i), 1e-9);
    }
  }
}

TEST(PcaFit, MatchesJacobiOnLargerMatrix) {
  const Dataset ds = random_table(200, 9, 31);
  oracle::Matrix x;
  for (const auto& r : ds.rows) x.push_back(r.values);
  const auto ev = oracle::jacobi_eigen(oracle::correlation_matrix(x));
  const FeatureTransform ft = pca_fit(ds, 1.0);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(ft.explained_variance_ratios[i], ev.values[i] / 9.0, 1e-9);
}

TEST(PcaFit, BasisInvariants) {
  const Dataset ds = random_table(500, 12, 41);
  for (double target : {0.90, 0.95, 0.97}) {
    const FeatureTransform ft = pca_fit(ds, target);
    const auto k = static_cast<Eigen::Index>(ft.output_dim());
    const Eigen::MatrixXd gram = ft.pca_basis * ft.pca_basis.transpose();
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-9);
    double sum = 0.0;
    for (std::size_t i = 0; i < ft.explained_variance_ratios.size(); ++i) {
      sum += ft.explained_variance_ratios[i];
      if (i > 0) {
        EXPECT_LE(ft.explained_variance_ratios[i], ft.explained_variance_ratios[i - 1]);
      }
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_GE(ft.cumulative_variance(), target);
    // Smallest k: one fewer component misses the target.
    EXPECT_LT(ft.cumulative_variance() - ft.explained_variance_ratios[static_cast<std::size_t>(k - 1)], target);
    for (Eigen::Index r = 0; r < k; ++r) {
      Eigen::Index arg;
      ft.pca_basis.row(r).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(ft.pca_basis(r, arg), 0.0) << "sign convention, row " << r;
    }
  }
}

TEST(PcaFit, Errors) {
  EXPECT_THROW(pca_fit(table({"a", "b"}, {{1, 1}, {1, 1}, {1, 1}}), 0.9), DegenerateData);
  EXPECT_THROW(pca_fit(random_table(10, 2, 1), 0.0), ConfigError);
  EXPECT_THROW(pca_fit(random_table(10, 2, 1), 1.01), ConfigError);
  EXPECT_THROW(pca_fit(table({"dbg_overflow", "a"}, {{0, 1}, {0, 2}}), 0.9), SchemaError);
}

TEST(Transform, MeanMapsToZeroAndLengthIsK) {
  const Dataset ds = random_table(100, 6, 51);
  const FeatureTransform ft = pca_fit(ds, 0.9);
  const Eigen::VectorXd z = transform(ft, ft.means);
  EXPECT_EQ(static_cast<std::size_t>(z.size()), ft.output_dim());
  EXPECT_LE(z.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(transform(ft, Eigen::VectorXd::Zero(5)), SchemaError);
}

TEST(Transform, ReconstructionErrorTracksDiscardedVariance) {
  const Dataset ds = random_table(800, 10, 61);
  for (double target : {0.90, 0.95, 0.97}) {
    const FeatureTransform ft = pca_fit(ds, target);
    double err = 0.0, norm = 0.0;
    for (const auto& r : ds.rows) {
      const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.values.data(), 10);
      const Eigen::VectorXd zs = (x - ft.means).cwiseQuotient(ft.stddevs);
      const Eigen::VectorXd back = ft.pca_basis.transpose() * transform(ft, x);
      err += (back - zs).squaredNorm();
      norm += zs.squaredNorm();
    }
    EXPECT_LE(err / norm, 1.0 - target + 0.02) << target;
  }
}

TEST(Transform, ProjectorMatchesTransformAndReordersColumns) {
  const Dataset ds = random_table(60, 5, 71);
  const FeatureTransform ft = pca_fit(ds, 0.95);
  // Same data under a permuted schema with an extra column.
  const std::vector<std::string> schema = {"c3", "extra", "c0", "c4", "c1", "c2"};
  Projector p(ft, schema);
  for (const auto& r : ds.rows) {
    const std::vector<double> v = {r.values[3], 99.0, r.values[0], r.values[4], r.values[1], r.values[2]};
    const Eigen::VectorXd want = transform(ft, Eigen::Map<const Eigen::VectorXd>(r.values.data(), 5));
    EXPECT_LE((p(v) - want).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(Projector(ft, {"c0", "c1"}), SchemaError);
}

TEST(Transform, JsonReloadIsBitIdentical) {
  const Dataset ds = random_table(120, 7, 81);
  const FeatureTransform ft = pca_fit(ds, 0.95);
  const auto path = std::filesystem::temp_directory_path() / "axims_transform_test.json";
  save_transform(ft, path.string());
  const FeatureTransform back = load_transform(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back.kept_columns, ft.kept_columns);
  EXPECT_EQ(back.explained_variance_ratios, ft.explained_variance_ratios);
  for (const auto& r : ds.rows) {
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.values.data(), 7);
    const Eigen::VectorXd a = transform(ft, x), b = transform(back, x);
    ASSERT_EQ(a.size(), b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) EXPECT_EQ(a(i), b(i));
  }
  nlohmann::json j = to_json(ft);
  j["version"] = 99;
  EXPECT_THROW(transform_from_json(j), FormatError);
}

TEST(FitPipeline, DefaultCorpusStagesArePinned) {
  const Dataset& train = default_train();
  std::size_t k[3];
  const double targets[3] = {0.90, 0.95, 0.97};
  for (int i = 0; i < 3; ++i) {
    const PipelineFit f = fit_pipeline(train, {0.95, targets[i], 3});
    EXPECT_EQ(f.report.raw_columns, 57u);
    EXPECT_EQ(f.report.decoded_columns, 52u);
    EXPECT_EQ(f.report.kept_columns, 29u);  // regression value for seed 42
    EXPECT_GE(f.report.cumulative_variance, targets[i]);
    EXPECT_EQ(f.transform.dropped_debug.size(), 5u);
    for (const auto& c : f.transform.kept_columns) EXPECT_NE(c.rfind("dbg_", 0), 0u) << c;
    k[i] = f.report.components;
  }
  EXPECT_EQ(k[0], 16u);
  EXPECT_EQ(k[1], 19u);
  EXPECT_EQ(k[2], 21u);
}

TEST(FitPipeline, TestRowsUseTrainingStatistics) {
  const Dataset all = random_table(200, 4, 91);
  Dataset train = all;
  train.rows.resize(150);
  const FeatureTransform a = pca_fit(train, 0.95);
  Eigen::VectorXd train_mean = Eigen::VectorXd::Zero(4), all_mean = Eigen::VectorXd::Zero(4);
  for (std::size_t i = 0; i < all.rows.size(); ++i) {
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(all.rows[i].values.data(), 4);
    all_mean += x;
    if (i < 150) train_mean += x;
  }
  train_mean /= 150.0;
  all_mean /= 200.0;
  EXPECT_LE((a.means - train_mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((a.means - all_mean).cwiseAbs().maxCoeff(), 1e-6);
}

}  // namespace
}  // namespace axims
