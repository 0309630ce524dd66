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
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "axims/axi/types.hpp"
#include "axims/capture/capture.hpp"
#include "axims/errors.hpp"
#include "axims/features/pipeline.hpp"
#include "axims/random.hpp"

namespace axims {

inline constexpr int kDefaultSmoteNeighbors = 5;

// Model-ready samples: one row of `x` per sample.
struct LabeledSet {
  Eigen::MatrixXd x;
  std::vector<int> y;
  std::vector<std::optional<AttackKind>> kind;
  std::vector<std::uint64_t> sample_index;
  std::vector<bool> synthetic;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x.cols()); }
  std::size_t count(int label) const {
    return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
  }

  void push_back(const Eigen::VectorXd& v, int label, std::optional<AttackKind> k, std::uint64_t idx,
                 bool synth = false) {
    if (x.cols() == 0 && x.rows() == 0) x.resize(0, v.size());
    if (v.size() != x.cols()) throw DimensionError("sample width does not match set");
    x.conservativeResize(x.rows() + 1, Eigen::NoChange);
    x.row(x.rows() - 1) = v.transpose();
    y.push_back(label);
    kind.push_back(k);
    sample_index.push_back(idx);
    synthetic.push_back(synth);
  }
};

inline LabeledSet project(const FeatureTransform& ft, const Dataset& ds) {
  Projector p(ft, ds.schema);
  LabeledSet s;
  s.x.resize(static_cast<Eigen::Index>(ds.rows.size()), static_cast<Eigen::Index>(ft.output_dim()));
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const auto& r = ds.rows[i];
    s.x.row(static_cast<Eigen::Index>(i)) = p(r.values).transpose();
    s.y.push_back(r.label);
    s.kind.push_back(r.attack_kind);
    s.sample_index.push_back(r.sample_index);
    s.synthetic.push_back(false);
  }
  return s;
}

struct Split {
  Dataset train;
  Dataset test;
};

// Stratified by label: each class contributes round(train_frac * n_c) rows
// to the training side, chosen by a seeded shuffle. Row order within each
// side follows the original order.
inline Split split_dataset(const Dataset& ds, double train_frac = 0.8, std::uint64_t seed = 0,
                           int k_neighbors = kDefaultSmoteNeighbors) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train fraction must be in (0, 1)");
  Rng rng(derive_seed(seed, 0x5911));
  std::vector<bool> to_train(ds.rows.size(), false);
  for (int label : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
      if (ds.rows[i].label == label) idx.push_back(i);
    }
    if (idx.size() < static_cast<std::size_t>(k_neighbors) + 1) {
      throw InsufficientData("class " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                             " samples, need at least " + std::to_string(k_neighbors + 1));
    }
    rng.shuffle(idx.begin(), idx.end());
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < n_train; ++i) to_train[idx[i]] = true;
  }
  Split s;
  s.train.schema = s.test.schema = ds.schema;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) (to_train[i] ? s.train : s.test).rows.push_back(ds.rows[i]);
  return s;
}

// Oversamples the minority class to the majority count. Each synthetic row is
// x + u * (nb - x) with x a random minority sample, nb one of its k nearest
// minority neighbours (Euclidean, index order on ties) and u ~ U(0, 1).
inline LabeledSet smote(const LabeledSet& train, int k = kDefaultSmoteNeighbors, std::uint64_t seed = 0) {
  if (k < 1) throw ConfigError("SMOTE needs k >= 1");
  const std::size_t n0 = train.count(0), n1 = train.count(1);
  if (n0 == n1) return train;
  const int minority = n1 < n0 ? 1 : 0;
  const std::size_t n_min = std::min(n0, n1), n_maj = std::max(n0, n1);
  if (n_min < static_cast<std::size_t>(k) + 1) {
    throw InsufficientData("minority class has " + std::to_string(n_min) + " samples, SMOTE with k=" +
                           std::to_string(k) + " needs " + std::to_string(k + 1));
  }
  std::vector<Eigen::Index> members;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.y[i] == minority) members.push_back(static_cast<Eigen::Index>(i));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(members.size()), train.x.cols());
  for (std::size_t i = 0; i < members.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = train.x.row(members[i]);

  // Exact pairwise squared distances, then the k smallest per row.
  const auto nm = m.rows();
  Eigen::MatrixXd dist(nm, nm);
  for (Eigen::Index a = 0; a < nm; ++a) {
    dist(a, a) = 0.0;
    for (Eigen::Index b = a + 1; b < nm; ++b) dist(a, b) = dist(b, a) = (m.row(a) - m.row(b)).squaredNorm();
  }
  std::vector<std::vector<Eigen::Index>> neighbours(members.size());
  std::vector<Eigen::Index> order(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    const auto self = static_cast<Eigen::Index>(i);
    std::erase(order, self);
    const auto row = dist.row(self);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return row(a) != row(b) ? row(a) < row(b) : a < b;
    });
    neighbours[i].assign(order.begin(), order.begin() + k);
    order.resize(members.size());
  }

  Rng rng(derive_seed(seed, 0x53073));
  LabeledSet out = train;
  const std::size_t need = n_maj - n_min;
  const Eigen::Index base = out.x.rows();
  out.x.conservativeResize(base + static_cast<Eigen::Index>(need), Eigen::NoChange);
  for (std::size_t s = 0; s < need; ++s) {
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, n_min - 1));
    const Eigen::Index nb = neighbours[i][static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::uint64_t>(k) - 1))];
    const double u = rng.uniform01();
    out.x.row(base + static_cast<Eigen::Index>(s)) = m.row(static_cast<Eigen::Index>(i)) + u * (m.row(nb) - m.row(static_cast<Eigen::Index>(i)));
    const auto src = static_cast<std::size_t>(members[i]);
    out.y.push_back(minority);
    out.kind.push_back(train.kind[src]);
    out.sample_index.push_back(train.sample_index[src]);
    out.synthetic.push_back(true);
  }
  return out;
}

}  // namespace axims
