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

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "axims/axi/types.hpp"
#include "axims/errors.hpp"

namespace axims {

inline constexpr double kDefaultThreshold = 0.5;

struct Confusion {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
};

struct KindRow {
  AttackKind kind{};
  std::uint64_t samples = 0;
  std::uint64_t true_positives = 0;
  std::uint64_t false_negatives = 0;
  double detection_rate = 0.0;
  double precision = 0.0;  // TP_k / (TP_k + all false positives)
};

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc_roc = 0.0;
  double false_positive_rate = 0.0;
  Confusion confusion;
  std::vector<KindRow> per_kind;  // kinds present in the test set, by code
  KindRow overall;
};

// Area under the ROC curve by the trapezoid rule over every distinct score.
// Tied groups contribute half credit; the sum is kept in integer half-units,
// so the result is exactly P(s+ > s-) + P(s+ = s-)/2.
inline double auc_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::uint64_t pos = 0, neg = 0;
  for (int l : labels) (l == 1 ? pos : neg)++;
  if (pos == 0 || neg == 0) throw DegenerateTestSet("AUC needs both classes in the test set");
  std::uint64_t twice_area = 0;  // sum over positives of 2*below + ties
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t gp = 0, gn = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? gp : gn)++;
      ++j;
    }
    twice_area += gp * (2 * neg_below + gn);
    neg_below += gn;
    i = j;
  }
  return (static_cast<double>(twice_area) * 0.5) / (static_cast<double>(pos) * static_cast<double>(neg));
}

inline EvalReport evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                           const std::vector<std::optional<AttackKind>>& kinds,
                           double threshold = kDefaultThreshold) {
  if (scores.empty()) throw InsufficientData("test set is empty");
  if (scores.size() != labels.size() || kinds.size() != labels.size()) {
    throw DimensionError("scores, labels and kinds differ in length");
  }
  EvalReport r;
  auto& c = r.confusion;
  std::map<AttackKind, KindRow> rows;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool truth = labels[i] == 1;
    if (truth && pred) ++c.tp;
    if (truth && !pred) ++c.fn;
    if (!truth && pred) ++c.fp;
    if (!truth && !pred) ++c.tn;
    if (truth && kinds[i]) {
      auto& row = rows[*kinds[i]];
      row.kind = *kinds[i];
      ++row.samples;
      (pred ? row.true_positives : row.false_negatives)++;
    }
  }
  auto ratio = [](std::uint64_t a, std::uint64_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  r.accuracy = ratio(c.tp + c.tn, c.total());
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.false_positive_rate = ratio(c.fp, c.fp + c.tn);
  r.auc_roc = auc_roc(scores, labels);
  for (auto& [kind, row] : rows) {
    row.detection_rate = ratio(row.true_positives, row.samples);
    row.precision = ratio(row.true_positives, row.true_positives + c.fp);
    r.per_kind.push_back(row);
  }
  r.overall.samples = c.tp + c.fn;
  r.overall.true_positives = c.tp;
  r.overall.false_negatives = c.fn;
  r.overall.detection_rate = r.recall;
  r.overall.precision = r.precision;
  return r;
}

}  // namespace axims
