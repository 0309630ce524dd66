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
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "axims/capture/capture.hpp"
#include "axims/capture/schema.hpp"
#include "axims/errors.hpp"

namespace axims {

inline constexpr int kTransformVersion = 1;
inline constexpr double kDefaultCorrThreshold = 0.95;

struct FeatureVector {
  std::uint64_t sample_index = 0;
  Eigen::VectorXd values;
};

struct FeatureTransform {
  std::vector<std::string> dropped_debug;
  std::vector<std::string> kept_columns;
  double corr_threshold = kDefaultCorrThreshold;
  Eigen::VectorXd means;
  Eigen::VectorXd stddevs;
  Eigen::MatrixXd pca_basis;                      // k x d, rows orthonormal
  std::vector<double> explained_variance_ratios;  // all d components, descending
  double variance_target = 0.95;

  std::size_t input_dim() const noexcept { return kept_columns.size(); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(pca_basis.rows()); }

  double cumulative_variance() const {
    double s = 0.0;
    for (std::size_t i = 0; i < output_dim(); ++i) s += explained_variance_ratios[i];
    return s;
  }
};

// ---------------------------------------------------------------------------
// Stage 1: decode
// ---------------------------------------------------------------------------

// Values are already numeric after CSV parsing (hex and binary literals are
// converted there), so decoding reduces to a schema check and dropping the
// probe bookkeeping columns. Burst and response enums keep their AXI codes.
inline Dataset decode(const Dataset& ds) {
  ds.validate();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.schema.size(); ++i) {
    const auto& name = ds.schema[i];
    if (protocol_index(name)) {
      keep.push_back(i);
    } else if (!debug_index(name)) {
      throw SchemaError("unknown column '" + name + "'");
    }
  }
  Dataset out;
  for (std::size_t i : keep) out.schema.push_back(ds.schema[i]);
  if (out.schema != protocol_schema()) {
    throw SchemaError("decoded columns are not the " + std::to_string(kNumProtocol) +
                      " protocol fields in order");
  }
  out.rows.reserve(ds.rows.size());
  for (const auto& r : ds.rows) {
    CaptureRecord o = r;
    o.values.clear();
    for (std::size_t i : keep) o.values.push_back(r.values[i]);
    out.rows.push_back(std::move(o));
  }
  return out;
}

inline std::vector<std::string> debug_columns_in(const Dataset& ds) {
  std::vector<std::string> out;
  for (const auto& name : ds.schema) {
    if (debug_index(name)) out.push_back(name);
  }
  return out;
}

// Rows x columns matrix of `cols` (by schema index).
inline Eigen::MatrixXd to_matrix(const Dataset& ds, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(ds.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ds.rows[r].values[cols[c]];
    }
  }
  return m;
}

inline std::vector<std::size_t> column_indices(const std::vector<std::string>& schema,
                                               const std::vector<std::string>& wanted) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < schema.size(); ++i) pos.emplace(schema[i], i);
  std::vector<std::size_t> idx;
  idx.reserve(wanted.size());
  for (const auto& w : wanted) {
    auto it = pos.find(w);
    if (it == pos.end()) throw SchemaError("missing column '" + w + "'");
    idx.push_back(it->second);
  }
  return idx;
}

inline Dataset select_columns(const Dataset& ds, const std::vector<std::string>& cols) {
  const auto idx = column_indices(ds.schema, cols);
  Dataset out;
  out.schema = cols;
  out.rows.reserve(ds.rows.size());
  for (const auto& r : ds.rows) {
    CaptureRecord o = r;
    o.values.clear();
    for (std::size_t i : idx) o.values.push_back(r.values[i]);
    out.rows.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage 2: correlation prune
// ---------------------------------------------------------------------------

struct PruneResult {
  Dataset data;
  std::vector<std::string> kept_columns;
  std::vector<std::string> zero_variance;
  std::vector<std::string> correlated;
};

// Walks columns in schema order and keeps one when it has nonzero variance
// and |r| < threshold against every column kept so far.
inline PruneResult correlation_prune(const Dataset& ds, double threshold = kDefaultCorrThreshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("correlation threshold must be in (0, 1]");
  if (ds.rows.size() < 2) throw InsufficientData("correlation prune needs at least 2 rows");
  ds.validate();
  std::vector<std::size_t> all(ds.schema.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Eigen::MatrixXd x = to_matrix(ds, all);
  x.rowwise() -= x.colwise().mean();
  const Eigen::VectorXd norms = x.colwise().norm();

  PruneResult res;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto& name = ds.schema[static_cast<std::size_t>(j)];
    if (norms(j) == 0.0) {
      res.zero_variance.push_back(name);
      continue;
    }
    bool redundant = false;
    for (Eigen::Index k : kept) {
      const double r = x.col(j).dot(x.col(k)) / (norms(j) * norms(k));
      if (std::abs(r) >= threshold) {
        redundant = true;
        break;
      }
    }
    if (redundant) {
      res.correlated.push_back(name);
    } else {
      kept.push_back(j);
      res.kept_columns.push_back(name);
    }
  }
  res.data = select_columns(ds, res.kept_columns);
  return res;
}

// ---------------------------------------------------------------------------
// Stage 3: PCA
// ---------------------------------------------------------------------------

inline FeatureTransform pca_fit(const Dataset& ds, double variance_target) {
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw ConfigError("variance target must be in (0, 1]");
  }
  if (ds.rows.size() < 2) throw InsufficientData("PCA needs at least 2 rows");
  if (ds.schema.empty()) throw DegenerateData("PCA input has no columns");
  ds.validate();
  for (const auto& name : ds.schema) {
    if (debug_index(name)) throw SchemaError("debug column '" + name + "' cannot enter PCA");
  }
  const auto n = static_cast<Eigen::Index>(ds.rows.size());
  std::vector<std::size_t> all(ds.schema.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Eigen::MatrixXd z = to_matrix(ds, all);
  const Eigen::Index d = z.cols();

  FeatureTransform ft;
  ft.kept_columns = ds.schema;
  ft.variance_target = variance_target;
  ft.means = z.colwise().mean().transpose();
  z.rowwise() -= ft.means.transpose();
  ft.stddevs.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n - 1));
    // A constant column contributes nothing; a unit divisor leaves it at zero.
    ft.stddevs(j) = sd > 0.0 ? sd : 1.0;
    z.col(j) /= ft.stddevs(j);
  }
  z /= std::sqrt(static_cast<double>(n - 1));

  Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  Eigen::VectorXd eig = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < sv.size(); ++i) eig(i) = sv(i) * sv(i);
  const double total = eig.sum();
  if (!(total > 0.0)) throw DegenerateData("total variance is zero");

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, d);
  v.leftCols(svd.matrixV().cols()) = svd.matrixV();
  ft.explained_variance_ratios.resize(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) ft.explained_variance_ratios[static_cast<std::size_t>(i)] = eig(i) / total;

  Eigen::Index k = 0;
  double cum = 0.0;
  while (k < d) {
    cum += ft.explained_variance_ratios[static_cast<std::size_t>(k)];
    ++k;
    if (cum >= variance_target - 1e-12) break;
  }
  ft.pca_basis = v.leftCols(k).transpose();
  for (Eigen::Index r = 0; r < k; ++r) {
    Eigen::Index arg = 0;
    for (Eigen::Index c = 1; c < d; ++c) {
      if (std::abs(ft.pca_basis(r, c)) > std::abs(ft.pca_basis(r, arg))) arg = c;
    }
    if (ft.pca_basis(r, arg) < 0.0) ft.pca_basis.row(r) *= -1.0;
  }
  return ft;
}

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

inline Eigen::VectorXd transform(const FeatureTransform& ft, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != ft.input_dim()) {
    throw SchemaError("record has " + std::to_string(x.size()) + " values, transform expects " +
                      std::to_string(ft.input_dim()));
  }
  return ft.pca_basis * ((x - ft.means).cwiseQuotient(ft.stddevs));
}

// Maps records of an arbitrary schema onto a transform's kept columns.
class Projector {
 public:
  Projector(const FeatureTransform& ft, const std::vector<std::string>& schema)
      : ft_(&ft),
        idx_(column_indices(schema, ft.kept_columns)),
        buf_(static_cast<Eigen::Index>(idx_.size())),
        out_(ft.pca_basis.rows()) {}

  const FeatureTransform& transform() const noexcept { return *ft_; }

  // The result lives in an internal buffer, overwritten by the next call.
  const Eigen::VectorXd& operator()(const std::vector<double>& values) {
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (idx_[i] >= values.size()) throw SchemaError("record is shorter than its schema");
      const auto k = static_cast<Eigen::Index>(i);
      buf_(k) = (values[idx_[i]] - ft_->means(k)) / ft_->stddevs(k);
    }
    out_.noalias() = ft_->pca_basis * buf_;
    return out_;
  }

  FeatureVector operator()(const CaptureRecord& r) { return {r.sample_index, (*this)(r.values)}; }

 private:
  const FeatureTransform* ft_;
  std::vector<std::size_t> idx_;
  Eigen::VectorXd buf_;
  Eigen::VectorXd out_;
};

inline std::vector<FeatureVector> transform(const FeatureTransform& ft, const Dataset& ds) {
  Projector p(ft, ds.schema);
  std::vector<FeatureVector> out;
  out.reserve(ds.rows.size());
  for (const auto& r : ds.rows) out.push_back(p(r));
  return out;
}

// ---------------------------------------------------------------------------
// Full fit
// ---------------------------------------------------------------------------

struct PipelineOptions {
  double corr_threshold = kDefaultCorrThreshold;
  double variance_target = 0.95;
  int max_rounds = 3;
};

struct PipelineReport {
  std::size_t raw_columns = 0;
  std::size_t decoded_columns = 0;
  std::size_t kept_columns = 0;
  std::size_t components = 0;
  int rounds = 0;
  double cumulative_variance = 0.0;
};

struct PipelineFit {
  FeatureTransform transform;
  PipelineReport report;
};

// Correlation pruning is repeated on its own output until the kept set stops
// changing (bounded by max_rounds), then PCA is fit once.
inline PipelineFit fit_pipeline(const Dataset& train, const PipelineOptions& opt = {}) {
  if (opt.max_rounds < 1) throw ConfigError("max_rounds must be at least 1");
  PipelineFit fit;
  fit.report.raw_columns = train.width();
  Dataset cur = decode(train);
  fit.report.decoded_columns = cur.width();
  std::vector<std::string> kept = cur.schema;
  for (int round = 1; round <= opt.max_rounds; ++round) {
    PruneResult p = correlation_prune(cur, opt.corr_threshold);
    fit.report.rounds = round;
    const bool stable = p.kept_columns == kept;
    kept = std::move(p.kept_columns);
    cur = std::move(p.data);
    if (stable) break;
  }
  fit.transform = pca_fit(cur, opt.variance_target);
  fit.transform.dropped_debug = debug_columns_in(train);
  fit.transform.corr_threshold = opt.corr_threshold;
  fit.report.kept_columns = kept.size();
  fit.report.components = fit.transform.output_dim();
  fit.report.cumulative_variance = fit.transform.cumulative_variance();
  return fit;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const FeatureTransform& ft) {
  nlohmann::json j;
  j["version"] = kTransformVersion;
  j["dropped_debug"] = ft.dropped_debug;
  j["kept_columns"] = ft.kept_columns;
  j["corr_threshold"] = ft.corr_threshold;
  j["variance_target"] = ft.variance_target;
  j["means"] = std::vector<double>(ft.means.data(), ft.means.data() + ft.means.size());
  j["stddevs"] = std::vector<double>(ft.stddevs.data(), ft.stddevs.data() + ft.stddevs.size());
  j["components"] = ft.pca_basis.rows();
  std::vector<double> basis;
  basis.reserve(static_cast<std::size_t>(ft.pca_basis.size()));
  for (Eigen::Index r = 0; r < ft.pca_basis.rows(); ++r) {
    for (Eigen::Index c = 0; c < ft.pca_basis.cols(); ++c) basis.push_back(ft.pca_basis(r, c));
  }
  j["pca_basis"] = basis;
  j["explained_variance_ratios"] = ft.explained_variance_ratios;
  return j;
}

inline FeatureTransform transform_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kTransformVersion) {
      throw FormatError("unsupported transform version " + j.at("version").dump());
    }
    FeatureTransform ft;
    ft.dropped_debug = j.at("dropped_debug").get<std::vector<std::string>>();
    ft.kept_columns = j.at("kept_columns").get<std::vector<std::string>>();
    ft.corr_threshold = j.at("corr_threshold").get<double>();
    ft.variance_target = j.at("variance_target").get<double>();
    const auto means = j.at("means").get<std::vector<double>>();
    const auto sds = j.at("stddevs").get<std::vector<double>>();
    const auto k = j.at("components").get<Eigen::Index>();
    const auto basis = j.at("pca_basis").get<std::vector<double>>();
    ft.explained_variance_ratios = j.at("explained_variance_ratios").get<std::vector<double>>();
    const auto d = static_cast<Eigen::Index>(ft.kept_columns.size());
    if (static_cast<Eigen::Index>(means.size()) != d || static_cast<Eigen::Index>(sds.size()) != d ||
        static_cast<Eigen::Index>(basis.size()) != k * d ||
        static_cast<Eigen::Index>(ft.explained_variance_ratios.size()) != d || k < 1 || k > d) {
      throw FormatError("transform arrays disagree with kept_columns");
    }
    ft.means = Eigen::Map<const Eigen::VectorXd>(means.data(), d);
    ft.stddevs = Eigen::Map<const Eigen::VectorXd>(sds.data(), d);
    ft.pca_basis.resize(k, d);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) ft.pca_basis(r, c) = basis[static_cast<std::size_t>(r * d + c)];
    }
    return ft;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed transform: ") + e.what());
  }
}

inline void save_transform(const FeatureTransform& ft, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << to_json(ft).dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path);
}

inline FeatureTransform load_transform(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return transform_from_json(j);
}

}  // namespace axims
