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

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include "axims/capture/csv.hpp"
#include "axims/errors.hpp"
#include "axims/nn/smote.hpp"

namespace axims {

inline constexpr int kFeatureFileVersion = 1;

struct FeatureSplit {
  LabeledSet train;
  LabeledSet test;
};

// Projected samples with their split:
//   #features_version=1
//   sample_index,split,label,attack_kind,pc0,...,pc{k-1}
// split is 0 for training rows and 1 for test rows; attack_kind uses the
// same integer codes as the capture CSV (0 = none).
inline void write_features(const FeatureSplit& fs, std::ostream& os) {
  const auto k = static_cast<std::size_t>(std::max(fs.train.x.cols(), fs.test.x.cols()));
  os << "#features_version=" << kFeatureFileVersion << '\n' << "sample_index,split,label,attack_kind";
  for (std::size_t i = 0; i < k; ++i) os << ",pc" << i;
  os << '\n';
  std::string line;
  for (int side = 0; side < 2; ++side) {
    const LabeledSet& s = side == 0 ? fs.train : fs.test;
    for (std::size_t r = 0; r < s.size(); ++r) {
      line.clear();
      line += std::to_string(s.sample_index[r]);
      line += side == 0 ? ",0," : ",1,";
      line += std::to_string(s.y[r]);
      line += ',';
      line += std::to_string(s.kind[r] ? static_cast<int>(*s.kind[r]) : 0);
      for (Eigen::Index c = 0; c < s.x.cols(); ++c) {
        line += ',';
        detail::append_number(line, s.x(static_cast<Eigen::Index>(r), c));
      }
      line += '\n';
      os << line;
    }
  }
}

inline FeatureSplit read_features(std::istream& is) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(is, line) || line.rfind("#features_version=", 0) != 0) {
    throw SchemaError("line 1: missing #features_version header");
  }
  if (line != "#features_version=" + std::to_string(kFeatureFileVersion)) {
    throw SchemaError("line 1: unsupported feature file version");
  }
  ++line_no;
  if (!std::getline(is, line)) throw SchemaError("line 2: missing column header");
  const auto header = detail::split_fields(line);
  if (header.size() < 5 || header[0] != "sample_index" || header[1] != "split" || header[2] != "label" ||
      header[3] != "attack_kind") {
    throw SchemaError("line 2: expected sample_index,split,label,attack_kind,pc0,...");
  }
  const auto k = static_cast<Eigen::Index>(header.size() - 4);
  FeatureSplit fs;
  fs.train.x.resize(0, k);
  fs.test.x.resize(0, k);
  std::vector<std::vector<double>> rows[2];
  LabeledSet* sides[2] = {&fs.train, &fs.test};
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_fields(line);
    if (f.size() != header.size()) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(f.size()));
    }
    const double idx = detail::parse_field(f[0], line_no, "sample_index");
    const double split = detail::parse_field(f[1], line_no, "split");
    const double label = detail::parse_field(f[2], line_no, "label");
    const double kind = detail::parse_field(f[3], line_no, "attack_kind");
    if ((split != 0 && split != 1) || (label != 0 && label != 1) || idx < 0) {
      throw SchemaError("line " + std::to_string(line_no) + ": bad split, label or sample_index");
    }
    std::optional<AttackKind> ak;
    if (kind != 0) {
      ak = attack_kind_from_code(static_cast<int>(kind));
      if (!ak) throw SchemaError("line " + std::to_string(line_no) + ": unknown attack_kind code");
    }
    if ((label == 1) != ak.has_value()) {
      throw SchemaError("line " + std::to_string(line_no) + ": label disagrees with attack_kind");
    }
    const int side = static_cast<int>(split);
    std::vector<double> v(static_cast<std::size_t>(k));
    for (Eigen::Index c = 0; c < k; ++c) {
      v[static_cast<std::size_t>(c)] = detail::parse_field(f[static_cast<std::size_t>(4 + c)], line_no, header[static_cast<std::size_t>(4 + c)]);
    }
    rows[side].push_back(std::move(v));
    sides[side]->y.push_back(static_cast<int>(label));
    sides[side]->kind.push_back(ak);
    sides[side]->sample_index.push_back(static_cast<std::uint64_t>(idx));
    sides[side]->synthetic.push_back(false);
  }
  for (int side = 0; side < 2; ++side) {
    auto& x = sides[side]->x;
    x.resize(static_cast<Eigen::Index>(rows[side].size()), k);
    for (std::size_t r = 0; r < rows[side].size(); ++r) {
      for (Eigen::Index c = 0; c < k; ++c) x(static_cast<Eigen::Index>(r), c) = rows[side][r][static_cast<std::size_t>(c)];
    }
  }
  return fs;
}

inline void save_features(const FeatureSplit& fs, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_features(fs, os);
  if (!os) throw IoError("write failed: " + path);
}

inline FeatureSplit load_features(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  try {
    return read_features(is);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace axims
