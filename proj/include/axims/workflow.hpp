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

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>

#include "axims/attack/corpus.hpp"
#include "axims/capture/capture.hpp"
#include "axims/errors.hpp"
#include "axims/features/pipeline.hpp"
#include "axims/nn/feature_file.hpp"
#include "axims/nn/fixed_point.hpp"
#include "axims/nn/metrics.hpp"
#include "axims/nn/mlp.hpp"
#include "axims/nn/quantized.hpp"
#include "axims/nn/smote.hpp"

namespace axims {

inline constexpr std::uint64_t kDefaultSeed = 42;

// Every knob of the end-to-end experiment. Defaults reproduce the reference
// corpus size (16,383 normal + 3,242 malicious) and the detector setup.
struct RunConfig {
  std::uint64_t seed = kDefaultSeed;
  SimConfig sim = [] {
    SimConfig c;
    c.normal_quota = 16'383;
    c.cycles = 2'000'000;
    return c;
  }();
  AttackMix mix = default_attack_mix();
  double train_fraction = 0.8;
  double corr_threshold = kDefaultCorrThreshold;
  double variance_target = 0.97;
  int smote_k = kDefaultSmoteNeighbors;
  TrainOptions training;
  FixedFormat weight_format{8, 5};
  double sparsity_target = 0.8;
  double threshold = kDefaultThreshold;
};

// "none", "default", or a file of `Kind = count` lines ('#' comments).
inline AttackMix parse_attack_mix(std::istream& is, const std::string& origin) {
  AttackMix mix;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected Kind = count");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    const auto kind = parse_attack_kind(key);
    if (!kind) throw ConfigError(where + ": unknown attack kind '" + key + "'");
    std::uint64_t n = 0;
    try {
      std::size_t pos = 0;
      n = std::stoull(val, &pos);
      if (pos != val.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw ConfigError(where + ": bad count '" + val + "'");
    }
    if (n > 0) mix[*kind] = n;
  }
  return mix;
}

inline AttackMix load_attack_mix(const std::string& spec) {
  if (spec == "none") return {};
  if (spec == "default") return default_attack_mix();
  std::ifstream is(spec);
  if (!is) throw IoError("cannot open attack mix " + spec);
  return parse_attack_mix(is, spec);
}

inline SimConfig seeded_sim(const RunConfig& rc) {
  SimConfig c = rc.sim;
  c.seed = rc.seed;
  return c;
}

inline SimTrace generate_trace(const RunConfig& rc) {
  const SimConfig c = seeded_sim(rc);
  return simulate(c, corpus_plans(c, rc.mix, rc.seed));
}

struct Preprocessed {
  PipelineFit fit;
  FeatureSplit features;
};

// Split first, then fit the transform on the training rows only.
inline Preprocessed preprocess(const Dataset& ds, const RunConfig& rc) {
  const Split sp = split_dataset(ds, rc.train_fraction, rc.seed, rc.smote_k);
  Preprocessed p;
  p.fit = fit_pipeline(sp.train, {rc.corr_threshold, rc.variance_target, 3});
  p.features.train = project(p.fit.transform, sp.train);
  p.features.test = project(p.fit.transform, sp.test);
  return p;
}

inline TrainOptions seeded_training(const RunConfig& rc) {
  TrainOptions o = rc.training;
  o.seed = rc.seed;
  return o;
}

inline TrainResult train_float(const FeatureSplit& fs, const RunConfig& rc) {
  return train(smote(fs.train, rc.smote_k, rc.seed), seeded_training(rc));
}

inline QuantizedTrainResult train_detector(const FeatureSplit& fs, const RunConfig& rc) {
  return train_quantized(smote(fs.train, rc.smote_k, rc.seed), rc.weight_format, rc.sparsity_target,
                         seeded_training(rc));
}

template <typename Model>
std::vector<double> score_all(const Model& m, const LabeledSet& s) {
  std::vector<double> out;
  out.reserve(s.size());
  if constexpr (std::is_same_v<Model, QuantizedMlpModel>) {
    IntegerEngine engine(m);
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) out.push_back(engine.score(Eigen::VectorXd(s.x.row(i).transpose())));
  } else {
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) out.push_back(infer(m, Eigen::VectorXd(s.x.row(i).transpose())));
  }
  return out;
}

}  // namespace axims
