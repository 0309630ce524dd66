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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "axims/axi/oracle.hpp"
#include "axims/axi/types.hpp"
#include "axims/errors.hpp"

namespace axims {

enum class Arbitration : std::uint8_t { RoundRobin, QosPriority };

// Burst lengths (AxLEN) drawn by normal traffic.
inline constexpr std::array<unsigned, 5> kNormalBurstLens = {0, 1, 3, 7, 15};

struct MasterProfile {
  std::string name;
  double read_ratio = 0.5;
  double rate_weight = 1.0;  // relative issue rate
  std::array<double, 5> burst_weights = {0.35, 0.25, 0.20, 0.12, 0.08};
  double narrow_fraction = 0.1;  // beats of 4 bytes instead of full width
  unsigned qos_min = 0;
  unsigned qos_max = 3;           // normal traffic never saturates QoS
  std::uint8_t privileges = privilege::kNone;
  unsigned data_delay_max = 2;    // cycles before WDATA is ready
  double beat_gap_prob = 0.05;    // chance of a bubble before a W beat

  void validate() const {
    if (read_ratio < 0.0 || read_ratio > 1.0) throw ConfigError("read_ratio outside [0,1]");
    if (rate_weight <= 0.0) throw ConfigError("rate_weight must be > 0");
    if (qos_min > qos_max || qos_max > 14) throw ConfigError("normal qos range must lie in [0,14]");
    if (data_delay_max > 16) throw ConfigError("data_delay_max must be <= 16");
  }
};

inline std::vector<MasterProfile> default_master_profiles(unsigned num_masters) {
  std::vector<MasterProfile> out;
  for (unsigned m = 0; m < num_masters; ++m) {
    MasterProfile p;
    if (m == 0) {
      p.name = "cpu";
      p.read_ratio = 0.65;
      p.rate_weight = 1.3;
      p.qos_min = 4;
      p.qos_max = 8;
      p.privileges = privilege::kAll;
      p.burst_weights = {0.45, 0.25, 0.15, 0.10, 0.05};
    } else {
      switch ((m - 1) % 3) {
        case 0:
          p.name = "dma" + std::to_string(m);
          p.read_ratio = 0.5;
          p.rate_weight = 0.9;
          p.qos_min = 1;
          p.qos_max = 3;
          p.burst_weights = {0.10, 0.15, 0.25, 0.25, 0.25};
          break;
        case 1:
          p.name = "accel" + std::to_string(m);
          p.read_ratio = 0.6;
          p.rate_weight = 1.0;
          p.qos_min = 2;
          p.qos_max = 6;
          p.burst_weights = {0.20, 0.20, 0.25, 0.20, 0.15};
          break;
        default:
          p.name = "io" + std::to_string(m);
          p.read_ratio = 0.45;
          p.rate_weight = 0.8;
          p.qos_min = 0;
          p.qos_max = 2;
          p.narrow_fraction = 0.5;
          p.burst_weights = {0.60, 0.25, 0.10, 0.05, 0.00};
          break;
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

struct SimConfig {
  unsigned num_masters = 4;
  unsigned num_targets = 2;
  std::uint64_t cycles = 100'000;  // generation horizon
  std::uint64_t seed = 42;
  unsigned load_percent = 50;
  Arbitration arbitration = Arbitration::QosPriority;
  std::vector<MasterProfile> master_profiles;  // empty: default_master_profiles()
  unsigned bus_width_bytes = 8;
  unsigned max_outstanding = 4;   // per master
  unsigned queue_depth = 2;       // requests buffered per master
  std::uint64_t drain_limit = 500'000;
  // Stop normal generation after this many transactions (corpus mode).
  std::optional<std::uint64_t> normal_quota;
  OracleConfig oracle;  // thresholds used by attacks; privileges follow the profiles

  std::vector<MasterProfile> profiles() const {
    return master_profiles.empty() ? default_master_profiles(num_masters) : master_profiles;
  }

  OracleConfig oracle_config() const {
    OracleConfig o = oracle;
    o.bus_width_bytes = bus_width_bytes;
    o.master_privileges.clear();
    for (const auto& p : profiles()) o.master_privileges.push_back(p.privileges);
    return o;
  }

  void validate() const {
    if (num_masters < 2) throw ConfigError("num_masters must be >= 2");
    if (num_masters > 16) throw ConfigError("num_masters must be <= 16");
    if (num_targets < 1 || num_targets > 16) throw ConfigError("num_targets must be in [1,16]");
    if (load_percent < 1 || load_percent > 100) throw ConfigError("load_percent must be in [1,100]");
    if (cycles == 0) throw ConfigError("cycles must be > 0");
    if (max_outstanding == 0 || queue_depth == 0) throw ConfigError("queue limits must be > 0");
    if (!master_profiles.empty() && master_profiles.size() != num_masters) {
      throw ConfigError("master_profiles must list exactly num_masters entries");
    }
    if (normal_quota && *normal_quota == 0) throw ConfigError("normal_quota must be > 0");
    for (const auto& p : profiles()) p.validate();
    oracle_config().validate();
  }
};

}  // namespace axims
