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
#include <optional>
#include <vector>

#include "axims/axi/types.hpp"
#include "axims/errors.hpp"
#include "axims/random.hpp"
#include "axims/sim/config.hpp"
#include "axims/sim/request.hpp"

namespace axims {

struct AttackParams {
  std::optional<unsigned> overflow_len;  // fixed AWLEN; default uniform [max_legal+1, 255]
  unsigned flood_qos = 0xF;
  unsigned withhold_extra_max = 64;      // extra cycles past the stall timeout
};

struct AttackPlan {
  AttackKind kind = AttackKind::AwlenOverflow;
  std::uint32_t attacker_master = 1;
  std::uint64_t start_cycle = 0;
  std::uint64_t count = 1;  // malicious transactions
  AttackParams params;

  void validate(const SimConfig& cfg) const {
    if (count == 0) throw ConfigError("attack plan count must be > 0");
    if (attacker_master >= cfg.num_masters) {
      throw ConfigError("attacker_master " + std::to_string(attacker_master) +
                        " out of range for " + std::to_string(cfg.num_masters) + " masters");
    }
    const OracleConfig o = cfg.oracle_config();
    if (params.overflow_len &&
        (*params.overflow_len <= o.max_legal_len || *params.overflow_len > 255)) {
      throw ConfigError("overflow_len must exceed max_legal_len and fit 8 bits");
    }
    if (params.flood_qos != o.qos_flood_value) {
      throw ConfigError("flood_qos must equal the oracle's saturated QoS value");
    }
    if (kind == AttackKind::AwqosFlooding && count < o.qos_flood_window) {
      throw ConfigError("an AwqosFlooding plan needs at least qos_flood_window transactions");
    }
    if (kind == AttackKind::Mixed && count < 2) {
      throw ConfigError("a Mixed plan needs at least 2 transactions");
    }
    if (kind == AttackKind::ArprotViolation &&
        cfg.profiles()[attacker_master].privileges == privilege::kAll) {
      throw ConfigError("ArprotViolation needs an attacker without full privileges");
    }
  }
};

namespace detail {

// Mutates an otherwise normal request into one malicious transaction of a
// single base kind. Only the named fields change.
inline void apply_attack_field(Request& r, AttackKind component, const AttackParams& params,
                               const MasterProfile& profile, const SimConfig& cfg, Rng& rng) {
  const OracleConfig o = cfg.oracle_config();
  switch (component) {
    case AttackKind::AwlenOverflow: {
      r.write = true;
      const unsigned len = params.overflow_len
                               ? *params.overflow_len
                               : static_cast<unsigned>(rng.uniform_int(o.max_legal_len + 1, 255));
      r.len = static_cast<std::uint8_t>(len);
      const std::uint16_t first = r.beat_gaps.empty() ? 0 : r.beat_gaps[0];
      r.beat_gaps.assign(len + 1u, 0);
      r.beat_gaps[0] = first;
      if (r.response_latency == 0) r.response_latency = 1;
      break;
    }
    case AttackKind::AridDuplication:
      r.write = false;
      r.duplicate_id = true;
      break;
    case AttackKind::AwqosFlooding:
      r.write = true;
      r.qos = static_cast<std::uint8_t>(params.flood_qos);
      break;
    case AttackKind::AwsizeInvalid:
      r.write = true;
      r.size = static_cast<std::uint8_t>(rng.uniform_int(o.max_size() + 1, 7));
      break;
    case AttackKind::ArprotViolation: {
      r.write = false;
      // Request an attribute outside the master's privilege set.
      std::vector<std::uint8_t> options;
      for (std::uint8_t bits = 0; bits < 8; ++bits) {
        if (requested_privilege(bits) & ~profile.privileges) options.push_back(bits);
      }
      r.prot = options[rng.uniform_int(0, options.size() - 1)];
      break;
    }
    case AttackKind::WdataWithhold:
      r.write = true;
      if (r.beat_gaps.empty()) r.beat_gaps.assign(r.len + 1u, 0);
      r.beat_gaps[0] = static_cast<std::uint16_t>(
          o.stall_timeout_cycles + 1 + rng.uniform_int(0, params.withhold_extra_max));
      break;
    case AttackKind::Mixed:
      break;
  }
  // A write born as a read needs its data-phase timing, and vice versa.
  if (r.write && r.beat_gaps.size() != r.len + 1u) {
    r.beat_gaps.assign(r.len + 1u, 0);
    r.response_latency = 1 + static_cast<unsigned>(rng.uniform_int(0, 2));
  }
  if (!r.write) {
    r.beat_gaps.clear();
    if (r.response_latency < 4) r.response_latency = 4 + static_cast<unsigned>(rng.uniform_int(0, 4));
  }
}

inline std::vector<AttackKind> mixed_sequence(std::uint64_t count, unsigned flood_window,
                                              bool allow_prot, Rng& rng) {
  std::vector<AttackKind> pool;
  for (AttackKind k : kBaseAttackKinds) {
    if (k == AttackKind::AwqosFlooding && count < flood_window + 3) continue;
    if (k == AttackKind::ArprotViolation && !allow_prot) continue;
    pool.push_back(k);
  }
  rng.shuffle(pool.begin(), pool.end());
  const std::size_t want = std::min<std::size_t>(pool.size(), 2 + rng.uniform_int(0, 2));
  std::vector<AttackKind> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
  // A flood block needs a full window, so it goes first while room remains.
  std::stable_partition(chosen.begin(), chosen.end(),
                        [](AttackKind k) { return k == AttackKind::AwqosFlooding; });

  std::vector<AttackKind> seq;
  seq.reserve(count);
  std::size_t introduced = 0;
  while (seq.size() < count) {
    const std::uint64_t remaining = count - seq.size();
    // Introduce each chosen kind once before repeating any.
    AttackKind k = introduced < chosen.size() ? chosen[introduced]
                                              : chosen[rng.uniform_int(0, chosen.size() - 1)];
    if (k == AttackKind::AwqosFlooding && remaining < flood_window) {
      if (chosen.size() == 1) break;
      do {
        k = chosen[rng.uniform_int(0, chosen.size() - 1)];
      } while (k == AttackKind::AwqosFlooding);
    }
    if (introduced < chosen.size()) ++introduced;
    const std::uint64_t reserve = chosen.size() - introduced;  // kinds still to introduce
    std::uint64_t block = k == AttackKind::AwqosFlooding
                              ? flood_window + rng.uniform_int(0, 4)
                              : 1 + rng.uniform_int(0, 3);
    block = std::max<std::uint64_t>(1, std::min(block, remaining - reserve));
    seq.insert(seq.end(), block, k);
  }
  return seq;
}

}  // namespace detail

// Expands a plan into the malicious requests the attacker will issue, in
// program order. The attacker's normal profile supplies all untouched fields.
inline std::vector<Request> inject(const AttackPlan& plan, const SimConfig& cfg, Rng& rng) {
  plan.validate(cfg);
  const auto profiles = cfg.profiles();
  const MasterProfile& profile = profiles[plan.attacker_master];
  const OracleConfig o = cfg.oracle_config();

  std::vector<AttackKind> components;
  if (plan.kind == AttackKind::Mixed) {
    components = detail::mixed_sequence(plan.count, o.qos_flood_window,
                                        profile.privileges != privilege::kAll, rng);
  } else {
    components.assign(plan.count, plan.kind);
  }

  std::vector<Request> out;
  out.reserve(components.size());
  for (AttackKind component : components) {
    Request r = generate_normal_request(profile, plan.attacker_master, cfg, rng);
    detail::apply_attack_field(r, component, plan.params, profile, cfg, rng);
    r.attack = AttackTag{plan.kind, component};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace axims
