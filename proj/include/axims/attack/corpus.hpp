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
#include <optional>
#include <vector>

#include "axims/attack/inject.hpp"
#include "axims/errors.hpp"
#include "axims/random.hpp"
#include "axims/sim/simulator.hpp"

namespace axims {

using AttackMix = std::map<AttackKind, std::uint64_t>;

// Per-vector sample counts of the reference malicious corpus (3,242 total).
inline AttackMix default_attack_mix() {
  return {{AttackKind::AwlenOverflow, 642}, {AttackKind::AridDuplication, 558},
          {AttackKind::AwqosFlooding, 423}, {AttackKind::AwsizeInvalid, 389},
          {AttackKind::ArprotViolation, 345}, {AttackKind::Mixed, 885}};
}

inline std::uint64_t mix_total(const AttackMix& mix) {
  std::uint64_t n = 0;
  for (const auto& [k, c] : mix) n += c;
  return n;
}

namespace detail {

inline std::vector<std::uint64_t> episode_sizes(AttackKind kind, std::uint64_t count,
                                                unsigned flood_window, Rng& rng) {
  std::uint64_t lo = 1, hi = 6;
  if (kind == AttackKind::AwqosFlooding) {
    lo = flood_window;
    hi = 2 * flood_window;
  } else if (kind == AttackKind::Mixed) {
    lo = 12;
    hi = 32;
  }
  std::vector<std::uint64_t> sizes;
  std::uint64_t left = count;
  while (left > 0) {
    std::uint64_t s = std::min(left, rng.uniform_int(lo, hi));
    if (left - s > 0 && left - s < lo) s = left;  // never leave a runt episode
    sizes.push_back(s);
    left -= s;
  }
  return sizes;
}

}  // namespace detail

// Spreads the requested malicious transactions over episodes at random start
// cycles within [2%, 90%] of `span`, each from a randomly picked attacker
// among the masters that lack full privileges.
inline std::vector<AttackPlan> plan_attacks(const SimConfig& cfg, const AttackMix& mix,
                                            std::uint64_t span, std::uint64_t seed) {
  cfg.validate();
  const auto profiles = cfg.profiles();
  std::vector<std::uint32_t> attackers;
  for (std::uint32_t m = 0; m < cfg.num_masters; ++m) {
    if (profiles[m].privileges != privilege::kAll) attackers.push_back(m);
  }
  if (attackers.empty()) throw ConfigError("no master without full privileges to act as attacker");
  const OracleConfig o = cfg.oracle_config();
  for (const auto& [kind, count] : mix) {
    if (kind == AttackKind::AwqosFlooding && count > 0 && count < o.qos_flood_window) {
      throw ConfigError("AwqosFlooding needs at least qos_flood_window transactions");
    }
    if (kind == AttackKind::Mixed && count == 1) {
      throw ConfigError("Mixed needs at least 2 transactions");
    }
  }

  Rng rng(derive_seed(seed, 0x91A75));
  std::vector<AttackPlan> plans;
  for (const auto& [kind, count] : mix) {
    if (count == 0) continue;
    for (std::uint64_t size : detail::episode_sizes(kind, count, o.qos_flood_window, rng)) {
      AttackPlan p;
      p.kind = kind;
      p.count = size;
      p.attacker_master = attackers[rng.uniform_int(0, attackers.size() - 1)];
      plans.push_back(p);
    }
  }
  rng.shuffle(plans.begin(), plans.end());
  const std::uint64_t lo = std::max<std::uint64_t>(1, span / 50);
  const std::uint64_t hi = std::max(lo, span * 9 / 10);
  for (auto& p : plans) p.start_cycle = rng.uniform_int(lo, hi);
  std::stable_sort(plans.begin(), plans.end(), [](const AttackPlan& a, const AttackPlan& b) {
    return a.start_cycle < b.start_cycle;
  });
  return plans;
}

// Plans `mix` over the span the normal traffic of `cfg` occupies. In quota
// mode the span shrinks until every episode finishes while normal traffic is
// still being generated; a late duplicate-ID request would otherwise need an
// extra primer read and the corpus would exceed its normal quota.
inline std::vector<AttackPlan> corpus_plans(const SimConfig& cfg, const AttackMix& mix, std::uint64_t seed) {
  cfg.validate();
  if (mix_total(mix) == 0) return {};
  if (!cfg.normal_quota) return plan_attacks(cfg, mix, cfg.cycles, seed);
  std::uint64_t span = simulate(cfg).generation_end;
  std::vector<AttackPlan> plans;
  for (int attempt = 0; attempt < 8; ++attempt, span = span * 17 / 20) {
    plans = plan_attacks(cfg, mix, span, seed);
    const SimTrace t = simulate(cfg, plans);
    const auto normal = std::count_if(t.transactions.begin(), t.transactions.end(),
                                      [](const AxiTransaction& x) { return !x.attack; });
    if (static_cast<std::uint64_t>(normal) == *cfg.normal_quota) break;
  }
  return plans;
}

// Dual-mode corpus: the normal traffic of `cfg` plus the requested
// malicious transactions, each tagged with its attack kind.
inline SimTrace build_attack_corpus(const SimConfig& cfg, const AttackMix& mix, std::uint64_t seed) {
  if (mix_total(mix) == 0) throw ConfigError("attack mix is empty");
  return simulate(cfg, corpus_plans(cfg, mix, seed));
}

}  // namespace axims
