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
#include "axims/random.hpp"
#include "axims/sim/config.hpp"

namespace axims {

// A transaction a master wants to issue, with every random choice already
// made. Timing-dependent fields (ARID for reads) are resolved at grant.
struct Request {
  bool write = false;
  std::uint8_t id = 0;  // AWID; reads take a free ARID at grant
  std::uint32_t addr = 0;
  std::uint8_t len = 0;
  std::uint8_t size = 3;
  std::uint8_t qos = 0;
  std::uint8_t prot = 0;
  unsigned target = 0;
  // Idle cycles before each data beat. For writes the first entry is the
  // delay after the AW handshake before WDATA is offered.
  std::vector<std::uint16_t> beat_gaps;
  // Reads: AR handshake to first data ready. Writes: last W to B ready.
  unsigned response_latency = 1;
  bool duplicate_id = false;  // ARID reuses an in-flight ID
  std::optional<AttackTag> attack;

  friend bool operator==(const Request&, const Request&) = default;
};

struct AddressMap {
  std::uint64_t target_window = 0;
  std::uint64_t master_region = 0;

  AddressMap(unsigned num_targets, unsigned num_masters)
      : target_window((1ULL << 32) / num_targets),
        master_region(((1ULL << 32) / num_targets) / num_masters) {}

  unsigned target_of(std::uint32_t addr) const noexcept {
    return static_cast<unsigned>(addr / target_window);
  }
};

inline Request generate_normal_request(const MasterProfile& p, std::uint32_t master,
                                       const SimConfig& cfg, Rng& rng) {
  const AddressMap map(cfg.num_targets, cfg.num_masters);
  const unsigned full_size = static_cast<unsigned>(std::countr_zero(cfg.bus_width_bytes));
  Request r;
  r.write = !rng.bernoulli(p.read_ratio);
  r.len = static_cast<std::uint8_t>(kNormalBurstLens[rng.weighted(p.burst_weights)]);
  r.size = static_cast<std::uint8_t>(
      rng.bernoulli(p.narrow_fraction) ? std::min(2u, full_size) : full_size);
  r.target = static_cast<unsigned>(rng.uniform_int(0, cfg.num_targets - 1));
  const std::uint64_t slots = map.master_region / 64;
  const std::uint64_t offset = rng.uniform_int(0, slots - 1) * 64;
  r.addr = static_cast<std::uint32_t>(r.target * map.target_window + master * map.master_region +
                                      offset);
  r.qos = static_cast<std::uint8_t>(rng.uniform_int(p.qos_min, p.qos_max));
  std::uint8_t prot_bits = prot::kNonSecure;
  if (p.privileges & privilege::kPrivileged) {
    if (rng.bernoulli(0.5)) prot_bits |= prot::kPrivileged;
  }
  if (p.privileges & privilege::kSecure) {
    if (rng.bernoulli(0.5)) prot_bits &= static_cast<std::uint8_t>(~prot::kNonSecure);
  }
  if (!r.write && rng.bernoulli(0.2)) prot_bits |= prot::kInstruction;
  r.prot = prot_bits;
  r.id = static_cast<std::uint8_t>(rng.uniform_int(0, 15));
  if (r.write) {
    r.beat_gaps.resize(r.len + 1u);
    r.beat_gaps[0] = static_cast<std::uint16_t>(rng.uniform_int(0, p.data_delay_max));
    for (std::size_t i = 1; i < r.beat_gaps.size(); ++i) {
      r.beat_gaps[i] =
          rng.bernoulli(p.beat_gap_prob) ? static_cast<std::uint16_t>(rng.uniform_int(1, 3)) : 0;
    }
    r.response_latency = static_cast<unsigned>(1 + rng.uniform_int(0, 2));
  } else {
    // Target 0 is memory-like, others are slower peripherals.
    r.response_latency = static_cast<unsigned>(r.target == 0 ? 8 + rng.uniform_int(0, 8)
                                                             : 4 + rng.uniform_int(0, 4));
  }
  return r;
}

}  // namespace axims
