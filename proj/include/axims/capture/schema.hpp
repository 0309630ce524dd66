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
#include <cstddef>
#include <optional>
#include <string_view>

namespace axims {

struct ColumnSpec {
  std::string_view name;
  unsigned bits;  // width in the packed raw image
};

inline constexpr int kSchemaVersion = 1;

// Protocol features, in published column order. Fields of channels a
// transaction does not use are zero.
inline constexpr std::array<ColumnSpec, 52> kProtocolColumns = {{
    // AW. AWLEN is captured as two nibbles: the low one is the AXI3 length
    // field, the high one holds the AXI4 extension bits.
    {"aw_valid", 1}, {"aw_ready", 1}, {"aw_id", 4}, {"aw_addr", 32}, {"aw_len_lo", 4},
    {"aw_len_hi", 4}, {"aw_size", 3}, {"aw_burst", 2}, {"aw_qos", 4}, {"aw_prot", 3}, {"aw_wait", 7},
    // W
    {"w_valid", 1}, {"w_ready", 1}, {"w_beats", 9}, {"w_strb_first", 8}, {"w_strb_last", 8},
    {"w_last", 1}, {"w_first_delta", 10}, {"w_span", 9}, {"w_gap_max", 6},
    // B
    {"b_valid", 1}, {"b_ready", 1}, {"b_id", 4}, {"b_resp", 2}, {"b_delta", 6}, {"b_total", 10},
    // AR
    {"ar_valid", 1}, {"ar_ready", 1}, {"ar_id", 4}, {"ar_addr", 32}, {"ar_len", 8},
    {"ar_size", 3}, {"ar_burst", 2}, {"ar_qos", 4}, {"ar_prot", 3}, {"ar_wait", 7},
    // R. Read beats are never gapped by the target model, so there is no
    // r_gap_max counterpart to w_gap_max.
    {"r_valid", 1}, {"r_ready", 1}, {"r_id", 4}, {"r_beats", 9}, {"r_resp", 2}, {"r_last", 1},
    {"r_first_delta", 8}, {"r_span", 9},
    // Monitor context
    {"master_port", 2}, {"aw_target", 1}, {"ar_target", 1}, {"issue_gap", 6},
    {"ar_id_inflight", 4}, {"qos_run", 4}, {"outstanding_reads", 4}, {"outstanding_writes", 4},
}};

// Capture-infrastructure fields; never part of the AXI protocol.
inline constexpr std::array<ColumnSpec, 5> kDebugColumns = {{
    {"dbg_trigger_position", 5},
    {"dbg_capture_window", 4},
    {"dbg_probe_status", 2},
    {"dbg_sample_counter", 10},
    {"dbg_overflow", 1},
}};

// Cycles per capture window; trigger position is the offset inside it.
inline constexpr std::uint64_t kCaptureWindowCycles = 1024;
inline constexpr std::uint64_t kProbeArmed = 1;

inline constexpr std::string_view kLabelColumn = "label";
inline constexpr std::string_view kAttackColumn = "attack_kind";

constexpr unsigned total_bits(auto const& cols) {
  unsigned n = 0;
  for (const auto& c : cols) n += c.bits;
  return n;
}

inline constexpr unsigned kProtocolBits = total_bits(kProtocolColumns);
inline constexpr unsigned kDebugBits = total_bits(kDebugColumns);
inline constexpr unsigned kRawSampleBits = kProtocolBits + kDebugBits;
static_assert(kProtocolBits == 268);
static_assert(kRawSampleBits == 290);

inline constexpr std::size_t kNumProtocol = kProtocolColumns.size();
inline constexpr std::size_t kNumDebug = kDebugColumns.size();
inline constexpr std::size_t kNumCaptured = kNumProtocol + kNumDebug;

constexpr std::optional<std::size_t> protocol_index(std::string_view name) {
  for (std::size_t i = 0; i < kProtocolColumns.size(); ++i) {
    if (kProtocolColumns[i].name == name) return i;
  }
  return std::nullopt;
}

constexpr std::optional<std::size_t> debug_index(std::string_view name) {
  for (std::size_t i = 0; i < kDebugColumns.size(); ++i) {
    if (kDebugColumns[i].name == name) return i;
  }
  return std::nullopt;
}

// Column positions, usable as array indices.
namespace col {
#define AXIMS_COL(name) inline constexpr std::size_t name = *protocol_index(#name)
AXIMS_COL(aw_valid); AXIMS_COL(aw_ready); AXIMS_COL(aw_id); AXIMS_COL(aw_addr);
AXIMS_COL(aw_len_lo); AXIMS_COL(aw_len_hi); AXIMS_COL(aw_size); AXIMS_COL(aw_burst); AXIMS_COL(aw_qos);
AXIMS_COL(aw_prot); AXIMS_COL(aw_wait);
AXIMS_COL(w_valid); AXIMS_COL(w_ready); AXIMS_COL(w_beats); AXIMS_COL(w_strb_first);
AXIMS_COL(w_strb_last); AXIMS_COL(w_last); AXIMS_COL(w_first_delta); AXIMS_COL(w_span);
AXIMS_COL(w_gap_max);
AXIMS_COL(b_valid); AXIMS_COL(b_ready); AXIMS_COL(b_id); AXIMS_COL(b_resp);
AXIMS_COL(b_delta); AXIMS_COL(b_total);
AXIMS_COL(ar_valid); AXIMS_COL(ar_ready); AXIMS_COL(ar_id); AXIMS_COL(ar_addr);
AXIMS_COL(ar_len); AXIMS_COL(ar_size); AXIMS_COL(ar_burst); AXIMS_COL(ar_qos);
AXIMS_COL(ar_prot); AXIMS_COL(ar_wait);
AXIMS_COL(r_valid); AXIMS_COL(r_ready); AXIMS_COL(r_id); AXIMS_COL(r_beats);
AXIMS_COL(r_resp); AXIMS_COL(r_last); AXIMS_COL(r_first_delta); AXIMS_COL(r_span);
AXIMS_COL(master_port); AXIMS_COL(aw_target); AXIMS_COL(ar_target); AXIMS_COL(issue_gap);
AXIMS_COL(ar_id_inflight); AXIMS_COL(qos_run); AXIMS_COL(outstanding_reads);
AXIMS_COL(outstanding_writes);
#undef AXIMS_COL
}  // namespace col

}  // namespace axims
