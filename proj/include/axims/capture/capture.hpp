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
#include <string>
#include <unordered_map>
#include <vector>

#include "axims/axi/types.hpp"
#include "axims/capture/schema.hpp"
#include "axims/errors.hpp"
#include "axims/sim/config.hpp"
#include "axims/sim/request.hpp"
#include "axims/sim/simulator.hpp"

namespace axims {

// One flattened sample. `values` follows the owning Dataset's schema.
struct CaptureRecord {
  std::uint64_t sample_index = 0;
  std::uint64_t cycle = 0;
  std::vector<double> values;
  int label = 0;  // 1 = malicious
  std::optional<AttackKind> attack_kind;

  friend bool operator==(const CaptureRecord&, const CaptureRecord&) = default;
};

struct Dataset {
  std::vector<std::string> schema;
  std::vector<CaptureRecord> rows;

  std::size_t width() const noexcept { return schema.size(); }

  std::size_t count(int label) const {
    return static_cast<std::size_t>(std::count_if(
        rows.begin(), rows.end(), [label](const CaptureRecord& r) { return r.label == label; }));
  }

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i] == name) return i;
    }
    return std::nullopt;
  }

  void validate() const {
    for (const auto& r : rows) {
      if (r.values.size() != schema.size()) {
        throw SchemaError("record " + std::to_string(r.sample_index) + " has " +
                          std::to_string(r.values.size()) + " values for a " +
                          std::to_string(schema.size()) + "-column schema");
      }
      if ((r.label == 1) != r.attack_kind.has_value() || (r.label != 0 && r.label != 1)) {
        throw SchemaError("record " + std::to_string(r.sample_index) +
                          " label disagrees with attack_kind");
      }
    }
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

inline std::vector<std::string> protocol_schema() {
  std::vector<std::string> s;
  for (const auto& c : kProtocolColumns) s.emplace_back(c.name);
  return s;
}

inline std::vector<std::string> capture_schema() {
  auto s = protocol_schema();
  for (const auto& c : kDebugColumns) s.emplace_back(c.name);
  return s;
}

// Streaming capture: feed transactions in trace order, get one record each.
class CaptureBuilder {
 public:
  explicit CaptureBuilder(const SimConfig& cfg)
      : map_(cfg.num_targets, cfg.num_masters), flood_qos_(cfg.oracle_config().qos_flood_value) {}

  CaptureRecord add(const AxiTransaction& t) {
    CaptureRecord rec;
    rec.sample_index = next_index_++;
    rec.values.assign(kNumCaptured, 0.0);
    auto& v = rec.values;
    const HeaderEvent* addr = t.address_event();
    if (!addr) throw SchemaError("transaction without an address handshake");
    const AxiHeader& h = addr->header;
    rec.cycle = addr->cycle;
    rec.label = t.attack ? 1 : 0;
    if (t.attack) rec.attack_kind = t.attack->kind;

    std::uint64_t valid_cycle = addr->cycle;
    for (const auto& e : t.headers) {
      if (e.header.channel == h.channel && e.valid && !e.ready) {
        valid_cycle = std::min(valid_cycle, e.cycle);
      }
    }

    // Context at the address handshake.
    std::erase_if(in_flight_, [&](const Active& a) { return a.complete < addr->cycle; });
    std::size_t reads = 0, writes = 0, same_id = 0;
    for (const auto& a : in_flight_) {
      if (a.write) {
        ++writes;
      } else {
        ++reads;
        if (a.id == h.id) ++same_id;
      }
    }
    const bool write = h.channel == ChannelKind::AW;
    auto& run = qos_run_[t.master_id];
    run = h.qos == flood_qos_ ? run + 1 : 0;
    const auto last = last_issue_.find(t.master_id);
    const std::uint64_t gap = last == last_issue_.end() ? 0 : addr->cycle - last->second;
    last_issue_[t.master_id] = addr->cycle;

    v[col::master_port] = t.master_id;
    v[col::issue_gap] = static_cast<double>(gap);
    v[col::qos_run] = static_cast<double>(run);
    v[col::outstanding_reads] = static_cast<double>(reads);
    v[col::outstanding_writes] = static_cast<double>(writes);

    std::vector<std::uint64_t> beats;
    const HeaderEvent* first_beat = nullptr;
    const HeaderEvent* last_beat = nullptr;
    const HeaderEvent* bresp = nullptr;
    const ChannelKind data = write ? ChannelKind::W : ChannelKind::R;
    for (const auto& e : t.headers) {
      if (!e.handshake()) continue;
      if (e.header.channel == data) {
        beats.push_back(e.cycle);
        if (!first_beat) first_beat = &e;
        last_beat = &e;
      } else if (e.header.channel == ChannelKind::B) {
        bresp = &e;
      }
    }
    std::uint64_t gap_max = 0;
    for (std::size_t i = 1; i < beats.size(); ++i) {
      gap_max = std::max(gap_max, beats[i] - beats[i - 1] - 1);
    }
    auto d = [](std::uint64_t x) { return static_cast<double>(x); };

    if (write) {
      v[col::aw_valid] = 1;
      v[col::aw_ready] = 1;
      v[col::aw_id] = h.id;
      v[col::aw_addr] = h.addr;
      v[col::aw_len_lo] = h.len & 0xF;
      v[col::aw_len_hi] = h.len >> 4;
      v[col::aw_size] = h.size;
      v[col::aw_burst] = static_cast<double>(h.burst);
      v[col::aw_qos] = h.qos;
      v[col::aw_prot] = h.prot;
      v[col::aw_wait] = d(addr->cycle - valid_cycle);
      v[col::aw_target] = map_.target_of(h.addr);
      if (first_beat) {
        v[col::w_valid] = 1;
        v[col::w_ready] = 1;
        v[col::w_beats] = d(beats.size());
        v[col::w_strb_first] = d(first_beat->header.strb);
        v[col::w_strb_last] = d(last_beat->header.strb);
        v[col::w_last] = last_beat->header.last ? 1 : 0;
        v[col::w_first_delta] = d(first_beat->cycle - addr->cycle);
        v[col::w_span] = d(last_beat->cycle - first_beat->cycle);
        v[col::w_gap_max] = d(gap_max);
      }
      if (bresp) {
        v[col::b_valid] = 1;
        v[col::b_ready] = 1;
        v[col::b_id] = bresp->header.id;
        v[col::b_resp] = static_cast<double>(bresp->header.resp);
        v[col::b_delta] = last_beat ? d(bresp->cycle - last_beat->cycle) : 0;
        v[col::b_total] = d(bresp->cycle - addr->cycle);
      }
    } else {
      v[col::ar_valid] = 1;
      v[col::ar_ready] = 1;
      v[col::ar_id] = h.id;
      v[col::ar_addr] = h.addr;
      v[col::ar_len] = h.len;
      v[col::ar_size] = h.size;
      v[col::ar_burst] = static_cast<double>(h.burst);
      v[col::ar_qos] = h.qos;
      v[col::ar_prot] = h.prot;
      v[col::ar_wait] = d(addr->cycle - valid_cycle);
      v[col::ar_target] = map_.target_of(h.addr);
      v[col::ar_id_inflight] = d(same_id);
      if (first_beat) {
        v[col::r_valid] = 1;
        v[col::r_ready] = 1;
        v[col::r_id] = last_beat->header.id;
        v[col::r_beats] = d(beats.size());
        v[col::r_resp] = static_cast<double>(last_beat->header.resp);
        v[col::r_last] = last_beat->header.last ? 1 : 0;
        v[col::r_first_delta] = d(first_beat->cycle - addr->cycle);
        v[col::r_span] = d(last_beat->cycle - first_beat->cycle);
      }
    }

    bool overflow = false;
    for (std::size_t i = 0; i < kNumProtocol; ++i) {
      const unsigned bits = kProtocolColumns[i].bits;
      if (bits < 53 && v[i] >= static_cast<double>(1ULL << bits)) overflow = true;
    }
    v[kNumProtocol + 0] = d(rec.cycle % kCaptureWindowCycles);
    v[kNumProtocol + 1] = d(rec.cycle / kCaptureWindowCycles);
    v[kNumProtocol + 2] = d(kProbeArmed);
    v[kNumProtocol + 3] = d(rec.sample_index);
    v[kNumProtocol + 4] = overflow ? 1 : 0;

    in_flight_.push_back(Active{t.complete_cycle.value_or(~0ULL), write, h.id});
    return rec;
  }

 private:
  struct Active {
    std::uint64_t complete;
    bool write;
    std::uint8_t id;
  };

  AddressMap map_;
  unsigned flood_qos_;
  std::uint64_t next_index_ = 0;
  std::vector<Active> in_flight_;
  std::unordered_map<std::uint32_t, unsigned> qos_run_;
  std::unordered_map<std::uint32_t, std::uint64_t> last_issue_;
};

// One record per transaction, in trace order.
inline Dataset capture(const SimTrace& trace, const SimConfig& cfg) {
  Dataset ds;
  ds.schema = capture_schema();
  CaptureBuilder builder(cfg);
  ds.rows.reserve(trace.transactions.size());
  for (const auto& t : trace.transactions) ds.rows.push_back(builder.add(t));
  return ds;
}

}  // namespace axims
