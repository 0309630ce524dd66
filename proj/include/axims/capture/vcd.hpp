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
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "axims/axi/types.hpp"
#include "axims/errors.hpp"
#include "axims/sim/simulator.hpp"

namespace axims {

struct VcdSignal {
  std::string name;
  ChannelKind channel;
  unsigned width;
};

// Interconnect-side signals dumped per channel.
inline std::vector<VcdSignal> vcd_signals(unsigned bus_width_bytes) {
  std::vector<VcdSignal> s;
  for (ChannelKind ch : {ChannelKind::AW, ChannelKind::AR}) {
    const std::string p = ch == ChannelKind::AW ? "aw" : "ar";
    s.push_back({p + "valid", ch, 1});
    s.push_back({p + "ready", ch, 1});
    s.push_back({p + "id", ch, 4});
    s.push_back({p + "addr", ch, 32});
    s.push_back({p + "len", ch, 8});
    s.push_back({p + "size", ch, 3});
    s.push_back({p + "burst", ch, 2});
    s.push_back({p + "qos", ch, 4});
    s.push_back({p + "prot", ch, 3});
  }
  s.push_back({"wvalid", ChannelKind::W, 1});
  s.push_back({"wready", ChannelKind::W, 1});
  s.push_back({"wstrb", ChannelKind::W, bus_width_bytes});
  s.push_back({"wlast", ChannelKind::W, 1});
  s.push_back({"bvalid", ChannelKind::B, 1});
  s.push_back({"bready", ChannelKind::B, 1});
  s.push_back({"bid", ChannelKind::B, 4});
  s.push_back({"bresp", ChannelKind::B, 2});
  s.push_back({"rvalid", ChannelKind::R, 1});
  s.push_back({"rready", ChannelKind::R, 1});
  s.push_back({"rid", ChannelKind::R, 4});
  s.push_back({"rresp", ChannelKind::R, 2});
  s.push_back({"rlast", ChannelKind::R, 1});
  return s;
}

// Value of a signal given the handshake on its channel (nullptr: idle).
inline std::uint64_t vcd_signal_value(const VcdSignal& sig, const HeaderEvent* e) {
  if (!e) return 0;
  const AxiHeader& h = e->header;
  const std::string_view n = std::string_view(sig.name).substr(sig.channel == ChannelKind::W ||
                                                                        sig.channel == ChannelKind::B ||
                                                                        sig.channel == ChannelKind::R
                                                                    ? 1
                                                                    : 2);
  if (n == "valid") return e->valid;
  if (n == "ready") return e->ready;
  if (n == "id") return h.id;
  if (n == "addr") return h.addr;
  if (n == "len") return h.len;
  if (n == "size") return h.size;
  if (n == "burst") return static_cast<std::uint64_t>(h.burst);
  if (n == "qos") return h.qos;
  if (n == "prot") return h.prot;
  if (n == "strb") return h.strb;
  if (n == "last") return h.last;
  if (n == "resp") return static_cast<std::uint64_t>(h.resp);
  return 0;
}

inline std::string vcd_identifier(std::size_t i) {
  std::string id;
  do {
    id += static_cast<char>('!' + i % 94);
    i /= 94;
  } while (i > 0);
  return id;
}

// Handshakes only: each channel shows its payload during the cycle it
// transfers and returns to zero afterwards. Labels are not dumped.
inline void write_vcd(const SimTrace& trace, unsigned bus_width_bytes, std::ostream& os) {
  const auto sigs = vcd_signals(bus_width_bytes);
  os << "$version axims capture $end\n$timescale 1ns $end\n$scope module axi $end\n";
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    os << "$var wire " << sigs[i].width << ' ' << vcd_identifier(i) << ' ' << sigs[i].name
       << " $end\n";
  }
  os << "$upscope $end\n$enddefinitions $end\n";

  std::map<std::uint64_t, std::array<const HeaderEvent*, 5>> by_cycle;
  for (const auto& t : trace.transactions) {
    for (const auto& e : t.headers) {
      if (!e.handshake()) continue;
      auto& slot = by_cycle[e.cycle][static_cast<std::size_t>(e.header.channel)];
      if (slot) throw SchemaError("two handshakes on one channel in cycle " + std::to_string(e.cycle));
      slot = &e;
    }
    // Idle marker for the cycle after each handshake.
    for (const auto& e : t.headers) {
      if (e.handshake()) by_cycle.try_emplace(e.cycle + 1, std::array<const HeaderEvent*, 5>{});
    }
  }

  std::vector<std::uint64_t> current(sigs.size(), 0);
  auto emit = [&](std::size_t i, std::uint64_t v) {
    if (sigs[i].width == 1) {
      os << (v ? '1' : '0') << vcd_identifier(i) << '\n';
    } else {
      os << 'b';
      bool started = false;
      for (int b = static_cast<int>(sigs[i].width) - 1; b >= 0; --b) {
        const bool bit = (v >> b) & 1;
        if (bit) started = true;
        if (started) os << (bit ? '1' : '0');
      }
      if (!started) os << '0';
      os << ' ' << vcd_identifier(i) << '\n';
    }
  };
  os << "#0\n$dumpvars\n";
  for (std::size_t i = 0; i < sigs.size(); ++i) emit(i, 0);
  os << "$end\n";
  for (const auto& [cycle, slots] : by_cycle) {
    bool stamped = false;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
      const std::uint64_t v =
          vcd_signal_value(sigs[i], slots[static_cast<std::size_t>(sigs[i].channel)]);
      if (v == current[i]) continue;
      if (!stamped) {
        os << '#' << cycle << '\n';
        stamped = true;
      }
      emit(i, v);
      current[i] = v;
    }
  }
}

inline void export_vcd(const SimTrace& trace, unsigned bus_width_bytes, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_vcd(trace, bus_width_bytes, os);
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace axims
