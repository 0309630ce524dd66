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
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "axims/errors.hpp"

namespace axims {

enum class ChannelKind : std::uint8_t { AW, W, B, AR, R };

inline constexpr std::array<ChannelKind, 5> kAllChannels = {
    ChannelKind::AW, ChannelKind::W, ChannelKind::B, ChannelKind::AR, ChannelKind::R};

constexpr std::string_view to_string(ChannelKind c) noexcept {
  switch (c) {
    case ChannelKind::AW: return "AW";
    case ChannelKind::W: return "W";
    case ChannelKind::B: return "B";
    case ChannelKind::AR: return "AR";
    case ChannelKind::R: return "R";
  }
  return "?";
}

constexpr bool is_address_channel(ChannelKind c) noexcept {
  return c == ChannelKind::AW || c == ChannelKind::AR;
}

// Encodings match the AXI4 wire values.
enum class Burst : std::uint8_t { Fixed = 0, Incr = 1, Wrap = 2 };
enum class Resp : std::uint8_t { Okay = 0, ExOkay = 1, SlvErr = 2, DecErr = 3 };

// AxPROT bits as on the wire: bit 1 set means a non-secure access.
namespace prot {
inline constexpr std::uint8_t kPrivileged = 0b001;
inline constexpr std::uint8_t kNonSecure = 0b010;
inline constexpr std::uint8_t kInstruction = 0b100;
}  // namespace prot

// Elevated attributes a master may or may not be allowed to request.
namespace privilege {
inline constexpr std::uint8_t kNone = 0;
inline constexpr std::uint8_t kPrivileged = 0b01;
inline constexpr std::uint8_t kSecure = 0b10;
inline constexpr std::uint8_t kAll = kPrivileged | kSecure;
}  // namespace privilege

// Which elevated attributes an AxPROT value requests.
constexpr std::uint8_t requested_privilege(std::uint8_t prot_bits) noexcept {
  std::uint8_t p = privilege::kNone;
  if (prot_bits & prot::kPrivileged) p |= privilege::kPrivileged;
  if (!(prot_bits & prot::kNonSecure)) p |= privilege::kSecure;
  return p;
}

// One channel payload. Fields that do not apply to `channel` stay zero.
struct AxiHeader {
  ChannelKind channel = ChannelKind::AW;
  std::uint8_t id = 0;      // 4 bits
  std::uint32_t addr = 0;
  std::uint8_t len = 0;     // beats - 1
  std::uint8_t size = 0;    // log2(bytes per beat), 3 bits
  Burst burst = Burst::Fixed;
  std::uint8_t qos = 0;     // 4 bits
  std::uint8_t prot = 0;    // 3 bits
  Resp resp = Resp::Okay;
  bool last = false;
  std::uint64_t strb = 0;

  static AxiHeader address(ChannelKind channel, unsigned id, std::uint32_t addr, unsigned len,
                           unsigned size, Burst burst, unsigned qos, unsigned prot_bits) {
    if (!is_address_channel(channel)) throw ConfigError("address header on a data channel");
    check_width("id", id, 4);
    check_width("len", len, 8);
    check_width("size", size, 3);
    check_width("qos", qos, 4);
    check_width("prot", prot_bits, 3);
    AxiHeader h;
    h.channel = channel;
    h.id = static_cast<std::uint8_t>(id);
    h.addr = addr;
    h.len = static_cast<std::uint8_t>(len);
    h.size = static_cast<std::uint8_t>(size);
    h.burst = burst;
    h.qos = static_cast<std::uint8_t>(qos);
    h.prot = static_cast<std::uint8_t>(prot_bits);
    return h;
  }

  static AxiHeader write_data(std::uint64_t strb, bool last) {
    AxiHeader h;
    h.channel = ChannelKind::W;
    h.strb = strb;
    h.last = last;
    return h;
  }

  static AxiHeader write_response(unsigned id, Resp resp) {
    check_width("id", id, 4);
    AxiHeader h;
    h.channel = ChannelKind::B;
    h.id = static_cast<std::uint8_t>(id);
    h.resp = resp;
    return h;
  }

  static AxiHeader read_data(unsigned id, Resp resp, bool last) {
    check_width("id", id, 4);
    AxiHeader h;
    h.channel = ChannelKind::R;
    h.id = static_cast<std::uint8_t>(id);
    h.resp = resp;
    h.last = last;
    return h;
  }

  friend bool operator==(const AxiHeader&, const AxiHeader&) = default;

 private:
  static void check_width(const char* field, unsigned value, unsigned bits) {
    if (value >= (1u << bits)) {
      throw ConfigError(std::string("AXI field ") + field + "=" + std::to_string(value) +
                        " exceeds " + std::to_string(bits) + " bits");
    }
  }
};

// Byte strobe for one beat of `size` on a bus of `bus_width_bytes`.
inline std::uint64_t full_strobe(unsigned size, unsigned bus_width_bytes) {
  const unsigned bytes = std::min(1u << size, bus_width_bytes);
  return bytes >= 64 ? ~0ULL : ((1ULL << bytes) - 1);
}

struct HeaderEvent {
  std::uint64_t cycle = 0;
  AxiHeader header;
  bool valid = true;
  bool ready = true;

  bool handshake() const noexcept { return valid && ready; }
  friend bool operator==(const HeaderEvent&, const HeaderEvent&) = default;
};

// Attack vectors. Mixed is an interleave of base kinds, never an oracle kind.
enum class AttackKind : std::uint8_t {
  AwlenOverflow = 1,
  AridDuplication,
  AwqosFlooding,
  AwsizeInvalid,
  ArprotViolation,
  WdataWithhold,
  Mixed,
};

inline constexpr std::array<AttackKind, 6> kBaseAttackKinds = {
    AttackKind::AwlenOverflow,   AttackKind::AridDuplication, AttackKind::AwqosFlooding,
    AttackKind::AwsizeInvalid,   AttackKind::ArprotViolation, AttackKind::WdataWithhold};

inline constexpr std::array<AttackKind, 7> kAllAttackKinds = {
    AttackKind::AwlenOverflow,   AttackKind::AridDuplication, AttackKind::AwqosFlooding,
    AttackKind::AwsizeInvalid,   AttackKind::ArprotViolation, AttackKind::WdataWithhold,
    AttackKind::Mixed};

constexpr std::string_view to_string(AttackKind k) noexcept {
  switch (k) {
    case AttackKind::AwlenOverflow: return "AwlenOverflow";
    case AttackKind::AridDuplication: return "AridDuplication";
    case AttackKind::AwqosFlooding: return "AwqosFlooding";
    case AttackKind::AwsizeInvalid: return "AwsizeInvalid";
    case AttackKind::ArprotViolation: return "ArprotViolation";
    case AttackKind::WdataWithhold: return "WdataWithhold";
    case AttackKind::Mixed: return "Mixed";
  }
  return "?";
}

inline std::optional<AttackKind> parse_attack_kind(std::string_view s) {
  for (AttackKind k : kAllAttackKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline std::optional<AttackKind> attack_kind_from_code(int code) {
  if (code >= 1 && code <= 7) return static_cast<AttackKind>(code);
  return std::nullopt;
}

// Ground-truth tag on an injected transaction. `component` is the base kind
// whose field was mutated; it equals `kind` unless kind is Mixed.
struct AttackTag {
  AttackKind kind = AttackKind::AwlenOverflow;
  AttackKind component = AttackKind::AwlenOverflow;
  friend bool operator==(const AttackTag&, const AttackTag&) = default;
};

struct AxiTransaction {
  std::uint32_t master_id = 0;
  std::vector<HeaderEvent> headers;  // cycle-ordered
  std::uint64_t issue_cycle = 0;     // address handshake
  std::optional<std::uint64_t> complete_cycle;
  std::optional<AttackTag> attack;

  const HeaderEvent* address_event() const noexcept {
    for (const auto& e : headers) {
      if (is_address_channel(e.header.channel) && e.handshake()) return &e;
    }
    return nullptr;
  }

  bool is_write() const noexcept {
    const auto* a = address_event();
    return a && a->header.channel == ChannelKind::AW;
  }

  std::size_t beat_count() const noexcept {
    const ChannelKind data = is_write() ? ChannelKind::W : ChannelKind::R;
    std::size_t n = 0;
    for (const auto& e : headers) {
      if (e.header.channel == data && e.handshake()) ++n;
    }
    return n;
  }

  friend bool operator==(const AxiTransaction&, const AxiTransaction&) = default;
};

}  // namespace axims
