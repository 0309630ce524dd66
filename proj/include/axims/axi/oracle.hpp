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
#include <bit>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "axims/axi/types.hpp"
#include "axims/errors.hpp"

namespace axims {

enum class ViolationKind : std::uint8_t {
  BurstLengthOverflow,
  DuplicateId,
  QosFlooding,
  InvalidSize,
  ProtViolation,
  WriteStall,
};

constexpr std::string_view to_string(ViolationKind k) noexcept {
  switch (k) {
    case ViolationKind::BurstLengthOverflow: return "BurstLengthOverflow";
    case ViolationKind::DuplicateId: return "DuplicateId";
    case ViolationKind::QosFlooding: return "QosFlooding";
    case ViolationKind::InvalidSize: return "InvalidSize";
    case ViolationKind::ProtViolation: return "ProtViolation";
    case ViolationKind::WriteStall: return "WriteStall";
  }
  return "?";
}

// The violation a base attack kind must raise. Mixed has none of its own.
constexpr std::optional<ViolationKind> expected_violation(AttackKind k) noexcept {
  switch (k) {
    case AttackKind::AwlenOverflow: return ViolationKind::BurstLengthOverflow;
    case AttackKind::AridDuplication: return ViolationKind::DuplicateId;
    case AttackKind::AwqosFlooding: return ViolationKind::QosFlooding;
    case AttackKind::AwsizeInvalid: return ViolationKind::InvalidSize;
    case AttackKind::ArprotViolation: return ViolationKind::ProtViolation;
    case AttackKind::WdataWithhold: return ViolationKind::WriteStall;
    case AttackKind::Mixed: return std::nullopt;
  }
  return std::nullopt;
}

struct Violation {
  ViolationKind kind = ViolationKind::BurstLengthOverflow;
  std::uint64_t cycle = 0;
  std::uint32_t master_id = 0;
  std::string detail;
  // Indices (into the checked stream) of the transactions that raised it.
  std::vector<std::size_t> transactions;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct OracleConfig {
  unsigned max_legal_len = 15;
  unsigned qos_flood_value = 0xF;
  unsigned qos_flood_window = 8;
  std::uint64_t stall_timeout_cycles = 256;
  unsigned bus_width_bytes = 8;
  // Allowed privilege::* bits per master. Masters past the end are unrestricted.
  std::vector<std::uint8_t> master_privileges;

  void validate() const {
    if (max_legal_len == 0 || qos_flood_value == 0 || qos_flood_window == 0 ||
        stall_timeout_cycles == 0 || bus_width_bytes == 0) {
      throw ConfigError("oracle thresholds must be > 0");
    }
    if (!std::has_single_bit(bus_width_bytes) || bus_width_bytes > 128) {
      throw ConfigError("bus_width_bytes must be a power of two <= 128");
    }
    if (max_legal_len > 255) throw ConfigError("max_legal_len exceeds the 8-bit length field");
    if (qos_flood_value > 15) throw ConfigError("qos_flood_value exceeds 4 bits");
  }

  std::uint8_t privileges_of(std::uint32_t master) const noexcept {
    return master < master_privileges.size() ? master_privileges[master] : privilege::kAll;
  }

  unsigned max_size() const noexcept {
    return static_cast<unsigned>(std::countr_zero(bus_width_bytes));
  }
};

struct InFlight {
  std::uint8_t id = 0;
  ChannelKind channel = ChannelKind::AR;
  std::uint64_t issue_cycle = 0;
  std::size_t transaction = 0;
};

// In-flight address handshakes per master. An entry lives from its address
// handshake until the final response beat of its transaction.
class OutstandingState {
 public:
  void add(std::uint32_t master, InFlight entry) {
    if (master >= per_master_.size()) per_master_.resize(master + 1);
    per_master_[master].push_back(entry);
  }

  bool remove(std::uint32_t master, std::size_t transaction) {
    if (master >= per_master_.size()) return false;
    auto& v = per_master_[master];
    auto it = std::find_if(v.begin(), v.end(),
                           [&](const InFlight& f) { return f.transaction == transaction; });
    if (it == v.end()) return false;
    v.erase(it);
    return true;
  }

  std::size_t count(ChannelKind channel, std::optional<std::uint8_t> id = std::nullopt) const {
    std::size_t n = 0;
    for (const auto& v : per_master_) {
      for (const auto& f : v) {
        if (f.channel == channel && (!id || f.id == *id)) ++n;
      }
    }
    return n;
  }

  std::size_t count_master(std::uint32_t master) const {
    return master < per_master_.size() ? per_master_[master].size() : 0;
  }

  std::span<const InFlight> of(std::uint32_t master) const {
    if (master >= per_master_.size()) return {};
    return per_master_[master];
  }

  std::size_t masters() const noexcept { return per_master_.size(); }

  bool empty() const noexcept {
    return std::all_of(per_master_.begin(), per_master_.end(),
                       [](const auto& v) { return v.empty(); });
  }

 private:
  std::vector<std::vector<InFlight>> per_master_;
};

// Header-level legality of `h` issued by `master`, given the transactions
// already in flight. Only address headers can violate at this level.
inline std::vector<Violation> check_header(std::uint32_t master, const AxiHeader& h,
                                           const OracleConfig& cfg, const OutstandingState& ctx,
                                           std::uint64_t cycle = 0) {
  std::vector<Violation> out;
  if (!is_address_channel(h.channel)) return out;
  const std::string ch(to_string(h.channel));
  auto emit = [&](ViolationKind kind, std::string detail) {
    out.push_back(Violation{kind, cycle, master, std::move(detail), {}});
  };
  if (h.len > cfg.max_legal_len) {
    emit(ViolationKind::BurstLengthOverflow,
         ch + "LEN=" + std::to_string(h.len) + " > " + std::to_string(cfg.max_legal_len));
  }
  if (h.size > cfg.max_size()) {
    emit(ViolationKind::InvalidSize, ch + "SIZE=" + std::to_string(h.size) + " wider than " +
                                         std::to_string(cfg.bus_width_bytes) + "-byte bus");
  }
  const std::uint8_t requested = requested_privilege(h.prot);
  if (requested & ~cfg.privileges_of(master)) {
    emit(ViolationKind::ProtViolation, ch + "PROT=" + std::to_string(h.prot) +
                                           " outside privilege set of master " +
                                           std::to_string(master));
  }
  if (h.channel == ChannelKind::AR) {
    const std::size_t clash = ctx.count(ChannelKind::AR, h.id);
    if (clash > 0) {
      emit(ViolationKind::DuplicateId,
           "ARID=" + std::to_string(h.id) + " already outstanding (" + std::to_string(clash) + ")");
    }
  }
  return out;
}

namespace detail {

inline std::optional<std::uint64_t> first_beat_cycle(const AxiTransaction& t, ChannelKind ch) {
  for (const auto& e : t.headers) {
    if (e.header.channel == ch && e.handshake()) return e.cycle;
  }
  return std::nullopt;
}

inline std::uint64_t last_cycle(std::span<const AxiTransaction> txns) {
  std::uint64_t c = 0;
  for (const auto& t : txns) {
    if (!t.headers.empty()) c = std::max(c, t.headers.back().cycle);
    if (t.complete_cycle) c = std::max(c, *t.complete_cycle);
  }
  return c;
}

}  // namespace detail

// Full-stream check: header rules replayed against the in-flight context,
// plus the stateful QoS-flooding and write-stall rules. `horizon` is the
// cycle up to which missing W data counts as withheld; defaults to the last
// cycle seen in the stream.
inline std::vector<Violation> check_stream(std::span<const AxiTransaction> txns,
                                           const OracleConfig& cfg,
                                           std::optional<std::uint64_t> horizon = std::nullopt) {
  cfg.validate();
  const std::uint64_t end = horizon.value_or(detail::last_cycle(txns));
  std::vector<Violation> out;

  struct Issue {
    std::uint64_t cycle;
    std::size_t index;
    const HeaderEvent* event;
  };
  std::vector<Issue> issues;
  issues.reserve(txns.size());
  for (std::size_t i = 0; i < txns.size(); ++i) {
    if (const auto* a = txns[i].address_event()) issues.push_back({a->cycle, i, a});
  }
  std::stable_sort(issues.begin(), issues.end(),
                   [](const Issue& a, const Issue& b) { return a.cycle < b.cycle; });

  using Completion = std::pair<std::uint64_t, std::size_t>;
  std::priority_queue<Completion, std::vector<Completion>, std::greater<>> completions;
  OutstandingState ctx;

  struct QosRun {
    std::vector<std::size_t> members;
  };
  std::unordered_map<std::uint32_t, QosRun> runs;

  for (const Issue& is : issues) {
    while (!completions.empty() && completions.top().first < is.cycle) {
      const std::size_t done = completions.top().second;
      ctx.remove(txns[done].master_id, done);
      completions.pop();
    }
    const AxiTransaction& t = txns[is.index];
    const AxiHeader& h = is.event->header;
    for (auto& v : check_header(t.master_id, h, cfg, ctx, is.cycle)) {
      v.transactions = {is.index};
      out.push_back(std::move(v));
    }
    ctx.add(t.master_id, InFlight{h.id, h.channel, is.cycle, is.index});
    if (t.complete_cycle) completions.emplace(*t.complete_cycle, is.index);

    QosRun& run = runs[t.master_id];
    if (h.qos == cfg.qos_flood_value) {
      run.members.push_back(is.index);
      const std::size_t n = run.members.size();
      if (n >= cfg.qos_flood_window) {
        Violation v{ViolationKind::QosFlooding, is.cycle, t.master_id,
                    std::to_string(n) + " consecutive transactions at QOS=" +
                        std::to_string(cfg.qos_flood_value),
                    {}};
        // The window-completing transaction reports the whole window; every
        // later member of the same run reports itself.
        if (n == cfg.qos_flood_window) {
          v.transactions = run.members;
        } else {
          v.transactions = {is.index};
        }
        out.push_back(std::move(v));
      }
    } else {
      run.members.clear();
    }
  }

  for (const Issue& is : issues) {
    const AxiTransaction& t = txns[is.index];
    if (is.event->header.channel != ChannelKind::AW) continue;
    const std::uint64_t deadline = is.cycle + cfg.stall_timeout_cycles;
    const auto first_w = detail::first_beat_cycle(t, ChannelKind::W);
    const bool stalled = first_w ? (*first_w > deadline) : (end > deadline);
    if (stalled) {
      out.push_back(Violation{ViolationKind::WriteStall, deadline + 1, t.master_id,
                              "no WDATA within " + std::to_string(cfg.stall_timeout_cycles) +
                                  " cycles of AW handshake",
                              {is.index}});
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    if (a.cycle != b.cycle) return a.cycle < b.cycle;
    return a.kind < b.kind;
  });
  return out;
}

// Agreement between injected tags and oracle violations.
struct LabelAgreement {
  std::size_t transactions = 0;
  std::size_t tagged = 0;
  std::size_t tagged_confirmed = 0;   // tag's expected violation raised, nothing else
  std::size_t untagged_clean = 0;     // no violation implicates it
  std::vector<std::size_t> mismatches;

  bool perfect() const noexcept { return mismatches.empty(); }
  double rate() const noexcept {
    return transactions == 0 ? 1.0
                             : static_cast<double>(tagged_confirmed + untagged_clean) /
                                   static_cast<double>(transactions);
  }
};

inline LabelAgreement check_label_agreement(std::span<const AxiTransaction> txns,
                                            std::span<const Violation> violations) {
  std::vector<std::vector<ViolationKind>> raised(txns.size());
  for (const auto& v : violations) {
    for (std::size_t i : v.transactions) {
      if (i < raised.size()) raised[i].push_back(v.kind);
    }
  }
  LabelAgreement a;
  a.transactions = txns.size();
  for (std::size_t i = 0; i < txns.size(); ++i) {
    auto& r = raised[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    if (txns[i].attack) {
      ++a.tagged;
      const auto want = expected_violation(txns[i].attack->component);
      if (want && r.size() == 1 && r.front() == *want) {
        ++a.tagged_confirmed;
      } else {
        a.mismatches.push_back(i);
      }
    } else if (r.empty()) {
      ++a.untagged_clean;
    } else {
      a.mismatches.push_back(i);
    }
  }
  return a;
}

}  // namespace axims
