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
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "axims/attack/inject.hpp"
#include "axims/axi/oracle.hpp"
#include "axims/axi/types.hpp"
#include "axims/errors.hpp"
#include "axims/random.hpp"
#include "axims/sim/config.hpp"
#include "axims/sim/request.hpp"

namespace axims {

struct StallEvent {
  std::uint32_t master_id = 0;
  ChannelKind channel = ChannelKind::AW;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  friend bool operator==(const StallEvent&, const StallEvent&) = default;
};

struct SimTrace {
  std::vector<AxiTransaction> transactions;  // address-handshake order
  std::vector<std::uint8_t> busy;            // 1 when any channel handshakes that cycle
  std::vector<StallEvent> stalls;
  std::uint64_t generation_end = 0;          // last cycle new normal traffic was generated
  std::uint64_t end_cycle = 0;

  double utilization() const {
    if (generation_end == 0) return 0.0;
    const std::uint64_t n = std::min<std::uint64_t>(generation_end, busy.size());
    std::uint64_t b = 0;
    for (std::uint64_t c = 0; c < n; ++c) b += busy[c];
    return static_cast<double>(b) / static_cast<double>(n);
  }

  friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

// Stable FNV-1a digest of everything observable in a trace.
inline std::uint64_t trace_checksum(const SimTrace& t) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  for (const auto& x : t.transactions) {
    mix(x.master_id);
    mix(x.issue_cycle);
    mix(x.complete_cycle.value_or(~0ULL));
    mix(x.attack ? (static_cast<unsigned>(x.attack->kind) << 8) |
                       static_cast<unsigned>(x.attack->component)
                 : 0);
    for (const auto& e : x.headers) {
      const auto& hd = e.header;
      mix(e.cycle);
      mix(static_cast<std::uint64_t>(hd.channel) | (std::uint64_t{hd.id} << 8) |
          (std::uint64_t{hd.len} << 16) | (std::uint64_t{hd.size} << 24) |
          (static_cast<std::uint64_t>(hd.burst) << 32) | (std::uint64_t{hd.qos} << 40) |
          (std::uint64_t{hd.prot} << 48) | (static_cast<std::uint64_t>(hd.resp) << 56));
      mix(hd.addr | (std::uint64_t{hd.last} << 32) | (std::uint64_t{e.valid} << 33) |
          (std::uint64_t{e.ready} << 34));
      mix(hd.strb);
    }
  }
  for (std::size_t i = 0; i < t.busy.size(); ++i) {
    if (t.busy[i]) mix(i);
  }
  mix(t.end_cycle);
  return h;
}

// Called once per transaction, in trace order, as soon as it and every
// earlier transaction have completed.
using RetireObserver = std::function<void(std::size_t index, const AxiTransaction&)>;

// Cycle-stepped transaction-level model of masters sharing one AXI4
// interconnect. Every channel carries at most one handshake per cycle. W
// carries no ID, so the interconnect accepts a new AW only once the previous
// write's data phase has finished; withheld WDATA therefore blocks every
// writer on the bus.
class Simulator {
 public:
  Simulator(SimConfig cfg, std::vector<AttackPlan> plans)
      : cfg_(std::move(cfg)), plans_(std::move(plans)) {
    cfg_.validate();
    profiles_ = cfg_.profiles();
    oracle_ = cfg_.oracle_config();
    for (const auto& p : plans_) {
      p.validate(cfg_);
      if (!cfg_.normal_quota && p.start_cycle >= cfg_.cycles) {
        throw ConfigError("attack plan starts beyond the simulation horizon");
      }
    }
    std::stable_sort(plans_.begin(), plans_.end(),
                     [](const AttackPlan& a, const AttackPlan& b) {
                       return a.start_cycle < b.start_cycle;
                     });
    masters_.resize(cfg_.num_masters);
    for (std::uint32_t m = 0; m < cfg_.num_masters; ++m) {
      masters_[m].content = Rng(derive_seed(cfg_.seed, 0x1000 + m));
      masters_[m].timing = Rng(derive_seed(cfg_.seed, 0x2000 + m));
    }
    double wsum = 0;
    for (const auto& p : profiles_) wsum += p.rate_weight;
    for (std::uint32_t m = 0; m < cfg_.num_masters; ++m) {
      masters_[m].weight = profiles_[m].rate_weight * cfg_.num_masters / wsum;
    }
    issue_rate_ = 0.05 * cfg_.load_percent / 100.0;
  }

  void set_observer(RetireObserver obs) { observer_ = std::move(obs); }

  SimTrace run() {
    const std::uint64_t limit = cfg_.cycles + cfg_.drain_limit;
    for (cycle_ = 0;; ++cycle_) {
      if (generating() && cfg_.normal_quota && cycle_ >= cfg_.cycles) {
        throw SimHorizonExceeded("only " + std::to_string(normal_generated_) + " of " +
                                 std::to_string(*cfg_.normal_quota) +
                                 " normal transactions fit in " + std::to_string(cfg_.cycles) +
                                 " cycles");
      }
      if (!generating() && idle() && next_plan_ == plans_.size()) break;
      if (cycle_ >= limit) throw SimHorizonExceeded("trace failed to drain");
      step();
    }
    trace_.end_cycle = cycle_;
    trace_.busy.resize(cycle_);
    retire();
    return std::move(trace_);
  }

 private:
  // Cycles a duplicate-ID request waits for an in-flight read to copy.
  static constexpr std::uint64_t kPrimeAfter = 4096;

  struct Pending {
    Request req;
    std::uint64_t valid_cycle = 0;
  };

  struct MasterState {
    Rng content;
    Rng timing;
    double weight = 1.0;
    std::deque<Pending> queue;
    std::size_t attack_pending = 0;  // malicious requests not yet issued
    std::uint64_t wait_since = 0;    // for duplicate-ID attacks with nothing to copy
  };

  struct WriteData {
    std::size_t txn = 0;
    std::vector<std::uint16_t> gaps;
    std::uint64_t strb = 0;
    std::uint64_t next_beat = 0;
    std::size_t sent = 0;
    unsigned b_latency = 1;
  };

  struct ReadData {
    std::size_t txn = 0;
    std::uint64_t ready = 0;
    std::size_t beats = 0;
    std::size_t sent = 0;
  };

  struct WriteResponse {
    std::size_t txn = 0;
    std::uint64_t ready = 0;
  };

  bool generating() const {
    if (cfg_.normal_quota) return normal_generated_ < *cfg_.normal_quota;
    return cycle_ < cfg_.cycles;
  }

  bool idle() const {
    for (const auto& m : masters_) {
      if (!m.queue.empty()) return false;
    }
    return wdata_.empty() && reads_.empty() && responses_.empty() && !active_read_;
  }

  void step() {
    trace_.busy.push_back(0);
    normal_busy_.push_back(0);
    activate_plans();
    generate();
    arbitrate_aw();
    arbitrate_ar();
    drive_w();
    drive_b();
    drive_r();
    for (std::size_t t : completed_this_cycle_) {
      outstanding_.remove(trace_.transactions[t].master_id, t);
    }
    completed_this_cycle_.clear();
    control_load();
    retire();
  }

  void activate_plans() {
    while (next_plan_ < plans_.size() && plans_[next_plan_].start_cycle <= cycle_) {
      const AttackPlan& plan = plans_[next_plan_];
      Rng rng(derive_seed(cfg_.seed, 0xA77AC000ULL + next_plan_));
      MasterState& m = masters_[plan.attacker_master];
      for (auto& r : inject(plan, cfg_, rng)) {
        push(m, std::move(r));
        ++m.attack_pending;
      }
      ++next_plan_;
    }
  }

  void push(MasterState& m, Request r) {
    Pending p{std::move(r), cycle_};
    m.queue.push_back(std::move(p));
  }

  void generate() {
    if (!generating()) return;
    trace_.generation_end = cycle_ + 1;
    for (std::uint32_t id = 0; id < masters_.size(); ++id) {
      MasterState& m = masters_[id];
      const double p = std::min(1.0, issue_rate_ * m.weight);
      const bool fire = m.timing.bernoulli(p);
      // Attack episodes preempt the attacker's own normal traffic.
      if (!fire || m.attack_pending > 0 || m.queue.size() >= cfg_.queue_depth) continue;
      if (!generating()) break;
      push(m, generate_normal_request(profiles_[id], id, cfg_, m.content));
      ++normal_generated_;
    }
  }

  // Load control follows legitimate traffic only, so an attack adds to the
  // configured load instead of displacing it.
  void mark_busy(const AxiTransaction& t) {
    trace_.busy[cycle_] = 1;
    if (!t.attack) normal_busy_[cycle_] = 1;
  }

  // The head request may be presented once it reaches the head of its queue.
  bool presentable(const MasterState& m, bool write) const {
    if (m.queue.empty()) return false;
    const Pending& h = m.queue.front();
    return h.req.write == write && h.valid_cycle <= cycle_;
  }

  std::optional<std::uint32_t> arbitrate(const std::vector<std::uint32_t>& candidates,
                                         std::uint32_t& rr_pointer) {
    if (candidates.empty()) return std::nullopt;
    const auto n = static_cast<std::uint32_t>(masters_.size());
    auto rr_distance = [&](std::uint32_t m) { return (m + n - rr_pointer) % n; };
    std::uint32_t best = candidates.front();
    for (std::uint32_t c : candidates) {
      if (cfg_.arbitration == Arbitration::QosPriority) {
        const unsigned qc = masters_[c].queue.front().req.qos;
        const unsigned qb = masters_[best].queue.front().req.qos;
        if (qc != qb) {
          if (qc > qb) best = c;
          continue;
        }
      }
      if (rr_distance(c) < rr_distance(best)) best = c;
    }
    rr_pointer = (best + 1) % n;
    return best;
  }

  std::size_t open_transaction(std::uint32_t master, const Pending& p, const AxiHeader& addr) {
    AxiTransaction t;
    t.master_id = master;
    t.issue_cycle = cycle_;
    t.attack = p.req.attack;
    if (p.valid_cycle < cycle_) {
      t.headers.push_back(HeaderEvent{p.valid_cycle, addr, true, false});
      if (cycle_ - p.valid_cycle >= 16) {
        trace_.stalls.push_back(StallEvent{master, addr.channel, p.valid_cycle, cycle_});
      }
    }
    t.headers.push_back(HeaderEvent{cycle_, addr, true, true});
    trace_.transactions.push_back(std::move(t));
    const std::size_t index = trace_.transactions.size() - 1;
    outstanding_.add(master, InFlight{addr.id, addr.channel, cycle_, index});
    mark_busy(trace_.transactions[index]);
    return index;
  }

  void pop_head(MasterState& m) {
    if (m.queue.front().req.attack) --m.attack_pending;
    m.queue.pop_front();
    if (!m.queue.empty()) m.queue.front().valid_cycle = std::max(m.queue.front().valid_cycle, cycle_ + 1);
  }

  void arbitrate_aw() {
    if (!wdata_.empty()) return;
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t id = 0; id < masters_.size(); ++id) {
      if (presentable(masters_[id], true) &&
          outstanding_.count_master(id) < cfg_.max_outstanding) {
        candidates.push_back(id);
      }
    }
    const auto winner = arbitrate(candidates, rr_aw_);
    if (!winner) return;
    MasterState& m = masters_[*winner];
    const Pending& p = m.queue.front();
    const Request& r = p.req;
    const AxiHeader h = AxiHeader::address(ChannelKind::AW, r.id, r.addr, r.len, r.size,
                                           Burst::Incr, r.qos, r.prot);
    const std::size_t index = open_transaction(*winner, p, h);
    WriteData w;
    w.txn = index;
    w.gaps = r.beat_gaps;
    w.strb = full_strobe(r.size, cfg_.bus_width_bytes);
    w.next_beat = cycle_ + 1 + (w.gaps.empty() ? 0 : w.gaps[0]);
    w.b_latency = r.response_latency;
    if (w.gaps.size() > 0 && w.gaps[0] > 16) {
      trace_.stalls.push_back(StallEvent{*winner, ChannelKind::W, cycle_, w.next_beat});
    }
    wdata_.push_back(std::move(w));
    pop_head(m);
  }

  std::optional<std::uint8_t> free_read_id() {
    for (unsigned k = 0; k < 16; ++k) {
      const auto id = static_cast<std::uint8_t>((next_read_id_ + k) % 16);
      if (outstanding_.count(ChannelKind::AR, id) == 0) return id;
    }
    return std::nullopt;
  }

  // Most recently issued in-flight ARID, preferring another master's.
  std::optional<std::uint8_t> copied_read_id(std::uint32_t attacker) const {
    std::optional<InFlight> best;
    bool best_foreign = false;
    for (std::uint32_t m = 0; m < outstanding_.masters(); ++m) {
      for (const auto& f : outstanding_.of(m)) {
        if (f.channel != ChannelKind::AR) continue;
        const bool foreign = m != attacker;
        if (!best || (foreign && !best_foreign) ||
            (foreign == best_foreign && f.issue_cycle > best->issue_cycle)) {
          best = f;
          best_foreign = foreign;
        }
      }
    }
    if (!best) return std::nullopt;
    return best->id;
  }

  void arbitrate_ar() {
    std::vector<std::uint32_t> candidates;
    const bool have_free = free_read_id().has_value();
    for (std::uint32_t id = 0; id < masters_.size(); ++id) {
      MasterState& m = masters_[id];
      if (!presentable(m, false) || outstanding_.count_master(id) >= cfg_.max_outstanding) {
        continue;
      }
      const Request& r = m.queue.front().req;
      if (r.duplicate_id) {
        if (copied_read_id(id)) {
          candidates.push_back(id);
        } else if (cycle_ - m.queue.front().valid_cycle >= kPrimeAfter && have_free) {
          // Nothing in flight to duplicate: issue an ordinary read from the
          // attacker first so the duplicate has a victim.
          prime_duplicate(id);
          candidates.push_back(id);
        }
      } else if (have_free) {
        candidates.push_back(id);
      }
    }
    const auto winner = arbitrate(candidates, rr_ar_);
    if (!winner) return;
    MasterState& m = masters_[*winner];
    const Pending& p = m.queue.front();
    const Request& r = p.req;
    std::uint8_t id = 0;
    if (r.duplicate_id) {
      id = *copied_read_id(*winner);
    } else {
      id = *free_read_id();
      next_read_id_ = static_cast<std::uint8_t>((id + 1) % 16);
    }
    const AxiHeader h =
        AxiHeader::address(ChannelKind::AR, id, r.addr, r.len, r.size, Burst::Incr, r.qos, r.prot);
    const std::size_t index = open_transaction(*winner, p, h);
    reads_.push_back(ReadData{index, cycle_ + r.response_latency, r.len + 1u, 0});
    pop_head(m);
  }

  void prime_duplicate(std::uint32_t master) {
    MasterState& m = masters_[master];
    Rng rng(derive_seed(cfg_.seed, 0xB00B0000ULL + cycle_));
    Request r = generate_normal_request(profiles_[master], master, cfg_, rng);
    r.write = false;
    r.beat_gaps.clear();
    r.response_latency = 64;  // keeps the primer in flight until the duplicate lands
    if (generating()) ++normal_generated_;  // an ordinary read, so it counts toward the quota
    m.queue.push_front(Pending{std::move(r), cycle_});
  }

  void drive_w() {
    if (wdata_.empty()) return;
    WriteData& w = wdata_.front();
    if (cycle_ < w.next_beat) return;
    AxiTransaction& t = trace_.transactions[w.txn];
    const bool last = w.sent + 1 == w.gaps.size();
    t.headers.push_back(HeaderEvent{cycle_, AxiHeader::write_data(w.strb, last), true, true});
    mark_busy(t);
    ++w.sent;
    if (last) {
      responses_.push_back(WriteResponse{w.txn, cycle_ + w.b_latency});
      wdata_.pop_front();
    } else {
      w.next_beat = cycle_ + 1 + w.gaps[w.sent];
    }
  }

  void drive_b() {
    auto it = std::min_element(responses_.begin(), responses_.end(),
                               [](const WriteResponse& a, const WriteResponse& b) {
                                 return a.ready < b.ready || (a.ready == b.ready && a.txn < b.txn);
                               });
    if (it == responses_.end() || it->ready > cycle_) return;
    AxiTransaction& t = trace_.transactions[it->txn];
    const std::uint8_t id = t.address_event()->header.id;
    t.headers.push_back(HeaderEvent{cycle_, AxiHeader::write_response(id, target_response(t)), true, true});
    t.complete_cycle = cycle_;
    completed_this_cycle_.push_back(it->txn);
    mark_busy(t);
    responses_.erase(it);
  }

  // Targets serve bursts of up to 16 beats no wider than the data bus and
  // answer anything else with SLVERR once all its beats have moved.
  Resp target_response(const AxiTransaction& t) const {
    const AxiHeader& h = t.address_event()->header;
    return h.len > oracle_.max_legal_len || h.size > oracle_.max_size() ? Resp::SlvErr : Resp::Okay;
  }

  void drive_r() {
    if (!active_read_) {
      auto it = std::min_element(reads_.begin(), reads_.end(),
                                 [](const ReadData& a, const ReadData& b) {
                                   return a.ready < b.ready || (a.ready == b.ready && a.txn < b.txn);
                                 });
      if (it == reads_.end() || it->ready > cycle_) return;
      active_read_ = *it;
      reads_.erase(it);
    }
    ReadData& r = *active_read_;
    AxiTransaction& t = trace_.transactions[r.txn];
    const std::uint8_t id = t.address_event()->header.id;
    const bool last = r.sent + 1 == r.beats;
    t.headers.push_back(HeaderEvent{cycle_, AxiHeader::read_data(id, target_response(t), last), true, true});
    mark_busy(t);
    ++r.sent;
    if (last) {
      t.complete_cycle = cycle_;
      completed_this_cycle_.push_back(r.txn);
      active_read_.reset();
    }
  }

  // Issue probability tracks the target utilization over a sliding window.
  void control_load() {
    constexpr std::uint64_t kWindow = 256;
    window_busy_ += normal_busy_[cycle_];
    if (cycle_ >= kWindow) window_busy_ -= normal_busy_[cycle_ - kWindow];
    if ((cycle_ + 1) % 32 != 0) return;
    const double span = static_cast<double>(std::min<std::uint64_t>(cycle_ + 1, kWindow));
    const double util = static_cast<double>(window_busy_) / span;
    const double target = cfg_.load_percent / 100.0;
    issue_rate_ *= std::exp(1.5 * (target - util));
    issue_rate_ = std::clamp(issue_rate_, 1e-4, 1.0);
  }

  void retire() {
    while (retired_ < trace_.transactions.size() &&
           trace_.transactions[retired_].complete_cycle) {
      if (observer_) observer_(retired_, trace_.transactions[retired_]);
      ++retired_;
    }
  }

  SimConfig cfg_;
  std::vector<AttackPlan> plans_;
  std::vector<MasterProfile> profiles_;
  OracleConfig oracle_;
  std::vector<MasterState> masters_;
  RetireObserver observer_;

  SimTrace trace_;
  OutstandingState outstanding_;
  std::deque<WriteData> wdata_;
  std::vector<ReadData> reads_;
  std::optional<ReadData> active_read_;
  std::vector<WriteResponse> responses_;
  std::vector<std::size_t> completed_this_cycle_;

  std::uint64_t cycle_ = 0;
  std::uint64_t normal_generated_ = 0;
  std::size_t next_plan_ = 0;
  std::size_t retired_ = 0;
  std::uint32_t rr_aw_ = 0;
  std::uint32_t rr_ar_ = 0;
  std::uint8_t next_read_id_ = 0;
  double issue_rate_ = 0.01;
  std::uint64_t window_busy_ = 0;
  std::vector<std::uint8_t> normal_busy_;
};

inline SimTrace simulate(const SimConfig& cfg, const std::vector<AttackPlan>& injections = {}) {
  return Simulator(cfg, injections).run();
}

// Normal-mode corpus: exactly `count` legitimate transactions.
inline SimTrace generate_normal_corpus(SimConfig cfg, std::uint64_t count = 16'383) {
  if (count == 0) throw ConfigError("count must be > 0");
  cfg.normal_quota = count;
  return simulate(cfg);
}

}  // namespace axims
