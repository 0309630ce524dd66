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


#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "axims/attack/corpus.hpp"
#include "axims/axi/oracle.hpp"
#include "axims/sim/simulator.hpp"

namespace axims {
namespace {

SimConfig small_corpus_config(std::uint64_t quota) {
  SimConfig c;
  c.seed = 42;
  c.cycles = 2'000'000;
  c.normal_quota = quota;
  return c;
}

std::map<ViolationKind, std::size_t> violation_histogram(const std::vector<Violation>& vs) {
  std::map<ViolationKind, std::size_t> h;
  for (const auto& v : vs) ++h[v.kind];
  return h;
}

std::size_t tagged(const SimTrace& t) {
  return static_cast<std::size_t>(
      std::count_if(t.transactions.begin(), t.transactions.end(), [](const auto& x) { return x.attack.has_value(); }));
}

TEST(AttackMix, DefaultMixTotals3242) {
  const AttackMix mix = default_attack_mix();
  EXPECT_EQ(mix_total(mix), 3'242u);
  EXPECT_EQ(mix.at(AttackKind::AwlenOverflow), 642u);
  EXPECT_EQ(mix.at(AttackKind::AridDuplication), 558u);
  EXPECT_EQ(mix.at(AttackKind::AwqosFlooding), 423u);
  EXPECT_EQ(mix.at(AttackKind::AwsizeInvalid), 389u);
  EXPECT_EQ(mix.at(AttackKind::ArprotViolation), 345u);
  EXPECT_EQ(mix.at(AttackKind::Mixed), 885u);
}

TEST(BuildAttackCorpus, DefaultMixYieldsRequestedLabeledCounts) {
  const SimConfig cfg = small_corpus_config(16'383);
  const AttackMix mix = default_attack_mix();
  const SimTrace t = build_attack_corpus(cfg, mix, 42);
  EXPECT_EQ(t.transactions.size(), 19'625u);

  std::map<AttackKind, std::size_t> by_kind;
  for (const auto& x : t.transactions) {
    if (x.attack) ++by_kind[x.attack->kind];
  }
  for (const auto& [kind, count] : mix) EXPECT_EQ(by_kind[kind], count) << to_string(kind);

  const auto violations = check_stream(t.transactions, cfg.oracle_config(), t.end_cycle);
  const auto agreement = check_label_agreement(t.transactions, violations);
  EXPECT_TRUE(agreement.perfect()) << agreement.mismatches.size() << " mismatches";
  EXPECT_EQ(agreement.tagged, 3'242u);
  EXPECT_EQ(agreement.untagged_clean, 16'383u);

  // Per-kind oracle counts against requested component counts. Window events
  // are counted per transaction they implicate.
  std::map<ViolationKind, std::size_t> implicated;
  for (const auto& v : violations) implicated[v.kind] += v.transactions.size();
  std::map<ViolationKind, std::size_t> expected;
  for (const auto& x : t.transactions) {
    if (x.attack) ++expected[*expected_violation(x.attack->component)];
  }
  for (const auto& [kind, n] : expected) {
    EXPECT_NEAR(static_cast<double>(implicated[kind]), static_cast<double>(n), 0.02 * static_cast<double>(n))
        << to_string(kind);
  }
}

TEST(BuildAttackCorpus, SingleOverflowRaisesExactlyOneBurstLengthViolation) {
  const SimConfig cfg = small_corpus_config(500);
  const SimTrace t = build_attack_corpus(cfg, {{AttackKind::AwlenOverflow, 1}}, 7);
  ASSERT_EQ(tagged(t), 1u);
  std::size_t long_bursts = 0;
  for (const auto& x : t.transactions) {
    const auto* a = x.address_event();
    ASSERT_NE(a, nullptr);
    long_bursts += a->header.len > 15;
  }
  EXPECT_EQ(long_bursts, 1u);
  const auto h = violation_histogram(check_stream(t.transactions, cfg.oracle_config(), t.end_cycle));
  EXPECT_EQ(h.size(), 1u);
  EXPECT_EQ(h.count(ViolationKind::BurstLengthOverflow) ? h.at(ViolationKind::BurstLengthOverflow) : 0u, 1u);
}

TEST(BuildAttackCorpus, TagsOnlyOnPlannedAttackers) {
  const SimConfig cfg = small_corpus_config(4'000);
  const AttackMix mix = {{AttackKind::AridDuplication, 80}, {AttackKind::Mixed, 120}, {AttackKind::WdataWithhold, 20}};
  const auto plans = corpus_plans(cfg, mix, 5);
  std::set<std::uint32_t> attackers;
  for (const auto& p : plans) attackers.insert(p.attacker_master);
  const SimTrace t = simulate(cfg, plans);
  ASSERT_EQ(tagged(t), 220u);
  for (const auto& x : t.transactions) {
    if (x.attack) {
      EXPECT_TRUE(attackers.count(x.master_id)) << "tag on master " << x.master_id;
    }
  }
  // The full-privilege master is never chosen as an attacker.
  EXPECT_FALSE(attackers.count(0));
}

TEST(BuildAttackCorpus, RejectsEmptyMixAndBadPlans) {
  const SimConfig cfg = small_corpus_config(100);
  EXPECT_THROW(build_attack_corpus(cfg, {}, 1), ConfigError);
  EXPECT_THROW(build_attack_corpus(cfg, {{AttackKind::AwlenOverflow, 0}}, 1), ConfigError);
  EXPECT_THROW(build_attack_corpus(cfg, {{AttackKind::AwqosFlooding, 7}}, 1), ConfigError);
  EXPECT_THROW(build_attack_corpus(cfg, {{AttackKind::Mixed, 1}}, 1), ConfigError);

  AttackPlan p;
  p.attacker_master = 4;
  EXPECT_THROW(simulate(cfg, {p}), ConfigError);
}

TEST(AttackPlan, ValidatesParameters) {
  SimConfig cfg;
  Rng rng(1);
  AttackPlan p;
  p.count = 0;
  EXPECT_THROW(inject(p, cfg, rng), ConfigError);
  p = AttackPlan{};
  p.params.overflow_len = 15;
  EXPECT_THROW(inject(p, cfg, rng), ConfigError);
  p.params.overflow_len = 256;
  EXPECT_THROW(inject(p, cfg, rng), ConfigError);
  p.params.overflow_len = 16;
  EXPECT_NO_THROW(inject(p, cfg, rng));
  p = AttackPlan{};
  p.params.flood_qos = 0xE;
  EXPECT_THROW(inject(p, cfg, rng), ConfigError);
  p = AttackPlan{};
  p.kind = AttackKind::ArprotViolation;
  p.attacker_master = 0;  // holds every privilege
  EXPECT_THROW(inject(p, cfg, rng), ConfigError);
}

TEST(Inject, OverflowLengthsSpanTheIllegalRange) {
  SimConfig cfg;
  Rng rng(derive_seed(42, 0x1E7));
  AttackPlan p;
  p.count = 100;
  const auto reqs = inject(p, cfg, rng);
  ASSERT_EQ(reqs.size(), 100u);
  unsigned lo = 255, hi = 0;
  std::array<int, 4> quartile{};  // [16,75), [75,135), [135,195), [195,255]
  for (const auto& r : reqs) {
    EXPECT_TRUE(r.write);
    EXPECT_GE(r.len, 16u);
    EXPECT_EQ(r.beat_gaps.size(), r.len + 1u);
    lo = std::min<unsigned>(lo, r.len);
    hi = std::max<unsigned>(hi, r.len);
    ++quartile[std::min(3, (r.len - 16) / 60)];
  }
  EXPECT_LT(lo, 40u);
  EXPECT_GT(hi, 230u);
  for (int q : quartile) EXPECT_GE(q, 10);

  // Simulated, every one of them is flagged.
  SimConfig sc;
  sc.cycles = 60'000;
  p.start_cycle = 1'000;
  p.attacker_master = 2;
  const SimTrace t = simulate(sc, {p});
  const auto h = violation_histogram(check_stream(t.transactions, sc.oracle_config(), t.end_cycle));
  EXPECT_EQ(h.at(ViolationKind::BurstLengthOverflow), 100u);
  EXPECT_EQ(h.size(), 1u);
}

TEST(Inject, OtherKindsTouchOnlyTheirField) {
  SimConfig cfg;
  const auto profiles = cfg.profiles();
  for (AttackKind k : {AttackKind::AwqosFlooding, AttackKind::AwsizeInvalid, AttackKind::ArprotViolation}) {
    Rng rng(9);
    AttackPlan p;
    p.kind = k;
    p.attacker_master = 3;
    p.count = 8;
    const auto reqs = inject(p, cfg, rng);
    for (const auto& r : reqs) {
      ASSERT_TRUE(r.attack);
      EXPECT_EQ(r.attack->kind, k);
      EXPECT_EQ(r.attack->component, k);
      const OracleConfig o = cfg.oracle_config();
      switch (k) {
        case AttackKind::AwqosFlooding:
          EXPECT_TRUE(r.write);
          EXPECT_EQ(r.qos, 0xF);
          EXPECT_LE(r.len, 15u);
          break;
        case AttackKind::AwsizeInvalid:
          EXPECT_TRUE(r.write);
          EXPECT_GT(r.size, o.max_size());
          EXPECT_LE(r.len, 15u);
          break;
        default:
          EXPECT_FALSE(r.write);
          EXPECT_NE(requested_privilege(r.prot) & ~profiles[3].privileges, 0u);
          EXPECT_LT(r.qos, 0xF);
          break;
      }
    }
  }
}

TEST(Inject, FloodOfEightIsOneWindowEvent) {
  SimConfig cfg;
  cfg.cycles = 20'000;
  AttackPlan p;
  p.kind = AttackKind::AwqosFlooding;
  p.attacker_master = 1;
  p.count = 8;
  p.start_cycle = 2'000;
  const SimTrace t = simulate(cfg, {p});
  EXPECT_EQ(tagged(t), 8u);
  const auto vs = check_stream(t.transactions, cfg.oracle_config(), t.end_cycle);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].kind, ViolationKind::QosFlooding);
  EXPECT_EQ(vs[0].transactions.size(), 8u);
  EXPECT_EQ(vs[0].master_id, 1u);
}

TEST(Inject, WithheldWriteDataStallsAndDelaysOthers) {
  SimConfig cfg;
  cfg.cycles = 20'000;
  cfg.load_percent = 60;
  AttackPlan p;
  p.kind = AttackKind::WdataWithhold;
  p.attacker_master = 2;
  p.count = 1;
  p.start_cycle = 5'000;
  const SimTrace t = simulate(cfg, {p});
  const auto vs = check_stream(t.transactions, cfg.oracle_config(), t.end_cycle);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].kind, ViolationKind::WriteStall);
  const auto& victim = t.transactions[vs[0].transactions.at(0)];
  ASSERT_TRUE(victim.attack);
  const auto* aw = victim.address_event();
  ASSERT_NE(aw, nullptr);
  std::uint64_t first_w = 0;
  for (const auto& e : victim.headers) {
    if (e.header.channel == ChannelKind::W && e.handshake()) {
      first_w = e.cycle;
      break;
    }
  }
  EXPECT_GE(first_w - aw->cycle, 257u);
  // Another master's write request waited through the withheld window.
  bool victim_delayed = false;
  for (const auto& s : t.stalls) {
    victim_delayed |= s.master_id != 2 && s.channel == ChannelKind::AW && s.begin < first_w && s.end > aw->cycle + 200;
  }
  EXPECT_TRUE(victim_delayed);
}

TEST(Inject, MixedInterleavesAtLeastTwoKinds) {
  SimConfig cfg;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    AttackPlan p;
    p.kind = AttackKind::Mixed;
    p.attacker_master = 1 + static_cast<std::uint32_t>(seed % 3);
    p.count = 2 + seed % 30;
    const auto reqs = inject(p, cfg, rng);
    ASSERT_EQ(reqs.size(), p.count);
    std::set<AttackKind> kinds;
    for (const auto& r : reqs) {
      ASSERT_TRUE(r.attack);
      EXPECT_EQ(r.attack->kind, AttackKind::Mixed);
      EXPECT_NE(r.attack->component, AttackKind::Mixed);
      kinds.insert(r.attack->component);
    }
    EXPECT_GE(kinds.size(), 2u) << "seed " << seed;
    EXPECT_LE(kinds.size(), 4u);
  }
}

// Header fields of one master's traffic, independent of timing.
std::vector<std::tuple<bool, std::uint32_t, unsigned, unsigned, unsigned, unsigned>> content_of(
    const SimTrace& t, std::uint32_t master) {
  std::vector<std::tuple<bool, std::uint32_t, unsigned, unsigned, unsigned, unsigned>> out;
  for (const auto& x : t.transactions) {
    if (x.master_id != master) continue;
    const auto& h = x.address_event()->header;
    out.emplace_back(x.is_write(), h.addr, h.len, h.size, h.qos, h.prot);
  }
  return out;
}

TEST(Inject, InjectionIsLocal) {
  SimConfig cfg;
  cfg.cycles = 60'000;
  AttackPlan p;
  p.kind = AttackKind::Mixed;
  p.attacker_master = 2;
  p.count = 24;
  p.start_cycle = 30'000;
  const SimTrace base = simulate(cfg), hit = simulate(cfg, {p});

  // Everything that finished before the episode started is untouched.
  std::size_t before = 0;
  for (std::size_t i = 0; i < base.transactions.size(); ++i) {
    const auto& x = base.transactions[i];
    if (!x.complete_cycle || *x.complete_cycle >= p.start_cycle) break;
    ASSERT_LT(i, hit.transactions.size());
    EXPECT_EQ(x, hit.transactions[i]);
    ++before;
  }
  EXPECT_GT(before, 1000u);

  // Bystanders issue the same requests; only their timing may shift.
  for (std::uint32_t m : {0u, 1u, 3u}) {
    const auto a = content_of(base, m), b = content_of(hit, m);
    const std::size_t n = std::min(a.size(), b.size());
    ASSERT_GT(n, 0u);
    EXPECT_TRUE(std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n), b.begin())) << "master " << m;
    EXPECT_GE(n, a.size() * 9 / 10);  // arbitration delays may trim the tail of the horizon
  }
}

}  // namespace
}  // namespace axims
