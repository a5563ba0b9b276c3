#include <gtest/gtest.h>

#include "pktsched/audit.hpp"
#include "pktsched/bench.hpp"
#include "pktsched/policies.hpp"

using namespace pktsched;

namespace {

Packet pk(PacketId id, Slot r, Slot d, double w) { return Packet{id, r, d, w, false}; }

constexpr PacketId J = 0, K = 1, F = 2, H = 3;

Instance worked_example() {
  return Instance({pk(J, 1, 1, 0.9), pk(K, 1, 2, 0.9), pk(F, 1, 3, 1.0), pk(H, 1, 4, kPhi)}, 4);
}

// A 2-bounded instance on which LC_alpha's ledger has a three-step chain
// (begin, link, end). Found by a targeted search over dense inputs.
Instance chain_instance() {
  return Instance({pk(0, 2, 2, 3.238172324012421), pk(1, 1, 2, 5.181075718419874), pk(2, 2, 3, 4.096000000000001),
                   pk(3, 3, 4, 2.2761976448498213), pk(4, 0, 1, 4.343851258605601), pk(5, 3, 4, 2.879187584974588),
                   pk(6, 2, 3, 6.950162013768962), pk(7, 0, 0, 3.053408841492549)},
                  2);
}

double slot_charge(const ChargeLedger& l, Slot t) {
  double c = 0.0;
  for (const ChargeEntry& e : l.entries)
    if (e.to_alg_slot == t && !e.pair_slot) c += e.amount;
  return c;
}

std::vector<ChargeRule> rules_of(const ChargeLedger& l, PacketId j) {
  std::vector<ChargeRule> out;
  for (const ChargeEntry& e : l.entries)
    if (e.packet == j) out.push_back(e.rule);
  return out;
}

}  // namespace

TEST(ToggleHCharges, WorkedExampleLedger) {
  ToggleHPolicy policy;
  const Instance inst = worked_example();
  const Trace tr = run(policy, inst, 0);
  const ChargeLedger l = toggleh_charges(tr, optimal_schedule(inst));

  EXPECT_EQ(rules_of(l, J), (std::vector<ChargeRule>{ChargeRule::full_up}));
  EXPECT_EQ(rules_of(l, K), (std::vector<ChargeRule>{ChargeRule::full_up}));
  EXPECT_EQ(rules_of(l, F), (std::vector<ChargeRule>{ChargeRule::regular_up, ChargeRule::regular_back}));
  EXPECT_EQ(rules_of(l, H), (std::vector<ChargeRule>{ChargeRule::regular_up, ChargeRule::regular_back}));

  // f at OPT slot 3: w_h/phi^2 up (h = the phi packet), the rest back to slot 1.
  // h at OPT slot 4: the only pending packet there is a weight-0 filler.
  const double up_f = kPhi / (kPhi * kPhi);
  EXPECT_NEAR(slot_charge(l, 1), 0.9 + (1.0 - up_f), 1e-12);
  EXPECT_NEAR(slot_charge(l, 2), 0.9, 1e-12);
  EXPECT_NEAR(slot_charge(l, 3), up_f + kPhi, 1e-12);
  EXPECT_NEAR(slot_charge(l, 4), 0.0, 1e-12);

  const AuditReport rep = verify_toggleh(l, tr);
  EXPECT_TRUE(rep.pass) << (rep.failures.empty() ? "" : rep.failures.front());
  EXPECT_LT(rep.conservation_residual, 1e-9);
}

TEST(ToggleHCharges, IdenticalSchedulesGiveFullUpOnly) {
  // Nested windows where the heaviest packet is always also the earliest.
  const Instance inst({pk(0, 1, 1, 3), pk(1, 1, 2, 2), pk(2, 2, 3, 1.5)}, 4);
  ToggleHPolicy policy;
  const Trace tr = run(policy, inst, 0);
  const OptResult opt = optimal_schedule(inst);
  ASSERT_EQ(tr.schedule(), opt.schedule);
  const ChargeLedger l = toggleh_charges(tr, opt);
  for (const ChargeEntry& e : l.entries) {
    EXPECT_EQ(e.rule, ChargeRule::full_up);
    EXPECT_EQ(e.from_opt_slot, e.to_alg_slot);
  }
  const AuditReport rep = verify_toggleh(l, tr);
  EXPECT_TRUE(rep.pass);
  for (const SlotTotal& s : rep.slots) EXPECT_NEAR(s.charge, s.weight, 1e-12);
}

TEST(ToggleHCharges, InflatedAmountIsCaughtAtItsSlot) {
  ToggleHPolicy policy;
  const Instance inst = worked_example();
  const Trace tr = run(policy, inst, 0);
  ChargeLedger l = toggleh_charges(tr, optimal_schedule(inst));
  for (ChargeEntry& e : l.entries)
    if (e.packet == K) e.amount += 10.0;
  const AuditReport rep = verify_toggleh(l, tr);
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(rep.witness, Slot{2});
}

TEST(ToggleHCharges, RequiresToggleHTrace) {
  GreedyPolicy g;
  const Instance inst = worked_example();
  const Trace tr = run(g, inst, 0);
  EXPECT_THROW(toggleh_charges(tr, optimal_schedule(inst)), Error);
}

TEST(ToggleHCharges, ConservationOnFuzzedRuns) {
  FuzzSpec spec;
  spec.seed = 31;
  for (std::size_t i = 0; i < 1000; ++i) {
    const AuditReport rep = audit_instance("toggleh", fuzz_instance(spec, i));
    EXPECT_LT(rep.conservation_residual, 1e-9) << "instance " << i;
    EXPECT_LT(rep.total_residual, 1e-9) << "instance " << i;
    EXPECT_TRUE(rep.pass) << "instance " << i << ": " << (rep.failures.empty() ? "" : rep.failures.front());
  }
}

TEST(LcAlphaCharges, IdenticalSchedulesGiveFullUpOnly) {
  const Instance inst({pk(0, 1, 1, 3), pk(1, 2, 2, 2), pk(2, 3, 4, 1)}, 2);
  LcAlphaPolicy policy;
  const Trace tr = run(policy, inst, 1);
  const OptResult opt = optimal_schedule(inst);
  ASSERT_EQ(tr.schedule(), opt.schedule);
  const ChargeLedger l = lcalpha_charges(tr, opt);
  for (const ChargeEntry& e : l.entries) EXPECT_EQ(e.rule, ChargeRule::full_up);
  const AuditReport rep = verify_lcalpha(l, tr);
  EXPECT_TRUE(rep.pass);
  for (const SlotTotal& s : rep.slots) EXPECT_LE(s.charge, lc_constants().ratio * s.weight + 1e-12);
}

TEST(LcAlphaCharges, ChainInstanceHasBeginLinkEnd) {
  const Instance inst = chain_instance();
  LcAlphaPolicy policy;
  const Trace tr = run(policy, inst, 1);
  const ChargeLedger l = lcalpha_charges(tr, optimal_schedule(inst));
  EXPECT_EQ(l.chaining, (std::vector<Slot>{0, 1, 2}));
  std::set<ChargeRule> seen;
  for (const ChargeEntry& e : l.entries) seen.insert(e.rule);
  EXPECT_TRUE(seen.contains(ChargeRule::chain_begin));
  EXPECT_TRUE(seen.contains(ChargeRule::chain_link));
  EXPECT_TRUE(seen.contains(ChargeRule::chain_end));
  const AuditReport rep = verify_lcalpha(l, tr);
  EXPECT_TRUE(rep.pass) << (rep.failures.empty() ? "" : rep.failures.front());
  EXPECT_LT(rep.conservation_residual, 1e-9);
}

TEST(LcAlphaCharges, CorruptedChainEndFails) {
  const Instance inst = chain_instance();
  LcAlphaPolicy policy;
  const Trace tr = run(policy, inst, 1);
  ChargeLedger l = lcalpha_charges(tr, optimal_schedule(inst));
  bool corrupted = false;
  for (ChargeEntry& e : l.entries)
    if (e.rule == ChargeRule::chain_end && e.to_alg_slot == e.from_opt_slot) {
      e.amount *= 3.0;
      corrupted = true;
    }
  ASSERT_TRUE(corrupted);
  const AuditReport rep = verify_lcalpha(l, tr);
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(rep.witness, Slot{2});
}

TEST(LcAlphaCharges, StructuralFaultsAreReported) {
  const Instance inst = chain_instance();
  LcAlphaPolicy policy;
  const Trace tr = run(policy, inst, 1);
  const ChargeLedger clean = lcalpha_charges(tr, optimal_schedule(inst));

  ChargeLedger full_on_chain = clean;
  full_on_chain.entries.push_back({9, 1, std::nullopt, 0.0, ChargeRule::full_up, 0});
  EXPECT_FALSE(verify_lcalpha(full_on_chain, tr).pass);

  ChargeLedger overlapping = clean;
  overlapping.pairs = {{3, 4}, {4, 5}};
  EXPECT_FALSE(verify_lcalpha(overlapping, tr).pass);
}

TEST(LcAlphaCharges, LowerBoundGameRunsPass) {
  for (int n : {3, 20, 50}) {
    LcAlphaPolicy policy;
    const AdversaryOutcome out = run_lb_adversary(policy, lb_params(n, 1e-3));
    const ChargeLedger l = lcalpha_charges(out.trace, out.opt);
    // The game ends in phase 0 with one split-charge pair.
    EXPECT_EQ(l.pairs.size(), 1u);
    const AuditReport rep = verify_lcalpha(l, out.trace);
    EXPECT_TRUE(rep.pass);
    EXPECT_LE(out.ratio, lc_constants().ratio + 1e-9);
  }
}

TEST(LcAlphaCharges, RequiresPlanSnapshots) {
  const Instance inst({pk(0, 1, 1, 1)}, 2);
  GreedyPolicy g;
  const Trace tr = run(g, inst, 1);
  EXPECT_THROW(lcalpha_charges(tr, optimal_schedule(inst)), Error);
}

TEST(LcAlphaCharges, ConservationOnFuzzedRuns) {
  FuzzSpec spec;
  spec.seed = 32;
  spec.s = 2;
  for (std::size_t i = 0; i < 2000; ++i) {
    const AuditReport rep = audit_instance("lcalpha", fuzz_instance(spec, i));
    EXPECT_LT(rep.conservation_residual, 1e-9) << "instance " << i;
    EXPECT_TRUE(rep.pass) << "instance " << i << ": " << (rep.failures.empty() ? "" : rep.failures.front());
  }
}

TEST(AuditCampaignTest, CountsFailures) {
  FuzzSpec spec;
  spec.seed = 4;
  const AuditCampaign c = run_audit_campaign("toggleh", spec, 300, 2);
  EXPECT_EQ(c.count, 300u);
  EXPECT_EQ(c.failed, 0u);
  EXPECT_FALSE(c.first_failure);
  EXPECT_THROW(run_audit_campaign("greedy", spec, 1, 1), Error);
}
