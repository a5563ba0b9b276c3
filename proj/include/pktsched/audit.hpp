#pragma once

// Charging-scheme replay. Each optimal packet's weight is distributed onto
// algorithm steps by the rules of the corresponding competitive analysis;
// the verifiers then check conservation and that every step (or designated
// pair of steps) carries at most `bound` times the weight scheduled there.

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pktsched/core.hpp"
#include "pktsched/engine.hpp"
#include "pktsched/offline.hpp"
#include "pktsched/policies.hpp"

namespace pktsched {

enum class ChargeRule {
  // ToggleH
  special_up,
  special_back,
  full_up,
  regular_up,
  regular_back,
  // LC_alpha (full_up shared)
  full_back,
  close_split,
  distant_split,
  chain_single_up,
  chain_single_fwd,
  chain_begin,
  chain_end,
  chain_fwd,
  chain_link,
};

inline const char* to_string(ChargeRule r) {
  switch (r) {
    case ChargeRule::special_up: return "special-up";
    case ChargeRule::special_back: return "special-back";
    case ChargeRule::full_up: return "full-up";
    case ChargeRule::regular_up: return "regular-up";
    case ChargeRule::regular_back: return "regular-back";
    case ChargeRule::full_back: return "full-back";
    case ChargeRule::close_split: return "close-split";
    case ChargeRule::distant_split: return "distant-split";
    case ChargeRule::chain_single_up: return "chain-single-up";
    case ChargeRule::chain_single_fwd: return "chain-single-fwd";
    case ChargeRule::chain_begin: return "chain-begin";
    case ChargeRule::chain_end: return "chain-end";
    case ChargeRule::chain_fwd: return "chain-fwd";
    case ChargeRule::chain_link: return "chain-link";
  }
  return "?";
}

inline bool is_full(ChargeRule r) { return r == ChargeRule::full_up || r == ChargeRule::full_back; }
inline bool is_split(ChargeRule r) { return r == ChargeRule::close_split || r == ChargeRule::distant_split; }

struct ChargeEntry {
  Slot from_opt_slot = 0;
  Slot to_alg_slot = 0;
  // Split charges go to the pair (to_alg_slot, *pair_slot) as one amount.
  std::optional<Slot> pair_slot;
  double amount = 0.0;
  ChargeRule rule = ChargeRule::full_up;
  PacketId packet = 0;
};

struct ChargeLedger {
  std::vector<ChargeEntry> entries;
  std::vector<std::pair<Slot, Slot>> pairs;
  std::vector<Slot> chaining;          // LC_alpha only
  std::map<Slot, PacketId> opt;        // the optimum the ledger was built from
  double opt_weight = 0.0;
};

struct SlotTotal {
  Slot slot = 0;
  double charge = 0.0;
  double weight = 0.0;
};

struct PairTotal {
  Slot first = 0;
  Slot second = 0;
  double charge = 0.0;
  double weight = 0.0;
};

struct AuditReport {
  std::string scheme;
  double bound = 0.0;
  std::vector<SlotTotal> slots;
  std::vector<PairTotal> pairs;
  double conservation_residual = 0.0;  // max over packets, relative to the packet weight
  double total_residual = 0.0;         // relative to the optimum weight
  bool pass = true;
  std::optional<Slot> witness;
  std::vector<std::string> failures;

  void fail(Slot t, std::string why) {
    if (pass) witness = t;
    pass = false;
    failures.push_back("slot " + std::to_string(t) + ": " + std::move(why));
  }
};

inline constexpr double kAuditTolerance = 1e-9;

namespace detail {

inline bool within(double value, double bound) {
  return value <= bound + kAuditTolerance * std::max(1.0, std::abs(bound));
}

inline std::map<Slot, PacketId> opt_map(const OptResult& opt) {
  std::map<Slot, PacketId> m;
  for (const Assignment& a : opt.schedule.assignments()) m[a.slot] = a.packet;
  return m;
}

inline std::unordered_map<PacketId, Slot> alg_slots(const Trace& trace) {
  std::unordered_map<PacketId, Slot> m;
  for (const StepRecord& r : trace.steps)
    if (r.scheduled) m[*r.scheduled] = r.slot;
  return m;
}

inline std::optional<PacketId> lookup(const std::map<Slot, PacketId>& m, Slot t) {
  auto it = m.find(t);
  return it == m.end() ? std::nullopt : std::optional(it->second);
}

inline void check_conservation(const ChargeLedger& ledger, const Trace& trace, AuditReport& rep) {
  std::map<PacketId, double> out;
  std::map<PacketId, Slot> from;
  double total = 0.0;
  for (const ChargeEntry& e : ledger.entries) {
    out[e.packet] += e.amount;
    from[e.packet] = e.from_opt_slot;
    total += e.amount;
  }
  for (const auto& [t, id] : ledger.opt) {
    const double w = trace.packet(id).weight;
    const double res = std::abs(out[id] - w) / std::max(w, 1e-300);
    rep.conservation_residual = std::max(rep.conservation_residual, w > 0.0 ? res : std::abs(out[id]));
    if (std::abs(out[id] - w) > kAuditTolerance * std::max(1.0, w))
      rep.fail(t, "charges of packet " + std::to_string(id) + " sum to " + std::to_string(out[id]) +
                      " but its weight is " + std::to_string(w));
  }
  for (const auto& [id, t] : from)
    if (!ledger.opt.contains(t) || ledger.opt.at(t) != id)
      rep.fail(t, "charge from packet " + std::to_string(id) + " which is not in the optimum at that slot");
  rep.total_residual = std::abs(total - ledger.opt_weight) / std::max(ledger.opt_weight, 1e-300);
  if (ledger.opt_weight == 0.0) rep.total_residual = std::abs(total);
}

inline std::vector<Slot> audited_slots(const ChargeLedger& ledger, const Trace& trace) {
  std::set<Slot> s;
  for (const StepRecord& r : trace.steps) s.insert(r.slot);
  for (const ChargeEntry& e : ledger.entries) {
    s.insert(e.to_alg_slot);
    if (e.pair_slot) s.insert(*e.pair_slot);
  }
  return {s.begin(), s.end()};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ToggleH

/// Builds the ToggleH ledger: for the optimal packet j at slot t, with h the
/// heaviest packet pending for the algorithm at t,
///   1. t an e-step and j = h:  w_h/phi to t, w_h/phi^2 to t-1;
///   2. j pending at t:         w_j to t;
///   3. otherwise:              w_h/phi^2 to t, the rest to the slot where
///                              the algorithm scheduled j (may be negative).
inline ChargeLedger toggleh_charges(const Trace& trace, const OptResult& opt) {
  ChargeLedger ledger;
  ledger.opt = detail::opt_map(opt);
  ledger.opt_weight = opt.weight;
  const auto alg = detail::alg_slots(trace);
  for (const auto& [t, j] : ledger.opt) {
    const Packet& pj = trace.packet(j);
    const StepRecord* rec = trace.at(t);
    if (!rec || !rec->heaviest || (rec->kind != StepKind::f_step && rec->kind != StepKind::e_step))
      throw Error("toggleh_charges: trace has no ToggleH snapshot for slot " + std::to_string(t));
    const Packet& h = trace.packet(*rec->heaviest);
    const bool pending = std::binary_search(rec->pending.begin(), rec->pending.end(), j);
    if (rec->kind == StepKind::e_step && j == h.id) {
      ledger.entries.push_back({t, t, std::nullopt, h.weight / kPhi, ChargeRule::special_up, j});
      ledger.entries.push_back({t, t - 1, std::nullopt, h.weight / (kPhi * kPhi), ChargeRule::special_back, j});
    } else if (pending) {
      ledger.entries.push_back({t, t, std::nullopt, pj.weight, ChargeRule::full_up, j});
    } else {
      auto it = alg.find(j);
      if (it == alg.end() || it->second >= t)
        throw Error("toggleh_charges: packet " + std::to_string(j) + " in the optimum at slot " + std::to_string(t) +
                    " is neither pending nor scheduled earlier by the algorithm");
      const double up = h.weight / (kPhi * kPhi);
      ledger.entries.push_back({t, t, std::nullopt, up, ChargeRule::regular_up, j});
      ledger.entries.push_back({t, it->second, std::nullopt, pj.weight - up, ChargeRule::regular_back, j});
    }
  }
  return ledger;
}

/// Left-to-right scan: a step passes alone if its charge is at most
/// phi * (its weight); otherwise it must pass together with the next step.
inline AuditReport verify_toggleh(const ChargeLedger& ledger, const Trace& trace) {
  AuditReport rep;
  rep.scheme = "toggleh";
  rep.bound = kPhi;
  std::map<Slot, double> charge;
  std::map<Slot, double> up;
  std::set<Slot> regular_back;
  for (const ChargeEntry& e : ledger.entries) {
    charge[e.to_alg_slot] += e.amount;
    if (e.rule == ChargeRule::full_up || e.rule == ChargeRule::regular_up || e.rule == ChargeRule::special_up)
      up[e.to_alg_slot] += e.amount;
    if (e.rule == ChargeRule::regular_back) regular_back.insert(e.to_alg_slot);
  }

  const std::vector<Slot> slots = detail::audited_slots(ledger, trace);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot t = slots[i];
    const double c = charge[t], w = trace.weight_at(t);
    rep.slots.push_back({t, c, w});
    if (detail::within(c, kPhi * w)) continue;
    const Slot u = t + 1;
    const double c2 = c + charge[u], w2 = w + trace.weight_at(u);
    if (!detail::within(c2, kPhi * w2)) {
      std::ostringstream os;
      os << "charge " << c << " exceeds phi * " << w << ", and with slot " << u << " " << c2 << " exceeds phi * "
         << w2;
      rep.fail(t, os.str());
      continue;
    }
    rep.pairs.push_back({t, u, c2, w2});
    if (i + 1 < slots.size() && slots[i + 1] == u) {
      ++i;
      rep.slots.push_back({u, charge[u], trace.weight_at(u)});
    }
  }

  // An f-step receiving a regular back charge gets an up charge below w_h/phi.
  for (Slot t : regular_back) {
    const StepRecord* rec = trace.at(t);
    if (!rec || rec->kind != StepKind::f_step || !rec->heaviest) continue;
    const double limit = trace.packet(*rec->heaviest).weight / kPhi;
    if (!detail::within(up[t], limit)) {
      std::ostringstream os;
      os << "f-step with a regular back charge has up charge " << up[t] << " > w_h/phi = " << limit;
      rep.fail(t, os.str());
    }
  }
  detail::check_conservation(ledger, trace, rep);
  return rep;
}

// ---------------------------------------------------------------------------
// LC_alpha

/// Builds the LC_alpha ledger. Full back charges are classified in a first
/// pass so that the close-split guard can ask whether step t+1 receives one.
inline ChargeLedger lcalpha_charges(const Trace& trace, const OptResult& opt, const LcConstants& c = lc_constants()) {
  ChargeLedger ledger;
  ledger.opt = detail::opt_map(opt);
  ledger.opt_weight = opt.weight;
  const auto alg = detail::alg_slots(trace);
  auto alg_at = [&](Slot t) -> const Packet* { return trace.scheduled_at(t); };
  auto w_of = [](const Packet* p) { return p ? p->weight : 0.0; };

  // Pass 1: which steps receive a full back charge.
  std::set<Slot> full_back_to;
  for (const auto& [t, j] : ledger.opt) {
    auto it = alg.find(j);
    if (it != alg.end() && it->second == t - 1) full_back_to.insert(t - 1);
  }

  struct ChainStep {
    Slot t;
    PacketId j;
    double wj;
    double wf;
  };
  std::vector<ChainStep> chain_steps;

  for (const auto& [t, j] : ledger.opt) {
    const StepRecord* rec = trace.at(t);
    if (!rec) throw Error("lcalpha_charges: trace has no step at slot " + std::to_string(t));
    if (!rec->plan) throw Error("lcalpha_charges: trace has no plan snapshot at slot " + std::to_string(t));
    const double wj = trace.packet(j).weight;
    const Packet* f = alg_at(t);
    const double wf = w_of(f);

    auto a = alg.find(j);
    if (a != alg.end() && a->second == t - 1) {
      ledger.entries.push_back({t, t - 1, std::nullopt, wj, ChargeRule::full_back, j});
      continue;
    }
    const std::optional<PacketId> opt_next = detail::lookup(ledger.opt, t + 1);
    if (wf >= wj && !(f && opt_next == f->id)) {
      ledger.entries.push_back({t, t, std::nullopt, wj, ChargeRule::full_up, j});
      continue;
    }
    if (wf > wj) {
      const Packet* g = alg_at(t + 1);
      const double wg = w_of(g);
      const double wp1 = rec->plan->slot[0] ? rec->plan->slot[0]->weight : 0.0;
      const bool g_full_back = full_back_to.contains(t + 1);
      const bool close = 2.0 * c.alpha * wj < wf + wg || (!g_full_back && 2.0 * c.alpha * (wp1 - wg) < wf + wg);
      const Slot other = close ? t + 1 : t + 2;
      ledger.entries.push_back({t, t, other, wj, close ? ChargeRule::close_split : ChargeRule::distant_split, j});
      ledger.pairs.emplace_back(t, other);
      continue;
    }
    chain_steps.push_back({t, j, wj, wf});
  }

  for (std::size_t b = 0; b < chain_steps.size();) {
    std::size_t e = b + 1;
    while (e < chain_steps.size() && chain_steps[e].t == chain_steps[e - 1].t + 1) ++e;
    const std::size_t len = e - b;
    for (std::size_t i = b; i < e; ++i) {
      const auto& [t, j, wj, wf] = chain_steps[i];
      ledger.chaining.push_back(t);
      if (len == 1) {
        ledger.entries.push_back({t, t, std::nullopt, std::min(wj, c.ratio * wf), ChargeRule::chain_single_up, j});
        if (wj > c.ratio * wf)
          ledger.entries.push_back({t, t + 1, std::nullopt, wj - c.ratio * wf, ChargeRule::chain_single_fwd, j});
      } else if (i == b) {
        ledger.entries.push_back({t, t, std::nullopt, 2.0 * c.delta * wj, ChargeRule::chain_begin, j});
        ledger.entries.push_back({t, t + 1, std::nullopt, (1.0 - 2.0 * c.delta) * wj, ChargeRule::chain_begin, j});
      } else if (i + 1 == e) {
        const double mid = (c.ratio - 1.0 + 2.0 * c.delta) * wf;
        ledger.entries.push_back({t, t - 1, std::nullopt, c.delta * wj, ChargeRule::chain_end, j});
        ledger.entries.push_back({t, t, std::nullopt, mid, ChargeRule::chain_end, j});
        ledger.entries.push_back({t, t + 1, std::nullopt, (1.0 - c.delta) * wj - mid, ChargeRule::chain_fwd, j});
      } else {
        ledger.entries.push_back({t, t - 1, std::nullopt, c.delta * wj, ChargeRule::chain_link, j});
        ledger.entries.push_back({t, t, std::nullopt, c.delta * wj, ChargeRule::chain_link, j});
        ledger.entries.push_back({t, t + 1, std::nullopt, (1.0 - 2.0 * c.delta) * wj, ChargeRule::chain_link, j});
      }
    }
    b = e;
  }
  return ledger;
}

/// Split-charge pairs are checked jointly against R * (w_f + w_f'), every
/// other step alone against R * w_f, plus the structural facts the analysis
/// relies on.
inline AuditReport verify_lcalpha(const ChargeLedger& ledger, const Trace& trace,
                                  const LcConstants& c = lc_constants()) {
  AuditReport rep;
  rep.scheme = "lcalpha";
  rep.bound = c.ratio;

  std::map<Slot, int> in_pair;
  for (const auto& [a, b] : ledger.pairs) {
    ++in_pair[a];
    ++in_pair[b];
  }
  std::map<Slot, double> charge;
  std::map<Slot, int> full_count;
  std::map<std::pair<Slot, Slot>, double> split_amount;
  for (const ChargeEntry& e : ledger.entries) {
    if (e.pair_slot) {
      split_amount[{e.to_alg_slot, *e.pair_slot}] += e.amount;
    } else {
      charge[e.to_alg_slot] += e.amount;
    }
    if (is_full(e.rule)) ++full_count[e.to_alg_slot];
  }

  for (Slot t : detail::audited_slots(ledger, trace)) {
    const double w = trace.weight_at(t);
    rep.slots.push_back({t, charge[t], w});
    if (in_pair.contains(t)) continue;
    if (!detail::within(charge[t], c.ratio * w)) {
      std::ostringstream os;
      os << "charge " << charge[t] << " exceeds R * " << w;
      rep.fail(t, os.str());
    }
  }
  for (const auto& [a, b] : ledger.pairs) {
    const double total = charge[a] + charge[b] + split_amount[{a, b}];
    const double w = trace.weight_at(a) + trace.weight_at(b);
    rep.pairs.push_back({a, b, total, w});
    if (!detail::within(total, c.ratio * w)) {
      std::ostringstream os;
      os << "split pair (" << a << ", " << b << ") charge " << total << " exceeds R * " << w;
      rep.fail(a, os.str());
    }
  }
  for (const auto& [t, cnt] : in_pair)
    if (cnt > 1) rep.fail(t, "slot belongs to more than one split-charge pair");

  const std::set<Slot> chaining(ledger.chaining.begin(), ledger.chaining.end());
  for (const auto& [t, cnt] : full_count)
    if (cnt > 1) rep.fail(t, "step receives " + std::to_string(cnt) + " full charges");
  for (Slot t : chaining) {
    if (full_count.contains(t)) rep.fail(t, "chaining step receives a full charge");
    if (in_pair.contains(t)) rep.fail(t, "chaining step belongs to a split-charge pair");
  }

  // A split charge from j at t needs the algorithm's packet at t to be the
  // optimum's packet at t+1.
  for (const ChargeEntry& e : ledger.entries) {
    if (!is_split(e.rule)) continue;
    const Slot t = e.from_opt_slot;
    const Packet* f = trace.scheduled_at(t);
    if (!f || detail::lookup(ledger.opt, t + 1) != f->id)
      rep.fail(t, "split-charged step whose packet is not in the optimum at the next slot");
  }
  // Consecutive chaining steps: the algorithm schedules j (the optimum's
  // packet at t) at t+1.
  for (Slot t : chaining) {
    if (!chaining.contains(t + 1)) continue;
    const Packet* g = trace.scheduled_at(t + 1);
    if (!g || detail::lookup(ledger.opt, t) != g->id)
      rep.fail(t, "consecutive chaining steps where the algorithm does not schedule j next");
  }

  detail::check_conservation(ledger, trace, rep);
  return rep;
}

}  // namespace pktsched
