#pragma once

// Offline optimum for unit packets with windows [r_p, d_p].
//
// The optimum is a maximum-weight matching of packets to slots in which only
// the packet side carries weight. For such graphs the packet sets that can be
// matched form a (transversal) matroid, so inserting packets heaviest-first
// and keeping each one iff an augmenting path exists is exact. The matched set
// is then laid out earliest-deadline-first, which both realizes it and gives
// the earliest-deadline property.

#include <algorithm>
#include <functional>
#include <queue>
#include <span>
#include <unordered_map>
#include <vector>

#include "pktsched/core.hpp"

namespace pktsched {

struct OptResult {
  Schedule schedule;
  double weight = 0.0;
  bool canonical = false;
};

/// Lays the packets out EDF from slot `from` on (releases below `from` are
/// treated as `from`). Returns nullopt if some packet misses its deadline,
/// i.e. iff the set is infeasible.
inline std::optional<Schedule> edf_layout(std::span<const Packet> packets, Slot from) {
  std::vector<Packet> byrel(packets.begin(), packets.end());
  auto eff = [from](const Packet& p) { return std::max(p.release, from); };
  std::sort(byrel.begin(), byrel.end(), [&](const Packet& a, const Packet& b) {
    if (eff(a) != eff(b)) return eff(a) < eff(b);
    return canonical_less(a, b);
  });
  auto later = [](const Packet& a, const Packet& b) { return canonical_less(b, a); };
  std::priority_queue<Packet, std::vector<Packet>, decltype(later)> ready(later);
  Schedule out;
  std::size_t next = 0;
  Slot t = from;
  while (next < byrel.size() || !ready.empty()) {
    if (ready.empty()) t = std::max(t, eff(byrel[next]));
    while (next < byrel.size() && eff(byrel[next]) <= t) ready.push(byrel[next++]);
    Packet p = ready.top();
    ready.pop();
    if (p.deadline < t) return std::nullopt;
    out.assign(t, p.id);
    ++t;
  }
  return out;
}

inline bool edf_feasible(std::span<const Packet> packets, Slot from) {
  return edf_layout(packets, from).has_value();
}

namespace detail {

// Kuhn-style augmenting search over compressed slot indices.
class SlotMatcher {
 public:
  explicit SlotMatcher(std::vector<std::vector<int>> adj, int slot_count)
      : adj_(std::move(adj)), owner_(slot_count, -1), seen_(slot_count, 0) {}

  bool insert(int left) {
    ++stamp_;
    return augment(left);
  }

 private:
  bool augment(int left) {
    for (int s : adj_[left]) {
      if (seen_[s] == stamp_) continue;
      seen_[s] = stamp_;
      if (owner_[s] < 0 || augment(owner_[s])) {
        owner_[s] = left;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> owner_;
  std::vector<int> seen_;
  int stamp_ = 0;
};

}  // namespace detail

/// Maximum-weight feasible subset, chosen heaviest-first (deterministic under
/// `heavier`). Windows are capped at n slots past release: an EDF layout of
/// any feasible set never needs more.
inline std::vector<Packet> max_weight_feasible_set(std::span<const Packet> packets) {
  std::vector<Packet> order(packets.begin(), packets.end());
  std::sort(order.begin(), order.end(), heavier);
  const Slot n = static_cast<Slot>(order.size());

  std::unordered_map<Slot, int> slot_index;
  std::vector<std::vector<int>> adj(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Packet& p = order[i];
    const Slot last = std::min(p.deadline, p.release + n - 1);
    for (Slot t = p.release; t <= last; ++t) {
      auto [it, fresh] = slot_index.emplace(t, static_cast<int>(slot_index.size()));
      adj[i].push_back(it->second);
    }
  }
  detail::SlotMatcher matcher(std::move(adj), static_cast<int>(slot_index.size()));
  std::vector<Packet> chosen;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (matcher.insert(static_cast<int>(i))) chosen.push_back(order[i]);
  return chosen;
}

inline OptResult optimal_schedule(const Instance& inst) {
  OptResult res;
  res.canonical = true;
  if (inst.empty()) return res;
  const std::vector<Packet> chosen = max_weight_feasible_set(inst.packets());
  auto layout = edf_layout(chosen, inst.horizon().first);
  if (!layout) throw Error("internal: matched packet set failed EDF layout");
  res.schedule = std::move(*layout);
  res.weight = schedule_weight(inst, res.schedule);
  return res;
}

inline constexpr std::size_t kBruteForceMaxPackets = 16;
inline constexpr Slot kBruteForceMaxHorizon = 16;

/// Exhaustive search over all injections of packet subsets into slots.
/// Oracle for small inputs only.
inline OptResult brute_force_optimal(const Instance& inst) {
  OptResult res;
  if (inst.empty()) return res;
  const auto [lo, hi] = inst.horizon();
  if (inst.size() > kBruteForceMaxPackets || hi - lo + 1 > kBruteForceMaxHorizon)
    throw Error("brute_force_optimal: instance exceeds " + std::to_string(kBruteForceMaxPackets) + " packets / " +
                std::to_string(kBruteForceMaxHorizon) + " slots");
  const auto& ps = inst.packets();
  std::vector<int> current(static_cast<std::size_t>(hi - lo + 1), -1);
  std::vector<int> best = current;
  double best_w = -1.0;
  std::vector<bool> used(ps.size(), false);

  std::function<void(Slot, double)> dfs = [&](Slot t, double acc) {
    if (t > hi) {
      if (acc > best_w) {
        best_w = acc;
        best = current;
      }
      return;
    }
    const std::size_t k = static_cast<std::size_t>(t - lo);
    current[k] = -1;
    dfs(t + 1, acc);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (used[i] || !ps[i].feasible_at(t)) continue;
      used[i] = true;
      current[k] = static_cast<int>(i);
      dfs(t + 1, acc + ps[i].weight);
      used[i] = false;
      current[k] = -1;
    }
  };
  dfs(lo, 0.0);

  for (std::size_t k = 0; k < best.size(); ++k)
    if (best[k] >= 0) res.schedule.assign(lo + static_cast<Slot>(k), ps[static_cast<std::size_t>(best[k])].id);
  res.weight = schedule_weight(inst, res.schedule);
  return res;
}

/// Swaps scheduled pairs (p at t, q at t' > t, r_q <= t, t' <= d_p) that are
/// out of canonical order until none remain. The set of scheduled packets,
/// hence the weight, is unchanged.
inline Schedule canonicalize(const Instance& inst, Schedule sch) {
  if (auto v = validate_schedule(inst, sch); !v.empty()) throw Error("canonicalize: " + v.front().message);
  std::vector<Assignment> as = sch.assignments();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < as.size(); ++a) {
      for (std::size_t b = a + 1; b < as.size(); ++b) {
        const Packet& p = inst.at(as[a].packet);
        const Packet& q = inst.at(as[b].packet);
        const bool swappable = q.release <= as[a].slot && as[b].slot <= p.deadline;
        if (swappable && canonical_less(q, p)) {
          std::swap(as[a].packet, as[b].packet);
          changed = true;
        }
      }
    }
  }
  Schedule out;
  for (const Assignment& a : as) out.assign(a.slot, a.packet);
  return out;
}

}  // namespace pktsched
