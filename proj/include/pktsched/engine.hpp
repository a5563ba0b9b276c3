#pragma once

// Online execution engine. A policy sees, at slot t, the pending packets and
// (with 1-lookahead) the packets released at t+1, and returns one pending
// packet. Packets may be fed to the engine lazily, which is what adaptive
// adversaries need.

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pktsched/core.hpp"

namespace pktsched {

enum class StepKind { none, greedy, edf, f_step, e_step, plan_first, plan_second, canned };

inline const char* to_string(StepKind k) {
  switch (k) {
    case StepKind::none: return "none";
    case StepKind::greedy: return "greedy";
    case StepKind::edf: return "edf";
    case StepKind::f_step: return "f-step";
    case StepKind::e_step: return "e-step";
    case StepKind::plan_first: return "scheduled-p1";
    case StepKind::plan_second: return "scheduled-p2";
    case StepKind::canned: return "canned";
  }
  return "none";
}

/// Optimal schedule of pending and lookahead packets on slots t, t+1, t+2.
struct Plan {
  std::array<std::optional<Packet>, 3> slot;

  std::optional<PacketId> id(std::size_t i) const {
    return slot[i] ? std::optional<PacketId>(slot[i]->id) : std::nullopt;
  }
  double weight() const {
    double w = 0.0;
    for (const auto& p : slot)
      if (p) w += p->weight;
    return w;
  }
};

struct StepView {
  Slot slot = 0;
  std::span<const Packet> pending;
  std::span<const Packet> lookahead;
};

struct Decision {
  std::optional<PacketId> packet;
  StepKind kind = StepKind::none;
  std::optional<Plan> plan;
  std::optional<PacketId> mark_before;
  std::optional<PacketId> mark_after;
};

inline Decision choose(std::optional<PacketId> packet, StepKind kind) {
  Decision d;
  d.packet = packet;
  d.kind = kind;
  return d;
}

class OnlinePolicy {
 public:
  virtual ~OnlinePolicy() = default;
  virtual std::string name() const = 0;
  virtual void reset() {}
  virtual Decision decide(const StepView& view) = 0;
};

struct StepRecord {
  Slot slot = 0;
  std::optional<PacketId> scheduled;
  StepKind kind = StepKind::none;
  std::optional<Plan> plan;
  std::optional<PacketId> mark_before;
  std::optional<PacketId> mark_after;
  // Heaviest pending packet at the start of the step.
  std::optional<PacketId> heaviest;
  // Pending ids at the start of the step, ascending.
  std::vector<PacketId> pending;
};

/// Everything an auditor needs about one run: the packets the engine saw
/// (fillers included) and one record per stepped slot.
class Trace {
 public:
  std::string policy;
  int lookahead = 0;
  std::vector<Packet> packets;
  std::vector<StepRecord> steps;

  void index() {
    by_id_.clear();
    by_slot_.clear();
    for (std::size_t i = 0; i < packets.size(); ++i) by_id_[packets[i].id] = i;
    for (std::size_t i = 0; i < steps.size(); ++i) by_slot_[steps[i].slot] = i;
  }

  const Packet& packet(PacketId id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw Error("trace: unknown packet id " + std::to_string(id));
    return packets[it->second];
  }

  const StepRecord* at(Slot t) const {
    auto it = by_slot_.find(t);
    return it == by_slot_.end() ? nullptr : &steps[it->second];
  }

  /// The scheduled packet at t, fillers included.
  const Packet* scheduled_at(Slot t) const {
    const StepRecord* r = at(t);
    return r && r->scheduled ? &packet(*r->scheduled) : nullptr;
  }

  /// Weight scheduled at t (0 for idle, filler, or unstepped slots).
  double weight_at(Slot t) const {
    const Packet* p = scheduled_at(t);
    return p ? p->weight : 0.0;
  }

  /// Real packets only.
  Instance instance() const {
    std::vector<Packet> real;
    for (const Packet& p : packets)
      if (!p.synthetic) real.push_back(p);
    return Instance(std::move(real));
  }

  Schedule schedule() const {
    Schedule s;
    for (const StepRecord& r : steps)
      if (r.scheduled && !packet(*r.scheduled).synthetic) s.assign(r.slot, *r.scheduled);
    return s;
  }

  double weight() const {
    std::vector<double> ws;
    for (const StepRecord& r : steps)
      if (r.scheduled) ws.push_back(packet(*r.scheduled).weight);
    return weight_sum(std::move(ws));
  }

 private:
  std::unordered_map<PacketId, std::size_t> by_id_;
  std::map<Slot, std::size_t> by_slot_;
};

/// Step-by-step driver. Packets must be released before the first step that
/// could observe them (slot >= release - lookahead).
class Engine {
 public:
  Engine(OnlinePolicy& policy, int lookahead) : policy_(policy), lookahead_(lookahead) {
    if (lookahead != 0 && lookahead != 1) throw Error("lookahead must be 0 or 1");
    policy_.reset();
    trace_.policy = policy_.name();
    trace_.lookahead = lookahead;
  }

  void release(const Packet& p) {
    if (p.id >= kSyntheticIdBase) throw Error("packet id " + std::to_string(p.id) + " is reserved");
    if (p.deadline < p.release) throw Error(describe(p) + ": deadline before release");
    if (stepped_ && p.release <= last_slot_ + lookahead_)
      throw Error(describe(p) + " released after slot " + std::to_string(last_slot_) + " could already see it");
    for (const Packet& q : trace_.packets)
      if (q.id == p.id) throw Error("duplicate packet id " + std::to_string(p.id));
    trace_.packets.push_back(p);
    future_.push_back(p);
  }

  const Packet* find(PacketId id) const {
    for (const Packet& p : trace_.packets)
      if (p.id == id) return &p;
    return nullptr;
  }

  bool stepped() const { return stepped_; }
  Slot last_slot() const { return last_slot_; }

  /// Latest deadline among released packets still relevant to the run.
  std::optional<Slot> last_deadline() const {
    std::optional<Slot> m;
    for (const Packet& p : trace_.packets)
      if (!p.synthetic) m = m ? std::max(*m, p.deadline) : p.deadline;
    return m;
  }

  std::optional<Slot> first_release() const {
    std::optional<Slot> m;
    for (const Packet& p : trace_.packets)
      if (!p.synthetic) m = m ? std::min(*m, p.release) : p.release;
    return m;
  }

  const StepRecord& step(Slot t) {
    if (stepped_ && t <= last_slot_) throw Error("slot " + std::to_string(t) + " already stepped");
    std::erase_if(pending_, [t](const Packet& p) { return p.deadline < t; });
    auto admit = std::stable_partition(future_.begin(), future_.end(), [t](const Packet& p) { return p.release > t; });
    for (auto it = admit; it != future_.end(); ++it)
      if (it->deadline >= t) pending_.push_back(*it);
    future_.erase(admit, future_.end());

    if (pending_.empty()) {
      Packet filler{kSyntheticIdBase + static_cast<PacketId>(t), t, t, 0.0, true};
      trace_.packets.push_back(filler);
      pending_.push_back(filler);
    }
    lookahead_buf_.clear();
    if (lookahead_ == 1)
      for (const Packet& p : future_)
        if (p.release == t + 1) lookahead_buf_.push_back(p);

    StepRecord rec;
    rec.slot = t;
    rec.heaviest = std::min_element(pending_.begin(), pending_.end(), heavier)->id;
    for (const Packet& p : pending_) rec.pending.push_back(p.id);
    std::sort(rec.pending.begin(), rec.pending.end());

    Decision d = policy_.decide(StepView{t, pending_, lookahead_buf_});
    if (d.packet) {
      auto it = std::find_if(pending_.begin(), pending_.end(), [&](const Packet& p) { return p.id == *d.packet; });
      if (it == pending_.end())
        throw Error(policy_.name() + " chose packet " + std::to_string(*d.packet) + " at slot " + std::to_string(t) +
                    ", which is not pending");
      pending_.erase(it);
    }
    rec.scheduled = d.packet;
    rec.kind = d.kind;
    rec.plan = std::move(d.plan);
    rec.mark_before = d.mark_before;
    rec.mark_after = d.mark_after;
    trace_.steps.push_back(std::move(rec));
    stepped_ = true;
    last_slot_ = t;
    return trace_.steps.back();
  }

  /// Steps every remaining slot up to the last deadline of released packets.
  Trace finish() {
    if (auto hi = last_deadline()) {
      Slot t = stepped_ ? last_slot_ + 1 : *first_release();
      for (; t <= *hi; ++t) step(t);
    }
    Trace out = std::move(trace_);
    out.index();
    return out;
  }

 private:
  OnlinePolicy& policy_;
  int lookahead_;
  bool stepped_ = false;
  Slot last_slot_ = 0;
  std::vector<Packet> pending_;
  std::vector<Packet> future_;
  std::vector<Packet> lookahead_buf_;
  Trace trace_;
};

/// Runs a policy over a static instance, stepping every slot from the first
/// release to the last deadline.
inline Trace run(OnlinePolicy& policy, const Instance& inst, int lookahead) {
  Engine engine(policy, lookahead);
  for (const Packet& p : inst.packets()) engine.release(p);
  return engine.finish();
}

}  // namespace pktsched
