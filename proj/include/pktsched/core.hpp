#pragma once

// Domain types for bounded-delay packet scheduling: unit packets with a
// release slot, a deadline slot and a weight, instances, schedules, and the
// two orders every algorithm is phrased in (canonical "earliest deadline"
// order and "heavier").

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pktsched {

using Slot = std::int64_t;
using PacketId = std::uint64_t;

inline constexpr double kPhi = std::numbers::phi;

/// Ids at or above this value are reserved for engine-generated filler packets.
inline constexpr PacketId kSyntheticIdBase = PacketId{1} << 62;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Packet {
  PacketId id = 0;
  Slot release = 0;
  Slot deadline = 0;
  double weight = 0.0;
  // Tight zero-weight filler created by the engine for otherwise empty steps.
  bool synthetic = false;

  bool tight() const { return release == deadline; }
  Slot window() const { return deadline - release + 1; }
  bool feasible_at(Slot t) const { return release <= t && t <= deadline; }

  friend bool operator==(const Packet&, const Packet&) = default;
};

/// Canonical (earliest-deadline) order: earlier deadline first, equal
/// deadlines broken in favour of the heavier packet, then by id.
inline bool canonical_less(const Packet& x, const Packet& y) {
  if (x.deadline != y.deadline) return x.deadline < y.deadline;
  if (x.weight != y.weight) return x.weight > y.weight;
  return x.id < y.id;
}

/// Strict "heavier than" with the smaller id winning equal weights.
inline bool heavier(const Packet& x, const Packet& y) {
  if (x.weight != y.weight) return x.weight > y.weight;
  return x.id < y.id;
}

struct CanonicalLess {
  bool operator()(const Packet& x, const Packet& y) const { return canonical_less(x, y); }
};

struct Heavier {
  bool operator()(const Packet& x, const Packet& y) const { return heavier(x, y); }
};

inline std::string describe(const Packet& p) {
  std::ostringstream os;
  os << "packet " << p.id << " (r=" << p.release << ", d=" << p.deadline << ", w=" << p.weight << ")";
  return os.str();
}

/// An immutable set of packets. Construction validates every invariant and
/// throws Error on the first violation.
class Instance {
 public:
  Instance() = default;

  explicit Instance(std::vector<Packet> packets, std::optional<int> s_bound = std::nullopt,
                    bool distinct_weights = false)
      : packets_(std::move(packets)), s_bound_(s_bound), distinct_weights_(distinct_weights) {
    if (s_bound_ && *s_bound_ < 1) throw Error("s_bound must be a positive integer");
    for (std::size_t i = 0; i < packets_.size(); ++i) {
      const Packet& p = packets_[i];
      if (p.release < 0) throw Error(describe(p) + ": release must be >= 0");
      if (p.deadline < p.release) throw Error(describe(p) + ": deadline before release");
      if (!(p.weight >= 0.0) || p.weight == std::numeric_limits<double>::infinity())
        throw Error(describe(p) + ": weight must be finite and non-negative");
      if (s_bound_ && p.window() > *s_bound_)
        throw Error(describe(p) + ": violates s_bound " + std::to_string(*s_bound_));
      if (!index_.emplace(p.id, i).second) throw Error("duplicate packet id " + std::to_string(p.id));
    }
    if (distinct_weights_) {
      std::vector<double> ws;
      ws.reserve(packets_.size());
      for (const Packet& p : packets_) ws.push_back(p.weight);
      std::sort(ws.begin(), ws.end());
      if (std::adjacent_find(ws.begin(), ws.end()) != ws.end())
        throw Error("distinct_weights set but two packets share a weight");
    }
  }

  const std::vector<Packet>& packets() const { return packets_; }
  std::optional<int> s_bound() const { return s_bound_; }
  bool distinct_weights() const { return distinct_weights_; }
  bool empty() const { return packets_.empty(); }
  std::size_t size() const { return packets_.size(); }

  const Packet* find(PacketId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &packets_[it->second];
  }

  const Packet& at(PacketId id) const {
    const Packet* p = find(id);
    if (!p) throw Error("unknown packet id " + std::to_string(id));
    return *p;
  }

  /// First release and last deadline; {0, -1} for an empty instance.
  std::pair<Slot, Slot> horizon() const {
    if (packets_.empty()) return {0, -1};
    Slot lo = packets_.front().release, hi = packets_.front().deadline;
    for (const Packet& p : packets_) {
      lo = std::min(lo, p.release);
      hi = std::max(hi, p.deadline);
    }
    return {lo, hi};
  }

  /// Largest window length over all packets (0 when empty).
  Slot max_window() const {
    Slot m = 0;
    for (const Packet& p : packets_) m = std::max(m, p.window());
    return m;
  }

  bool is_s_bounded(int s) const { return max_window() <= s; }

 private:
  std::vector<Packet> packets_;
  std::optional<int> s_bound_;
  bool distinct_weights_ = false;
  std::unordered_map<PacketId, std::size_t> index_;
};

struct Assignment {
  Slot slot = 0;
  PacketId packet = 0;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Slot -> packet assignment. Kept as a flat list so that malformed input
/// (two packets in one slot) stays representable until validated.
class Schedule {
 public:
  Schedule() = default;

  void assign(Slot t, PacketId id) {
    auto it = std::upper_bound(assignments_.begin(), assignments_.end(), t,
                               [](Slot s, const Assignment& a) { return s < a.slot; });
    assignments_.insert(it, Assignment{t, id});
  }

  const std::vector<Assignment>& assignments() const { return assignments_; }
  std::size_t size() const { return assignments_.size(); }
  bool empty() const { return assignments_.empty(); }

  std::optional<PacketId> at(Slot t) const {
    auto it = std::lower_bound(assignments_.begin(), assignments_.end(), t,
                               [](const Assignment& a, Slot s) { return a.slot < s; });
    if (it == assignments_.end() || it->slot != t) return std::nullopt;
    return it->packet;
  }

  std::optional<Slot> slot_of(PacketId id) const {
    for (const Assignment& a : assignments_)
      if (a.packet == id) return a.slot;
    return std::nullopt;
  }

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<Assignment> assignments_;  // sorted by slot, stable for equal slots
};

struct Violation {
  enum class Kind { unknown_packet, before_release, after_deadline, slot_conflict, duplicate_packet };
  Kind kind;
  Slot slot;
  PacketId packet;
  std::string message;
};

inline std::vector<Violation> validate_schedule(const Instance& inst, const Schedule& sch) {
  std::vector<Violation> out;
  std::unordered_map<PacketId, Slot> seen;
  const auto& as = sch.assignments();
  for (std::size_t i = 0; i < as.size(); ++i) {
    const Assignment& a = as[i];
    const std::string where = "slot " + std::to_string(a.slot) + ", packet " + std::to_string(a.packet);
    if (i > 0 && as[i - 1].slot == a.slot)
      out.push_back({Violation::Kind::slot_conflict, a.slot, a.packet, "slot conflict at " + where});
    if (auto [it, fresh] = seen.emplace(a.packet, a.slot); !fresh)
      out.push_back({Violation::Kind::duplicate_packet, a.slot, a.packet,
                     "packet also scheduled at slot " + std::to_string(it->second) + ": " + where});
    const Packet* p = inst.find(a.packet);
    if (!p) {
      out.push_back({Violation::Kind::unknown_packet, a.slot, a.packet, "unknown packet at " + where});
      continue;
    }
    if (a.slot < p->release)
      out.push_back({Violation::Kind::before_release, a.slot, a.packet, "scheduled before release at " + where});
    if (a.slot > p->deadline)
      out.push_back({Violation::Kind::after_deadline, a.slot, a.packet, "scheduled after deadline at " + where});
  }
  return out;
}

inline bool is_valid_schedule(const Instance& inst, const Schedule& sch) {
  return validate_schedule(inst, sch).empty();
}

/// Sum in ascending order, so that the same multiset of weights always gives
/// the same double regardless of the order it was collected in.
inline double weight_sum(std::vector<double> ws) {
  std::sort(ws.begin(), ws.end());
  double total = 0.0;
  for (double w : ws) total += w;
  return total;
}

/// Total weight of the scheduled packets. Throws Error for an invalid schedule.
inline double schedule_weight(const Instance& inst, const Schedule& sch) {
  if (auto v = validate_schedule(inst, sch); !v.empty()) throw Error("invalid schedule: " + v.front().message);
  std::vector<double> ws;
  ws.reserve(sch.size());
  for (const Assignment& a : sch.assignments()) ws.push_back(inst.at(a.packet).weight);
  return weight_sum(std::move(ws));
}

/// Adds i*eta to the weight of the i-th packet. A non-positive eta selects
/// the default 1e-9 * (max weight). The result is flagged distinct when the
/// perturbed weights are in fact pairwise distinct.
inline Instance perturb(const Instance& inst, double eta = 0.0) {
  std::vector<Packet> ps = inst.packets();
  if (!(eta > 0.0)) {
    double wmax = 0.0;
    for (const Packet& p : ps) wmax = std::max(wmax, p.weight);
    eta = 1e-9 * (wmax > 0.0 ? wmax : 1.0);
  }
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].weight += static_cast<double>(i) * eta;
  std::vector<double> ws;
  for (const Packet& p : ps) ws.push_back(p.weight);
  std::sort(ws.begin(), ws.end());
  const bool distinct = std::adjacent_find(ws.begin(), ws.end()) == ws.end();
  return Instance(std::move(ps), inst.s_bound(), distinct);
}

}  // namespace pktsched
