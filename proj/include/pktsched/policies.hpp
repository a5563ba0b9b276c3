#pragma once

// Online policies: Greedy, EDF_alpha, ToggleH (4-bounded, with one mark) and
// CompareWithBias / LC_alpha (2-bounded, 1-lookahead).

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "pktsched/core.hpp"
#include "pktsched/engine.hpp"
#include "pktsched/offline.hpp"

namespace pktsched {

// ---------------------------------------------------------------------------
// Greedy and EDF_alpha

inline std::optional<PacketId> greedy_step(std::span<const Packet> pending) {
  if (pending.empty()) return std::nullopt;
  return std::min_element(pending.begin(), pending.end(), heavier)->id;
}

namespace detail {

inline const Packet& heaviest_of(std::span<const Packet> pending) {
  return *std::min_element(pending.begin(), pending.end(), heavier);
}

// Canonically first pending packet whose weight is at least `threshold`.
inline const Packet* earliest_at_least(std::span<const Packet> pending, double threshold) {
  const Packet* best = nullptr;
  for (const Packet& p : pending)
    if (p.weight >= threshold && (!best || canonical_less(p, *best))) best = &p;
  return best;
}

}  // namespace detail

/// Earliest-deadline pending packet with weight >= w_h / alpha.
inline std::optional<PacketId> edf_alpha_step(std::span<const Packet> pending, double alpha) {
  if (pending.empty()) return std::nullopt;
  if (!(alpha >= 1.0)) throw Error("EDF threshold alpha must be >= 1");
  const Packet& h = detail::heaviest_of(pending);
  return detail::earliest_at_least(pending, h.weight / alpha)->id;
}

// ---------------------------------------------------------------------------
// ToggleH

struct ToggleState {
  std::optional<PacketId> marked;
};

struct ToggleOutcome {
  std::optional<PacketId> packet;
  ToggleState state;
  StepKind kind = StepKind::none;
};

/// One ToggleH step. Thresholds are phi and phi^2 relative to the heaviest
/// pending packet h; the e-branch fires only for a marked h with no second
/// packet above w_h/phi and an expiring e.
inline ToggleOutcome toggleh_step(ToggleState state, std::span<const Packet> pending, Slot t) {
  if (pending.empty()) return {std::nullopt, ToggleState{}, StepKind::none};
  if (state.marked && std::none_of(pending.begin(), pending.end(),
                                   [&](const Packet& p) { return p.id == *state.marked; }))
    state.marked.reset();

  const Packet& h = detail::heaviest_of(pending);
  const Packet* s = nullptr;
  for (const Packet& p : pending)
    if (p.id != h.id && (!s || heavier(p, *s))) s = &p;
  const Packet& f = *detail::earliest_at_least(pending, h.weight / kPhi);
  const Packet& e = *detail::earliest_at_least(pending, h.weight / (kPhi * kPhi));

  const bool h_marked = state.marked == h.id;
  const bool heavy_second = s && s->weight >= h.weight / kPhi;
  if (!h_marked || heavy_second || e.deadline > t) {
    ToggleState next;
    if (h.deadline == t + 3 && f.deadline == t + 2) next.marked = h.id;
    return {f.id, next, StepKind::f_step};
  }
  return {e.id, ToggleState{}, StepKind::e_step};
}

// ---------------------------------------------------------------------------
// LC_alpha

struct LcConstants {
  double alpha;
  double delta;
  double ratio;
};

/// Residuals of the three defining equations and the six side conditions.
struct LcConstantChecks {
  double forward_residual;  // 2 - d - (R + 2d - 1)/a - R
  double chain_residual;    // 1 - 2d + 2ad - R
  double split_residual;    // 1 + 1/(2a) - R
  double two_minus_r_minus_3d;
  bool two_minus_r_minus_2d_positive;
  bool forward_margin_positive;
  bool one_minus_r_over_2a_positive;
  bool chain_begin_below_ratio;
  bool singleton_forward_below_ratio;
};

inline LcConstantChecks check_lc_constants(const LcConstants& c) {
  const double a = c.alpha, d = c.delta, r = c.ratio;
  return {
      2.0 - d - (r + 2.0 * d - 1.0) / a - r,
      1.0 - 2.0 * d + 2.0 * a * d - r,
      1.0 + 1.0 / (2.0 * a) - r,
      2.0 - r - 3.0 * d,
      2.0 - r - 2.0 * d > 0.0,
      1.0 - d - (r - 1.0 + 2.0 * d) / (2.0 * a) > 0.0,
      1.0 - r / (2.0 * a) > 0.0,
      3.0 * a * d < r,
      2.0 - r / a < r,
  };
}

inline bool lc_constants_ok(const LcConstants& c, double tol = 1e-12) {
  const LcConstantChecks k = check_lc_constants(c);
  return std::abs(k.forward_residual) < tol && std::abs(k.chain_residual) < tol &&
         std::abs(k.split_residual) < tol && std::abs(k.two_minus_r_minus_3d) < tol &&
         k.two_minus_r_minus_2d_positive && k.forward_margin_positive && k.one_minus_r_over_2a_positive &&
         k.chain_begin_below_ratio && k.singleton_forward_below_ratio;
}

inline LcConstants lc_constants() {
  const double r13 = std::sqrt(13.0);
  LcConstants c{(r13 + 3.0) / 4.0, (5.0 - r13) / 6.0, (r13 - 1.0) / 2.0};
  if (!lc_constants_ok(c)) throw Error("LC_alpha constants fail their defining identities");
  return c;
}

/// Optimal earliest-deadline plan over pending and lookahead packets from
/// slot t on. Only defined for 2-bounded inputs, where it fits in t..t+2.
inline Plan compute_plan(std::span<const Packet> pending, std::span<const Packet> lookahead, Slot t) {
  std::vector<Packet> cand;
  cand.reserve(pending.size() + lookahead.size());
  for (const Packet& p : pending) cand.push_back(p);
  for (const Packet& p : lookahead) cand.push_back(p);
  for (const Packet& p : cand) {
    if (p.window() > 2) throw Error("compute_plan requires 2-bounded packets; got " + describe(p));
    if (p.deadline < t) throw Error("compute_plan: " + describe(p) + " already expired at slot " + std::to_string(t));
  }
  // Heaviest-first greedy over the scheduling matroid, feasibility via EDF.
  std::sort(cand.begin(), cand.end(), heavier);
  std::vector<Packet> chosen;
  for (const Packet& p : cand) {
    chosen.push_back(p);
    if (!edf_feasible(chosen, t)) chosen.pop_back();
  }
  const Schedule layout = *edf_layout(chosen, t);
  Plan plan;
  for (const Packet& p : chosen) {
    const Slot at = *layout.slot_of(p.id);
    plan.slot[static_cast<std::size_t>(at - t)] = p;
  }
  return plan;
}

/// The CompareWithBias rule: take p2 instead of p1 only when p2 is released
/// now and p1 is lighter than p2, p3 and (w_p2 + w_p3) / (2 alpha).
inline std::optional<PacketId> lcalpha_step(const Plan& plan, Slot t, const LcConstants& c) {
  const auto& [p1, p2, p3] = plan.slot;
  if (!p1) return std::nullopt;
  if (p2 && p3 && p2->release == t) {
    const double bias = (p2->weight + p3->weight) / (2.0 * c.alpha);
    if (p1->weight < std::min({p2->weight, p3->weight, bias})) return p2->id;
  }
  return p1->id;
}

// ---------------------------------------------------------------------------
// Policy objects

class GreedyPolicy final : public OnlinePolicy {
 public:
  std::string name() const override { return "greedy"; }
  Decision decide(const StepView& v) override { return choose(greedy_step(v.pending), StepKind::greedy); }
};

class EdfPolicy final : public OnlinePolicy {
 public:
  explicit EdfPolicy(double alpha) : alpha_(alpha) {
    if (!(alpha >= 1.0)) throw Error("EDF threshold alpha must be >= 1");
  }
  std::string name() const override {
    std::ostringstream os;
    os.precision(17);
    os << "edf:" << alpha_;
    return os.str();
  }
  Decision decide(const StepView& v) override { return choose(edf_alpha_step(v.pending, alpha_), StepKind::edf); }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

class ToggleHPolicy final : public OnlinePolicy {
 public:
  std::string name() const override { return "toggleh"; }
  void reset() override { state_ = {}; }
  Decision decide(const StepView& v) override {
    Decision d;
    d.mark_before = state_.marked;
    ToggleOutcome o = toggleh_step(state_, v.pending, v.slot);
    state_ = o.state;
    d.packet = o.packet;
    d.kind = o.kind;
    d.mark_after = state_.marked;
    return d;
  }

 private:
  ToggleState state_;
};

class LcAlphaPolicy final : public OnlinePolicy {
 public:
  explicit LcAlphaPolicy(LcConstants c = lc_constants()) : c_(c) {}
  std::string name() const override { return "lcalpha"; }
  Decision decide(const StepView& v) override {
    Decision d;
    d.plan = compute_plan(v.pending, v.lookahead, v.slot);
    d.packet = lcalpha_step(*d.plan, v.slot, c_);
    d.kind = d.packet && d.packet == d.plan->id(1) ? StepKind::plan_second : StepKind::plan_first;
    return d;
  }
  const LcConstants& constants() const { return c_; }

 private:
  LcConstants c_;
};

/// Parses "greedy", "toggleh", "lcalpha", "edf:ALPHA" (ALPHA a number, "phi"
/// or "sqrt3"). Throws Error for anything else.
inline std::unique_ptr<OnlinePolicy> make_policy(std::string_view spec) {
  if (spec == "greedy") return std::make_unique<GreedyPolicy>();
  if (spec == "toggleh") return std::make_unique<ToggleHPolicy>();
  if (spec == "lcalpha") return std::make_unique<LcAlphaPolicy>();
  if (spec.starts_with("edf:")) {
    const std::string arg(spec.substr(4));
    double alpha = 0.0;
    if (arg == "phi") {
      alpha = kPhi;
    } else if (arg == "sqrt3") {
      alpha = std::sqrt(3.0);
    } else {
      std::size_t used = 0;
      try {
        alpha = std::stod(arg, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != arg.size()) throw Error("bad EDF threshold '" + arg + "'");
    }
    return std::make_unique<EdfPolicy>(alpha);
  }
  throw Error("unknown algorithm '" + std::string(spec) + "'");
}

}  // namespace pktsched
