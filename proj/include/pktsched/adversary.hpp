#pragma once

// Instance sources: the adaptive lower-bound game against 1-lookahead
// policies on 2-bounded inputs, its closed-form weights and ratios, and
// seeded random s-bounded generators for fuzzing.

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pktsched/core.hpp"
#include "pktsched/engine.hpp"
#include "pktsched/offline.hpp"
#include "pktsched/policies.hpp"

namespace pktsched {

// ---------------------------------------------------------------------------
// Lower-bound game parameters

struct LbParams {
  int n = 50;
  double delta = 1e-3;
  double alpha = 0.0;  // smaller root of (2R-2)x^2 - (R+1)x + (R+1)
  double beta = 0.0;   // larger root
  double gamma = 0.0;  // (2-R)/(2R-2)
  double ratio = 0.0;  // R = (1 + sqrt 17)/4
};

inline LbParams lb_params(int n = 50, double delta = 1e-3) {
  if (n < 1) throw Error("lower-bound game needs n >= 1 phases");
  if (!(delta > 0.0)) throw Error("lower-bound game needs delta > 0");
  const double r17 = std::sqrt(17.0);
  LbParams p;
  p.n = n;
  p.delta = delta;
  p.alpha = (3.0 + r17) / 4.0;
  p.beta = (5.0 + r17) / 4.0;
  p.gamma = (1.0 + r17) / 4.0;
  p.ratio = (1.0 + r17) / 4.0;
  return p;
}

/// w_i for i >= 1 from the closed form; any delta (including 0) is accepted.
inline double lb_weight(int i, double alpha, double beta, double gamma, double delta) {
  if (i == 0) return 1.0;
  const double am = std::pow(alpha, i - 1) * (alpha - 1.0);
  const double bm = std::pow(beta, i - 1) * (beta - 1.0);
  return (gamma + 1.0) * am + delta * (bm - am);
}

/// S_k from the closed-form solution of the recurrence.
inline double lb_partial_sum(int k, const LbParams& p) {
  return (p.gamma + 1.0) * std::pow(p.alpha, k) + p.delta * (std::pow(p.beta, k) - std::pow(p.alpha, k)) - p.gamma;
}

/// w_0 .. w_n.
inline std::vector<double> lb_weights(const LbParams& p) {
  if (!(p.delta > 0.0)) throw Error("lower-bound game needs delta > 0");
  if (p.n < 1) throw Error("lower-bound game needs n >= 1 phases");
  std::vector<double> w(static_cast<std::size_t>(p.n) + 1);
  for (int i = 0; i <= p.n; ++i) w[static_cast<std::size_t>(i)] = lb_weight(i, p.alpha, p.beta, p.gamma, p.delta);
  return w;
}

inline std::vector<double> partial_sums(const std::vector<double>& w) {
  std::vector<double> s(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s[i] = acc += w[i];
  return s;
}

/// Ratio when the policy leaves the game in phase k < n.
inline double ratio_case1(int k, const std::vector<double>& w) {
  const int n = static_cast<int>(w.size()) - 1;
  if (k < 0 || k >= n) throw Error("ratio_case1: phase " + std::to_string(k) + " out of range [0, " + std::to_string(n) + ")");
  const auto s = partial_sums(w);
  const double s1 = s[static_cast<std::size_t>(k) + 1], wk = w[static_cast<std::size_t>(k)], w0 = w[0];
  return (2.0 * s1 + wk - 2.0 * w0) / (2.0 * s1 - wk - w0);
}

/// Ratio when the policy plays all n phases.
inline double ratio_case2(int n, const std::vector<double>& w) {
  if (n < 1 || n >= static_cast<int>(w.size())) throw Error("ratio_case2: n = " + std::to_string(n) + " out of range");
  const auto s = partial_sums(w);
  const double sn = s[static_cast<std::size_t>(n)], wn = w[static_cast<std::size_t>(n)], w0 = w[0];
  return (2.0 * sn + wn - 2.0 * w0) / (2.0 * sn - w0);
}

/// Profits the proof exhibits for the two ways the game can end.
inline double case1_alg_weight(int k, const std::vector<double>& w) {
  const auto s = partial_sums(w);
  return 2.0 * s[static_cast<std::size_t>(k) + 1] - w[static_cast<std::size_t>(k)] - w[0];
}
inline double case1_opt_weight(int k, const std::vector<double>& w) {
  const auto s = partial_sums(w);
  return 2.0 * s[static_cast<std::size_t>(k) + 1] - 2.0 * w[0] + w[static_cast<std::size_t>(k)];
}
inline double case2_alg_weight(int n, const std::vector<double>& w) {
  return 2.0 * partial_sums(w)[static_cast<std::size_t>(n)] - w[0];
}
inline double case2_opt_weight(int n, const std::vector<double>& w) {
  return 2.0 * partial_sums(w)[static_cast<std::size_t>(n)] - 2.0 * w[0] + w[static_cast<std::size_t>(n)];
}

// ---------------------------------------------------------------------------
// The game

struct PhaseChoice {
  int phase = 0;
  Slot slot = 0;
  std::optional<PacketId> chosen;
  bool expiring = false;
};

struct AdversaryOutcome {
  int k = 0;
  bool stopped_early = false;
  double alg_weight = 0.0;
  double opt_weight = 0.0;
  double ratio = 0.0;
  std::vector<PhaseChoice> transcript;
  Instance instance;
  Trace trace;
  OptResult opt;
};

// Packet ids: a_i = 3i, b_i = 3i + 1, c_i = 3i + 2.
inline PacketId lb_id_a(int i) { return 3 * static_cast<PacketId>(i); }
inline PacketId lb_id_b(int i) { return 3 * static_cast<PacketId>(i) + 1; }
inline PacketId lb_id_c(int i) { return 3 * static_cast<PacketId>(i) + 2; }

/// Plays the adaptive game. Phase i releases a_i (tight at 2i+1, w_i),
/// b_i (2i+1..2i+2, w_{i+1}) and c_i (2i+2..2i+3, w_{i+1}); the next phase is
/// released only after the policy has committed at slot 2i+1, and only if it
/// scheduled an expiring packet there.
inline AdversaryOutcome run_lb_adversary(OnlinePolicy& policy, const LbParams& params, int lookahead = 1) {
  const std::vector<double> w = lb_weights(params);
  auto wi = [&](int i) { return w[static_cast<std::size_t>(i)]; };
  const int n = params.n;
  Engine engine(policy, lookahead);
  AdversaryOutcome out;

  auto release_ab = [&](int i) {
    const Slot t = 2 * static_cast<Slot>(i) + 1;
    engine.release(Packet{lb_id_a(i), t, t, wi(i)});
    engine.release(Packet{lb_id_b(i), t, t + 1, wi(i + 1)});
  };
  auto release_c = [&](int i) {
    const Slot t = 2 * static_cast<Slot>(i) + 2;
    engine.release(Packet{lb_id_c(i), t, t + 1, wi(i + 1)});
  };

  release_ab(0);
  release_c(0);
  int k = n;
  for (int i = 0; i < n; ++i) {
    const Slot odd = 2 * static_cast<Slot>(i) + 1;
    const StepRecord& rec = engine.step(odd);
    PhaseChoice pc{i, odd, rec.scheduled, false};
    if (rec.scheduled) {
      const Packet* chosen = engine.find(*rec.scheduled);
      pc.expiring = chosen && chosen->deadline == odd;
    }
    out.transcript.push_back(pc);
    if (!pc.expiring) {
      k = i;
      break;
    }
    if (i + 1 < n) {
      release_ab(i + 1);
    } else {
      const Slot last = 2 * static_cast<Slot>(n) + 1;
      engine.release(Packet{lb_id_a(n), last, last, wi(n)});
    }
    engine.step(odd + 1);
    if (i + 1 < n) release_c(i + 1);
  }

  out.k = k;
  out.stopped_early = k < n;
  out.trace = engine.finish();
  out.instance = out.trace.instance();
  out.alg_weight = out.trace.weight();
  out.opt = optimal_schedule(out.instance);
  out.opt_weight = out.opt.weight;
  if (!(out.alg_weight > 0.0)) throw Error("lower-bound game: policy collected no weight");
  out.ratio = out.opt_weight / out.alg_weight;
  return out;
}

// Canned strategies used to exercise both endings of the game.

/// Heaviest expiring pending packet, else heaviest pending.
class ExpiringFirstPolicy final : public OnlinePolicy {
 public:
  std::string name() const override { return "expiring"; }
  Decision decide(const StepView& v) override {
    const Packet* best = nullptr;
    for (const Packet& p : v.pending)
      if (p.deadline == v.slot && (!best || heavier(p, *best))) best = &p;
    return choose(best ? std::optional(best->id) : greedy_step(v.pending), StepKind::canned);
  }
};

/// Heaviest non-expiring pending packet, else heaviest pending.
class NonExpiringFirstPolicy final : public OnlinePolicy {
 public:
  std::string name() const override { return "nonexpiring"; }
  Decision decide(const StepView& v) override {
    const Packet* best = nullptr;
    for (const Packet& p : v.pending)
      if (p.deadline > v.slot && (!best || heavier(p, *best))) best = &p;
    return choose(best ? std::optional(best->id) : greedy_step(v.pending), StepKind::canned);
  }
};

/// make_policy plus the two canned game strategies.
inline std::unique_ptr<OnlinePolicy> make_game_policy(std::string_view spec) {
  if (spec == "expiring") return std::make_unique<ExpiringFirstPolicy>();
  if (spec == "nonexpiring") return std::make_unique<NonExpiringFirstPolicy>();
  return make_policy(spec);
}

// ---------------------------------------------------------------------------
// Random s-bounded instances

enum class WeightDist { uniform, log_uniform, phi_levels };

inline WeightDist parse_weight_dist(std::string_view s) {
  if (s == "uniform") return WeightDist::uniform;
  if (s == "log-uniform" || s == "loguniform") return WeightDist::log_uniform;
  if (s == "phi-levels" || s == "levels") return WeightDist::phi_levels;
  throw Error("unknown weight distribution '" + std::string(s) + "'");
}

inline const char* to_string(WeightDist d) {
  switch (d) {
    case WeightDist::uniform: return "uniform";
    case WeightDist::log_uniform: return "log-uniform";
    case WeightDist::phi_levels: return "phi-levels";
  }
  return "uniform";
}

/// `count` packets with release uniform in [0, horizon) and window length
/// uniform in [1, s]. Weights are drawn from `dist` and then perturbed to be
/// pairwise distinct. Deterministic in `seed`.
inline Instance gen_random_sbounded(std::uint64_t seed, int count, int s, int horizon,
                                    WeightDist dist = WeightDist::uniform) {
  if (s < 1) throw Error("s must be >= 1");
  if (count < 0) throw Error("count must be >= 0");
  if (horizon < 1) throw Error("horizon must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Slot> rel(0, horizon - 1);
  std::uniform_int_distribution<Slot> slack(0, s - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> level(-3, 3);
  std::vector<Packet> ps;
  ps.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Packet p;
    p.id = static_cast<PacketId>(i);
    p.release = rel(rng);
    p.deadline = p.release + slack(rng);
    switch (dist) {
      case WeightDist::uniform: p.weight = 0.05 + 0.95 * unit(rng); break;
      case WeightDist::log_uniform: p.weight = std::exp(unit(rng) * std::log(100.0)); break;
      case WeightDist::phi_levels: p.weight = std::pow(kPhi, level(rng)); break;
    }
    ps.push_back(p);
  }
  Instance raw(std::move(ps), s);
  Instance out = perturb(raw);
  if (!out.distinct_weights()) throw Error("internal: perturbation left equal weights");
  return out;
}

}  // namespace pktsched
