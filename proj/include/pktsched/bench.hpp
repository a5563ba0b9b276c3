#pragma once

// Seeded fuzz campaigns: instance i of a campaign depends only on (seed, i),
// so results are identical however the work is split across threads.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "pktsched/adversary.hpp"
#include "pktsched/audit.hpp"
#include "pktsched/offline.hpp"
#include "pktsched/policies.hpp"

namespace pktsched {

struct FuzzSpec {
  std::uint64_t seed = 1;
  int s = 4;
  int max_packets = 30;
  int max_horizon = 15;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Instance `index` of the campaign: 1..max_packets packets over a horizon of
/// 1..max_horizon slots, cycling through the weight distributions.
inline Instance fuzz_instance(const FuzzSpec& spec, std::size_t index) {
  const std::uint64_t key = detail::splitmix64(spec.seed ^ detail::splitmix64(index));
  std::mt19937_64 rng(key);
  std::uniform_int_distribution<int> count(1, spec.max_packets), horizon(1, spec.max_horizon);
  const int c = count(rng), h = horizon(rng);
  const auto dist = static_cast<WeightDist>(index % 3);
  return gen_random_sbounded(rng(), c, spec.s, h, dist);
}

/// Worker count: hardware concurrency, capped by PKTSCHED_THREADS when set.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PKTSCHED_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers. fn must only
/// write to per-index storage. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// The competitive ratio proved for `alg` on s-bounded inputs, if any.
inline std::optional<double> known_bound(const std::string& alg, int s, int lookahead) {
  if (alg == "greedy") return 2.0;
  if (alg == "toggleh" && s <= 4) return kPhi;
  if (alg == "lcalpha" && s <= 2 && lookahead == 1) return lc_constants().ratio;
  if (alg == "edf:phi" && s <= 3) return kPhi;
  if (alg == "edf:sqrt3" && s <= 4) return std::sqrt(3.0);
  return std::nullopt;
}

struct RatioRow {
  std::size_t instance_id = 0;
  double alg = 0.0;
  double opt = 0.0;
  double ratio = 1.0;
};

struct RatioReport {
  std::string alg;
  int s = 0;
  int lookahead = 0;
  std::uint64_t seed = 0;
  std::optional<double> bound;
  std::vector<RatioRow> rows;
  double max_ratio = 1.0;
  double mean_ratio = 1.0;
  std::size_t exceeding = 0;
};

/// OPT / ALG, with 0 / 0 read as 1.
inline double ratio_of(double opt, double alg) {
  if (alg > 0.0) return opt / alg;
  return opt > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

inline RatioReport run_bench(const std::string& alg, const FuzzSpec& spec, std::size_t count, int lookahead,
                             unsigned threads = worker_count()) {
  make_policy(alg);  // reject bad specs before spawning workers
  RatioReport rep;
  rep.alg = alg;
  rep.s = spec.s;
  rep.lookahead = lookahead;
  rep.seed = spec.seed;
  rep.bound = known_bound(alg, spec.s, lookahead);
  rep.rows.resize(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const Instance inst = fuzz_instance(spec, i);
    auto policy = make_policy(alg);
    const double a = run(*policy, inst, lookahead).weight();
    const double o = optimal_schedule(inst).weight;
    rep.rows[i] = {i, a, o, ratio_of(o, a)};
  });
  double sum = 0.0;
  for (const RatioRow& r : rep.rows) {
    rep.max_ratio = std::max(rep.max_ratio, r.ratio);
    sum += r.ratio;
    if (rep.bound && r.ratio > *rep.bound + 1e-9) ++rep.exceeding;
  }
  rep.mean_ratio = count ? sum / static_cast<double>(count) : 1.0;
  return rep;
}

/// Runs `alg` (toggleh or lcalpha) and its auditor on one instance.
inline AuditReport audit_instance(const std::string& alg, const Instance& inst) {
  const OptResult opt = optimal_schedule(inst);
  if (alg == "toggleh") {
    ToggleHPolicy policy;
    const Trace tr = run(policy, inst, 0);
    return verify_toggleh(toggleh_charges(tr, opt), tr);
  }
  if (alg == "lcalpha") {
    LcAlphaPolicy policy;
    const Trace tr = run(policy, inst, 1);
    return verify_lcalpha(lcalpha_charges(tr, opt), tr);
  }
  throw Error("no charging scheme for '" + alg + "'");
}

struct AuditCampaign {
  std::size_t count = 0;
  std::size_t failed = 0;
  std::optional<std::size_t> first_failure;
  std::optional<AuditReport> first_failure_report;
  double max_conservation_residual = 0.0;
};

inline AuditCampaign run_audit_campaign(const std::string& alg, const FuzzSpec& spec, std::size_t count,
                                        unsigned threads = worker_count()) {
  std::vector<AuditReport> reports(count);
  parallel_for(count, threads, [&](std::size_t i) { reports[i] = audit_instance(alg, fuzz_instance(spec, i)); });
  AuditCampaign out;
  out.count = count;
  for (std::size_t i = 0; i < count; ++i) {
    out.max_conservation_residual = std::max(out.max_conservation_residual, reports[i].conservation_residual);
    if (reports[i].pass) continue;
    if (!out.failed++) {
      out.first_failure = i;
      out.first_failure_report = reports[i];
    }
  }
  return out;
}

}  // namespace pktsched
