// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Sizes, tolerances and time limits are fixed here.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "pktsched/pktsched.hpp"

using namespace pktsched;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string data(const char* name) { return std::string(PKTSCHED_DATA_DIR) + "/" + name; }

constexpr std::size_t kFuzz = 10000;

Outcome ratio_campaign(const std::string& alg, int s, int lookahead, double bound, std::uint64_t seed) {
  FuzzSpec spec;
  spec.seed = seed;
  spec.s = s;
  spec.max_packets = 30;
  const RatioReport rep = run_bench(alg, spec, kFuzz, lookahead);
  std::size_t over = 0;
  for (const RatioRow& r : rep.rows)
    if (r.ratio > bound + 1e-9) ++over;
  return {over == 0, alg + " s=" + std::to_string(s) + ": max ratio " + fmt(rep.max_ratio) + " vs bound " +
                         fmt(bound) + " over " + std::to_string(kFuzz) + " instances"};
}

Outcome audit_campaign(const std::string& alg, int s, std::uint64_t seed) {
  FuzzSpec spec;
  spec.seed = seed;
  spec.s = s;
  spec.max_packets = 30;
  const AuditCampaign c = run_audit_campaign(alg, spec, kFuzz);
  std::string detail = alg + ": " + std::to_string(c.count - c.failed) + "/" + std::to_string(c.count) +
                       " audits pass, max conservation residual " + fmt(c.max_conservation_residual);
  if (c.first_failure_report && !c.first_failure_report->failures.empty())
    detail += "; first failure at instance " + std::to_string(*c.first_failure) + ": " +
              c.first_failure_report->failures.front();
  return {c.failed == 0 && c.max_conservation_residual < 1e-9, detail};
}

// Criterion 1.
Outcome oracle_equivalence() {
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    std::mt19937_64 rng(detail::splitmix64(seed + 1000));
    const int s = 1 + static_cast<int>(seed % 4);
    const int count = 1 + static_cast<int>(rng() % 10);
    const int horizon = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(11 - s));
    const Instance inst = gen_random_sbounded(rng(), count, s, horizon, static_cast<WeightDist>(seed % 3));
    if (optimal_schedule(inst).weight != brute_force_optimal(inst).weight) ++mismatches;
  }
  return {mismatches == 0, std::to_string(500 - mismatches) + "/500 instances with identical optimum weight"};
}

// Criterion 6.
Outcome constants() {
  const LcConstants c = lc_constants();
  const LcConstantChecks k = check_lc_constants(c);
  const double worst = std::max({std::abs(k.forward_residual), std::abs(k.chain_residual), std::abs(k.split_residual),
                                 std::abs(k.two_minus_r_minus_3d)});
  const bool strict = k.two_minus_r_minus_2d_positive && k.forward_margin_positive && k.one_minus_r_over_2a_positive &&
                      k.chain_begin_below_ratio && k.singleton_forward_below_ratio;
  return {worst < 1e-12 && strict, "alpha " + fmt(c.alpha) + ", delta " + fmt(c.delta) + ", R " + fmt(c.ratio) +
                                       ", max residual " + fmt(worst) + ", strict inequalities " +
                                       (strict ? "hold" : "FAIL")};
}

// Criterion 7.
Outcome lower_bound() {
  const double target = (1.0 + std::sqrt(17.0)) / 4.0;
  const LbParams p = lb_params(200, 1e-3);
  const auto w = lb_weights(p);
  double worst_rk = 0.0;
  for (int k = 1; k < p.n; ++k) worst_rk = std::max(worst_rk, std::abs(ratio_case1(k, w) - target));
  const double rhat = ratio_case2(p.n, w);

  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  ExpiringFirstPolicy expiring;
  NonExpiringFirstPolicy nonexpiring;
  const AdversaryOutcome all = run_lb_adversary(expiring, p);
  const AdversaryOutcome none = run_lb_adversary(nonexpiring, p);
  const double canned_err = std::max(
      {rel(all.ratio, ratio_case2(p.n, w)), rel(all.alg_weight, case2_alg_weight(p.n, w)),
       rel(all.opt_weight, case2_opt_weight(p.n, w)), rel(none.ratio, ratio_case1(none.k, w)),
       rel(none.alg_weight, case1_alg_weight(none.k, w)), rel(none.opt_weight, case1_opt_weight(none.k, w))});

  LcAlphaPolicy lc;
  const AdversaryOutcome vs_lc = run_lb_adversary(lc, lb_params(50, 1e-3));

  const bool ok = worst_rk < 1e-8 && std::abs(rhat - target) < 1e-3 && canned_err < 1e-9 && all.k == p.n &&
                  none.k == 0 && vs_lc.ratio >= 1.27;
  return {ok, "max |R_k - R| " + fmt(worst_rk) + ", |R^_200 - R| " + fmt(std::abs(rhat - target)) +
                  ", canned vs formula " + fmt(canned_err) + ", LC_alpha game ratio " + fmt(vs_lc.ratio) +
                  " (k=" + std::to_string(vs_lc.k) + ")"};
}

// Criterion 8.
Outcome baselines() {
  const Outcome a = ratio_campaign("edf:phi", 3, 0, kPhi, 801);
  const Outcome b = ratio_campaign("edf:sqrt3", 4, 0, std::sqrt(3.0), 802);
  const Outcome c = ratio_campaign("greedy", 2, 0, 2.0, 803);
  return {a.pass && b.pass && c.pass, a.detail + "; " + b.detail + "; " + c.detail};
}

// Criterion 9.
Outcome separation_witness() {
  const Instance inst = read_instance(data("edf_phi_4bounded_witness.json"));
  EdfPolicy edf(kPhi);
  const Trace tr = run(edf, inst, 0);
  const OptResult opt = optimal_schedule(inst);
  const double ratio = opt.weight / tr.weight();
  Schedule expected;
  expected.assign(1, 1);
  expected.assign(2, 0);
  const bool ok = inst.is_s_bounded(4) && tr.schedule() == expected && std::abs(tr.weight() - 4.98) < 1e-12 &&
                  std::abs(opt.weight - 8.49) < 1e-12 && ratio > kPhi;
  return {ok, "EDF_phi collects " + fmt(tr.weight()) + ", optimum " + fmt(opt.weight) + ", ratio " + fmt(ratio) +
                  " > phi"};
}

// Criterion 10.
Outcome golden_trace() {
  const Instance inst = read_instance(data("paper_s3.json"));
  constexpr PacketId K = 1, F = 2, H = 3;
  ToggleHPolicy toggle;
  const Trace t = run(toggle, inst, 0);
  const bool toggle_ok = t.steps.size() >= 3 && t.steps[0].kind == StepKind::f_step && t.steps[0].scheduled == F &&
                         t.steps[1].kind == StepKind::e_step && t.steps[1].scheduled == K &&
                         t.steps[2].kind == StepKind::f_step && t.steps[2].scheduled == H;
  EdfPolicy edf(kPhi);
  Schedule fh;
  fh.assign(1, F);
  fh.assign(2, H);
  const bool edf_ok = run(edf, inst, 0).schedule() == fh;
  return {toggle_ok && edf_ok, std::string("ToggleH f-step(f), e-step(k), f-step(h): ") + (toggle_ok ? "yes" : "NO") +
                                   "; EDF_phi schedule (f, h): " + (edf_ok ? "yes" : "NO")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_seconds;  // 0 means no limit
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"1 oracle equivalence", 10, oracle_equivalence},
      {"2 ToggleH ratio <= phi", 60, [] { return ratio_campaign("toggleh", 4, 0, kPhi, 201); }},
      {"3 ToggleH charge audit", 0, [] { return audit_campaign("toggleh", 4, 201); }},
      {"4 LC_alpha ratio <= R", 60, [] { return ratio_campaign("lcalpha", 2, 1, lc_constants().ratio, 401); }},
      {"5 LC_alpha charge audit", 0, [] { return audit_campaign("lcalpha", 2, 401); }},
      {"6 LC_alpha constants", 0, constants},
      {"7 lower-bound game", 10, lower_bound},
      {"8 baselines", 0, baselines},
      {"9 EDF_phi separation witness", 0, separation_witness},
      {"10 worked-example golden trace", 0, golden_trace},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += "; took longer than " + fmt(c.limit_seconds) + " s";
    }
    std::ostringstream time;
    time.precision(3);
    time << std::fixed << secs;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.name << "  [" << time.str() << " s]  " << o.detail
              << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (failed ? "FAILED: " : "ALL PASS: ") << criteria.size() - static_cast<std::size_t>(failed) << "/"
            << criteria.size() << " criteria" << std::endl;
  return failed ? 1 : 0;
}
