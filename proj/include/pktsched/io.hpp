#pragma once

// JSON encodings for instances, schedules, traces and reports.
//
// Instance:  {"s_bound": 4, "packets": [{"id": 0, "r": 1, "d": 1, "w": 0.9}, ...]}
// Schedule:  {"slots": {"1": 0, "2": 3}}
//
// Doubles are written in shortest round-trip form, so a decimal literal read
// from an instance file is written back unchanged.

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pktsched/adversary.hpp"
#include "pktsched/audit.hpp"
#include "pktsched/bench.hpp"
#include "pktsched/core.hpp"
#include "pktsched/engine.hpp"
#include "pktsched/offline.hpp"
#include "pktsched/policies.hpp"

namespace pktsched {

using Json = nlohmann::ordered_json;

namespace detail {

template <class T>
Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> opt_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

inline Json packet_json(const Packet& p) {
  Json j;
  j["id"] = p.id;
  j["r"] = p.release;
  j["d"] = p.deadline;
  j["w"] = p.weight;
  if (p.synthetic) j["synthetic"] = true;
  return j;
}

inline Packet packet_from(const Json& j) {
  Packet p;
  p.id = j.at("id").get<PacketId>();
  p.release = j.at("r").get<Slot>();
  p.deadline = j.at("d").get<Slot>();
  p.weight = j.at("w").get<double>();
  p.synthetic = j.value("synthetic", false);
  return p;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instance / schedule

inline Json to_json(const Instance& inst) {
  Json j;
  if (inst.s_bound()) j["s_bound"] = *inst.s_bound();
  if (inst.distinct_weights()) j["distinct_weights"] = true;
  j["packets"] = Json::array();
  for (const Packet& p : inst.packets()) j["packets"].push_back(detail::packet_json(p));
  return j;
}

inline Instance instance_from_json(const Json& j) {
  return detail::guarded("instance", [&] {
    std::vector<Packet> ps;
    for (const Json& pj : j.at("packets")) {
      Packet p = detail::packet_from(pj);
      if (p.synthetic) throw Error("instance files cannot contain synthetic packets");
      ps.push_back(p);
    }
    std::optional<int> s;
    if (j.contains("s_bound") && !j["s_bound"].is_null()) s = j["s_bound"].get<int>();
    return Instance(std::move(ps), s, j.value("distinct_weights", false));
  });
}

inline Json to_json(const Schedule& sch) {
  Json slots = Json::object();
  for (const Assignment& a : sch.assignments()) slots[std::to_string(a.slot)] = a.packet;
  return Json{{"slots", slots}};
}

inline Schedule schedule_from_json(const Json& j) {
  return detail::guarded("schedule", [&] {
    Schedule s;
    for (const auto& [key, val] : j.at("slots").items()) {
      std::size_t used = 0;
      Slot t = 0;
      try {
        t = std::stoll(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != key.size()) throw Error("schedule slot key '" + key + "' is not an integer");
      s.assign(t, val.get<PacketId>());
    }
    return s;
  });
}

inline Json to_json(const OptResult& r) {
  Json j;
  j["weight"] = r.weight;
  j["canonical"] = r.canonical;
  j["schedule"] = to_json(r.schedule);
  return j;
}

// ---------------------------------------------------------------------------
// Traces

inline Json to_json(const Plan& plan) {
  Json a = Json::array();
  for (std::size_t i = 0; i < 3; ++i) a.push_back(detail::opt_json(plan.id(i)));
  return a;
}

inline Json to_json(const Trace& tr) {
  Json j;
  j["policy"] = tr.policy;
  j["lookahead"] = tr.lookahead;
  j["weight"] = tr.weight();
  j["packets"] = Json::array();
  for (const Packet& p : tr.packets) j["packets"].push_back(detail::packet_json(p));
  j["steps"] = Json::array();
  for (const StepRecord& r : tr.steps) {
    Json s;
    s["slot"] = r.slot;
    s["scheduled"] = detail::opt_json(r.scheduled);
    s["kind"] = to_string(r.kind);
    s["heaviest"] = detail::opt_json(r.heaviest);
    s["pending"] = r.pending;
    if (r.mark_before || r.mark_after) {
      s["mark_before"] = detail::opt_json(r.mark_before);
      s["mark_after"] = detail::opt_json(r.mark_after);
    }
    if (r.plan) s["plan"] = to_json(*r.plan);
    j["steps"].push_back(std::move(s));
  }
  return j;
}

inline StepKind step_kind_from(const std::string& s) {
  for (StepKind k : {StepKind::none, StepKind::greedy, StepKind::edf, StepKind::f_step, StepKind::e_step,
                     StepKind::plan_first, StepKind::plan_second, StepKind::canned})
    if (s == to_string(k)) return k;
  throw Error("unknown step kind '" + s + "'");
}

inline Trace trace_from_json(const Json& j) {
  return detail::guarded("trace", [&] {
    Trace tr;
    tr.policy = j.at("policy").get<std::string>();
    tr.lookahead = j.at("lookahead").get<int>();
    for (const Json& pj : j.at("packets")) tr.packets.push_back(detail::packet_from(pj));
    tr.index();
    for (const Json& s : j.at("steps")) {
      StepRecord r;
      r.slot = s.at("slot").get<Slot>();
      r.scheduled = detail::opt_from<PacketId>(s.at("scheduled"));
      r.kind = step_kind_from(s.at("kind").get<std::string>());
      r.heaviest = detail::opt_from<PacketId>(s.at("heaviest"));
      r.pending = s.at("pending").get<std::vector<PacketId>>();
      if (s.contains("mark_before")) r.mark_before = detail::opt_from<PacketId>(s["mark_before"]);
      if (s.contains("mark_after")) r.mark_after = detail::opt_from<PacketId>(s["mark_after"]);
      if (s.contains("plan")) {
        Plan plan;
        for (std::size_t i = 0; i < 3; ++i)
          if (auto id = detail::opt_from<PacketId>(s["plan"].at(i))) plan.slot[i] = tr.packet(*id);
        r.plan = plan;
      }
      tr.steps.push_back(std::move(r));
    }
    tr.index();
    return tr;
  });
}

// ---------------------------------------------------------------------------
// Reports

inline Json constants_json() {
  const LcConstants c = lc_constants();
  const LbParams lb = lb_params();
  Json j;
  j["phi"] = kPhi;
  j["lc_alpha"] = c.alpha;
  j["lc_delta"] = c.delta;
  j["lc_ratio"] = c.ratio;
  j["lb_ratio"] = lb.ratio;
  return j;
}

inline Json to_json(const AuditReport& r) {
  Json j;
  j["scheme"] = r.scheme;
  j["bound"] = r.bound;
  j["pass"] = r.pass;
  j["witness"] = detail::opt_json(r.witness);
  j["failures"] = r.failures;
  j["conservation_residual"] = r.conservation_residual;
  j["total_residual"] = r.total_residual;
  j["slots"] = Json::array();
  for (const SlotTotal& s : r.slots) j["slots"].push_back({{"slot", s.slot}, {"charge", s.charge}, {"weight", s.weight}});
  j["pairs"] = Json::array();
  for (const PairTotal& p : r.pairs)
    j["pairs"].push_back({{"first", p.first}, {"second", p.second}, {"charge", p.charge}, {"weight", p.weight}});
  return j;
}

inline Json to_json(const ChargeLedger& l) {
  Json j;
  j["entries"] = Json::array();
  for (const ChargeEntry& e : l.entries) {
    Json ej;
    ej["from_opt_slot"] = e.from_opt_slot;
    ej["to_alg_slot"] = e.to_alg_slot;
    if (e.pair_slot) ej["pair_slot"] = *e.pair_slot;
    ej["packet"] = e.packet;
    ej["amount"] = e.amount;
    ej["rule"] = to_string(e.rule);
    j["entries"].push_back(std::move(ej));
  }
  j["pairs"] = Json::array();
  for (const auto& [a, b] : l.pairs) j["pairs"].push_back({a, b});
  j["chaining"] = l.chaining;
  return j;
}

inline Json to_json(const AdversaryOutcome& o, const LbParams& p) {
  const auto w = lb_weights(p);
  Json j;
  j["policy"] = o.trace.policy;
  j["n"] = p.n;
  j["delta"] = p.delta;
  j["k"] = o.k;
  j["stopped_early"] = o.stopped_early;
  j["alg_weight"] = o.alg_weight;
  j["opt_weight"] = o.opt_weight;
  j["ratio"] = o.ratio;
  Json checks;
  if (o.stopped_early) {
    checks["formula"] = "case1";
    checks["formula_ratio"] = ratio_case1(o.k, w);
    checks["formula_alg_weight"] = case1_alg_weight(o.k, w);
    checks["formula_opt_weight"] = case1_opt_weight(o.k, w);
  } else {
    checks["formula"] = "case2";
    checks["formula_ratio"] = ratio_case2(p.n, w);
    checks["formula_alg_weight"] = case2_alg_weight(p.n, w);
    checks["formula_opt_weight"] = case2_opt_weight(p.n, w);
  }
  checks["limit_ratio"] = p.ratio;
  j["checks"] = checks;
  j["transcript"] = Json::array();
  for (const PhaseChoice& c : o.transcript)
    j["transcript"].push_back(
        {{"phase", c.phase}, {"slot", c.slot}, {"chosen", detail::opt_json(c.chosen)}, {"expiring", c.expiring}});
  j["constants"] = constants_json();
  return j;
}

/// Aggregate only; the per-instance rows go to CSV.
inline Json to_json(const RatioReport& r) {
  Json j;
  j["alg"] = r.alg;
  j["s"] = r.s;
  j["lookahead"] = r.lookahead;
  j["seed"] = r.seed;
  j["count"] = r.rows.size();
  j["bound"] = detail::opt_json(r.bound);
  j["max_ratio"] = r.max_ratio;
  j["mean_ratio"] = r.mean_ratio;
  j["exceeding"] = r.exceeding;
  j["constants"] = constants_json();
  return j;
}

inline Json to_json(const AuditCampaign& c) {
  Json j;
  j["count"] = c.count;
  j["failed"] = c.failed;
  j["pass"] = c.failed == 0;
  j["first_failure"] = detail::opt_json(c.first_failure);
  j["max_conservation_residual"] = c.max_conservation_residual;
  if (c.first_failure_report) j["first_failure_report"] = to_json(*c.first_failure_report);
  return j;
}

// ---------------------------------------------------------------------------
// Files

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error("cannot parse '" + path + "': " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline Instance read_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

}  // namespace pktsched
