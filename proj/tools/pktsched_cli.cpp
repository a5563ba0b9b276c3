// pktsched: command-line front end.
//
// Exit codes: 0 success, 1 bound or audit violation, 2 usage or input error.

#include <fstream>
#include <iostream>
#include <sstream>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "pktsched/pktsched.hpp"

using namespace pktsched;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct Common {
  bool json = false;
  std::uint64_t seed = 1;
};

// Where an instance comes from: a file, or the seeded generator.
struct Source {
  std::string file;
  int s = 4;
  int count = 10;
  int horizon = 10;
  std::string dist = "uniform";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_flag("--json", c.json, "Machine-readable JSON on stdout");
  cmd->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
}

void add_generator(CLI::App* cmd, Source& src) {
  cmd->add_option("--s", src.s, "Window bound s")->check(CLI::Range(1, 1000))->capture_default_str();
  cmd->add_option("--count", src.count, "Number of packets")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--horizon", src.horizon, "Release slots 0..horizon-1")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--dist", src.dist, "uniform | log-uniform | phi-levels")->capture_default_str();
}

Instance load(const Source& src, std::uint64_t seed) {
  if (!src.file.empty()) return read_instance(src.file);
  return gen_random_sbounded(seed, src.count, src.s, src.horizon, parse_weight_dist(src.dist));
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void emit(const Json& j, const std::string& path) {
  if (path.empty() || path == "-") std::cout << j.dump(2) << '\n';
  else write_json_file(path, j);
}

int fail_if(bool violated) { return violated ? kViolation : kOk; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded-delay packet scheduling: simulation, offline optimum, lower-bound game and charge audits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pktsched 1.0.0");

  // gen
  Common gen_c;
  Source gen_src;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Write a seeded random s-bounded instance");
  add_common(gen, gen_c);
  add_generator(gen, gen_src);
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  // opt
  Common opt_c;
  Source opt_src;
  bool opt_oracle = false;
  auto* opt = app.add_subcommand("opt", "Print the offline optimum as JSON");
  add_common(opt, opt_c);
  add_generator(opt, opt_src);
  opt->add_option("--instance", opt_src.file, "Instance JSON (otherwise generated)")->check(CLI::ExistingFile);
  opt->add_flag("--oracle", opt_oracle, "Use the exhaustive oracle (<= 16 packets, <= 16 slots)");

  // simulate
  Common sim_c;
  Source sim_src;
  std::string sim_alg, sim_trace;
  int sim_lookahead = 0;
  auto* sim = app.add_subcommand("simulate", "Run an online algorithm and compare with the optimum");
  add_common(sim, sim_c);
  add_generator(sim, sim_src);
  sim->add_option("--alg", sim_alg, "greedy | toggleh | lcalpha | edf:ALPHA")->required();
  sim->add_option("--lookahead", sim_lookahead, "0 or 1")->check(CLI::IsMember({0, 1}))->capture_default_str();
  sim->add_option("--instance", sim_src.file, "Instance JSON (otherwise generated)")->check(CLI::ExistingFile);
  sim->add_option("--trace", sim_trace, "Write the step trace here");

  // lowerbound
  Common lb_c;
  std::string lb_alg, lb_report;
  int lb_n = 50, lb_lookahead = 1;
  double lb_delta = 1e-3;
  auto* lb = app.add_subcommand("lowerbound", "Play the adaptive lower-bound game against an algorithm");
  add_common(lb, lb_c);
  lb->add_option("--alg", lb_alg, "Any simulate algorithm, or expiring | nonexpiring")->required();
  lb->add_option("--n", lb_n, "Number of phases")->check(CLI::PositiveNumber)->capture_default_str();
  lb->add_option("--delta", lb_delta, "Weight perturbation delta > 0")->capture_default_str();
  lb->add_option("--lookahead", lb_lookahead, "0 or 1")->check(CLI::IsMember({0, 1}))->capture_default_str();
  lb->add_option("--report", lb_report, "Write the full JSON report here");

  // audit
  Common au_c;
  std::string au_alg, au_instance, au_report;
  std::size_t au_fuzz = 0;
  int au_s = 0;
  auto* au = app.add_subcommand("audit", "Replay the charging scheme of toggleh or lcalpha");
  add_common(au, au_c);
  au->add_option("--alg", au_alg, "toggleh | lcalpha")->required()->check(CLI::IsMember({"toggleh", "lcalpha"}));
  auto* au_inst_opt = au->add_option("--instance", au_instance, "Instance JSON")->check(CLI::ExistingFile);
  auto* au_fuzz_opt = au->add_option("--seed-fuzz", au_fuzz, "Audit N seeded random instances instead");
  au_inst_opt->excludes(au_fuzz_opt);
  au->add_option("--s", au_s, "Window bound for --seed-fuzz (default 4 for toggleh, 2 for lcalpha)");
  au->add_option("--report", au_report, "Write the JSON report here");

  // bench
  Common be_c;
  std::string be_alg, be_csv, be_report;
  std::size_t be_count = 1000;
  int be_s = 4, be_lookahead = 0;
  FuzzSpec be_spec;
  auto* be = app.add_subcommand("bench", "Competitive-ratio fuzz campaign against the offline optimum");
  add_common(be, be_c);
  be->add_option("--alg", be_alg, "greedy | toggleh | lcalpha | edf:ALPHA")->required();
  be->add_option("--s", be_s, "Window bound s")->check(CLI::Range(1, 1000))->capture_default_str();
  be->add_option("--count", be_count, "Number of instances")->capture_default_str();
  be->add_option("--lookahead", be_lookahead, "0 or 1")->check(CLI::IsMember({0, 1}))->capture_default_str();
  be->add_option("--max-packets", be_spec.max_packets, "Packets per instance, at most")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  be->add_option("--max-horizon", be_spec.max_horizon, "Release horizon, at most")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  be->add_option("--csv", be_csv, "Per-instance CSV (default stdout unless --json)");
  be->add_option("--report", be_report, "Write the JSON aggregate here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) {
      emit(to_json(load(gen_src, gen_c.seed)), gen_out);
      return kOk;
    }

    if (*opt) {
      const Instance inst = load(opt_src, opt_c.seed);
      emit(to_json(opt_oracle ? brute_force_optimal(inst) : optimal_schedule(inst)), "");
      return kOk;
    }

    if (*sim) {
      const Instance inst = load(sim_src, sim_c.seed);
      auto policy = make_policy(sim_alg);
      const Trace tr = run(*policy, inst, sim_lookahead);
      if (!sim_trace.empty()) write_json_file(sim_trace, to_json(tr));
      const double o = optimal_schedule(inst).weight, a = tr.weight(), r = ratio_of(o, a);
      const auto bound = known_bound(sim_alg, static_cast<int>(inst.max_window()), sim_lookahead);
      const bool violated = bound && r > *bound + 1e-9;
      if (sim_c.json) {
        Json j;
        j["alg"] = policy->name();
        j["lookahead"] = sim_lookahead;
        j["alg_weight"] = a;
        j["opt_weight"] = o;
        j["ratio"] = r;
        j["bound"] = detail::opt_json(bound);
        j["violated"] = violated;
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << policy->name() << ": alg " << num(a) << "  opt " << num(o) << "  ratio " << num(r);
        if (bound) std::cout << "  (bound " << num(*bound) << (violated ? ", VIOLATED" : "") << ")";
        std::cout << '\n';
        for (const StepRecord& s : tr.steps) {
          std::cout << "  t=" << s.slot << "  " << to_string(s.kind) << "  ";
          if (!s.scheduled) std::cout << "idle";
          else if (tr.packet(*s.scheduled).synthetic) std::cout << "-";
          else std::cout << describe(tr.packet(*s.scheduled));
          std::cout << '\n';
        }
      }
      return fail_if(violated);
    }

    if (*lb) {
      const LbParams params = lb_params(lb_n, lb_delta);
      auto policy = make_game_policy(lb_alg);
      const AdversaryOutcome out = run_lb_adversary(*policy, params, lb_lookahead);
      const Json report = to_json(out, params);
      if (!lb_report.empty()) write_json_file(lb_report, report);
      if (lb_c.json) {
        std::cout << report.dump(2) << '\n';
      } else {
        std::cout << policy->name() << ": k=" << out.k << (out.stopped_early ? " (stopped)" : " (all phases)")
                  << "  alg " << num(out.alg_weight) << "  opt " << num(out.opt_weight) << "  ratio "
                  << num(out.ratio) << "  formula " << num(report["checks"]["formula_ratio"].get<double>()) << '\n';
      }
      return kOk;
    }

    if (*au) {
      if (au_instance.empty() && au_fuzz == 0) throw CLI::RequiredError("--instance or --seed-fuzz");
      Json report;
      bool pass = false;
      if (!au_instance.empty()) {
        const AuditReport rep = audit_instance(au_alg, read_instance(au_instance));
        report = to_json(rep);
        pass = rep.pass;
      } else {
        FuzzSpec spec;
        spec.seed = au_c.seed;
        spec.s = au_s > 0 ? au_s : (au_alg == "toggleh" ? 4 : 2);
        const AuditCampaign c = run_audit_campaign(au_alg, spec, au_fuzz);
        report = to_json(c);
        report["alg"] = au_alg;
        report["s"] = spec.s;
        report["seed"] = spec.seed;
        pass = c.failed == 0;
      }
      if (!au_report.empty()) write_json_file(au_report, report);
      if (au_c.json) std::cout << report.dump(2) << '\n';
      else std::cout << au_alg << " audit: " << (pass ? "pass" : "FAIL") << '\n';
      return fail_if(!pass);
    }

    if (*be) {
      be_spec.seed = be_c.seed;
      be_spec.s = be_s;
      const RatioReport rep = run_bench(be_alg, be_spec, be_count, be_lookahead);
      const Json agg = to_json(rep);
      if (!be_report.empty()) write_json_file(be_report, agg);
      const bool csv_to_stdout = be_csv.empty() && !be_c.json;
      if (!be_csv.empty() || csv_to_stdout) {
        std::ofstream file;
        if (!csv_to_stdout) {
          file.open(be_csv);
          if (!file) throw Error("cannot write '" + be_csv + "'");
        }
        std::ostream& os = csv_to_stdout ? std::cout : file;
        os.precision(17);
        os << "instance_id,alg,opt,ratio\n";
        for (const RatioRow& r : rep.rows) os << r.instance_id << ',' << r.alg << ',' << r.opt << ',' << r.ratio << '\n';
      }
      if (be_c.json) std::cout << agg.dump(2) << '\n';
      return fail_if(rep.exceeding > 0);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
