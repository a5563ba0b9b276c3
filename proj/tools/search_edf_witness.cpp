// Looks for a small 4-bounded instance on which EDF_phi collects less than
// OPT / phi. Random restarts followed by hill climbing on the weights and
// windows; the best instance found is written as JSON.
//
//   search_edf_witness [--seed N] [--iters N] [--out FILE]

#include <cstdlib>
#include <iostream>
#include <random>
#include <string>

#include "pktsched/pktsched.hpp"

using namespace pktsched;

namespace {

double edf_ratio(const Instance& inst) {
  EdfPolicy edf(kPhi);
  const double alg = run(edf, inst, 0).weight();
  const double opt = optimal_schedule(inst).weight;
  return alg > 0 ? opt / alg : 1.0;
}

std::vector<Packet> random_packets(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(3, 8), rel(1, 4), win(1, 4);
  std::uniform_real_distribution<double> w(0.2, 3.0);
  std::vector<Packet> ps;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const Slot r = rel(rng);
    ps.push_back({static_cast<PacketId>(i), r, r + win(rng) - 1, w(rng), false});
  }
  return ps;
}

void mutate(std::vector<Packet>& ps, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, ps.size() - 1);
  std::uniform_int_distribution<int> what(0, 3), win(1, 4), rel(1, 4);
  std::normal_distribution<double> nudge(0.0, 0.05);
  Packet& p = ps[pick(rng)];
  switch (what(rng)) {
    case 0:
    case 1: p.weight = std::max(0.05, p.weight * (1.0 + nudge(rng))); break;
    case 2: p.deadline = p.release + win(rng) - 1; break;
    default: {
      const Slot len = p.deadline - p.release;
      p.release = rel(rng);
      p.deadline = p.release + len;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 1;
  long iters = 200000;
  std::string out;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--seed") seed = std::strtoull(argv[i + 1], nullptr, 10);
    else if (flag == "--iters") iters = std::strtol(argv[i + 1], nullptr, 10);
    else if (flag == "--out") out = argv[i + 1];
    else {
      std::cerr << "unknown flag " << flag << '\n';
      return 2;
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<Packet> best;
  double best_ratio = 0.0;
  for (long it = 0; it < iters; ++it) {
    std::vector<Packet> cur = random_packets(rng);
    double cur_ratio = edf_ratio(Instance(cur, 4));
    for (int step = 0; step < 200; ++step) {
      std::vector<Packet> next = cur;
      mutate(next, rng);
      const double r = edf_ratio(Instance(next, 4));
      if (r >= cur_ratio) {
        cur = std::move(next);
        cur_ratio = r;
      }
    }
    if (cur_ratio > best_ratio) {
      best = cur;
      best_ratio = cur_ratio;
      std::cerr.precision(17);
      std::cerr << "iter " << it << " ratio " << best_ratio << '\n';
    }
    if (best_ratio > kPhi + 1e-3) break;
  }

  Json j = to_json(Instance(best, 4));
  j["edf_phi_ratio"] = best_ratio;
  if (out.empty()) std::cout << j.dump(2) << '\n';
  else write_json_file(out, j);
  return best_ratio > kPhi ? 0 : 1;
}
