// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: mora_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mora/allocation.hpp"
#include "mora/analysis.hpp"
#include "mora/fixtures.hpp"
#include "mora/rng.hpp"
#include "mora/solvers.hpp"
#include "mora_cli/cli.hpp"
#include "oracles.hpp"

using namespace mora;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  double time_limit_s = 0.0;  // 0: none
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<std::size_t> users_of_op(const NetworkState& s, std::size_t o) {
  std::vector<std::size_t> mine;
  for (std::size_t u = 0; u < s.num_users(); ++u) {
    if (s.operator_index_of_user(u) == o) mine.push_back(u);
  }
  return mine;
}

double max_weight(const NetworkState& s) {
  double m = 0.0;
  for (double w : oracle::weights(s)) m = std::max(m, w);
  return m;
}

Outcome dominance() {
  std::mt19937_64 rng(101);
  std::size_t bad = 0, checked = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto s = oracle::random_state(rng, 10, 4, 3);
    // Any association will do; draw one uniformly over feasible stations.
    oracle::Stations x(s.num_users());
    for (std::size_t u = 0; u < s.num_users(); ++u) {
      std::vector<std::uint32_t> ok;
      for (std::uint32_t b = 0; b < s.num_stations(); ++b) {
        if (s.rate(u, StationId{b}) > 0.0) ok.push_back(b);
      }
      x[u] = ok[std::uniform_int_distribution<std::size_t>(0, ok.size() - 1)(rng)];
    }
    const auto fm = mora_allocation(s, oracle::to_association(x));
    const auto fs = ss_allocation(s, oracle::to_association(x));
    std::vector<double> rm(s.num_users()), rs(s.num_users());
    for (std::size_t u = 0; u < s.num_users(); ++u) {
      rm[u] = fm[u].fraction * s.rate(u, StationId{x[u]});
      rs[u] = fs[u].fraction * s.rate(u, StationId{x[u]});
    }
    // The library's allocations must agree with the oracle's, then dominate.
    const auto om = oracle::mora_rates(s, x), os = oracle::ss_rates(s, x);
    for (std::size_t u = 0; u < s.num_users(); ++u) {
      if (std::abs(rm[u] - om[u]) > 1e-12 * om[u] || std::abs(rs[u] - os[u]) > 1e-12 * os[u]) ++bad;
    }
    for (std::size_t o = 0; o < s.num_operators(); ++o) {
      if (s.user_count(o) == 0) continue;
      ++checked;
      if (oracle::operator_mean_log(s, rm, o) < oracle::operator_mean_log(s, rs, o) - 1e-12) ++bad;
    }
  }
  return {bad == 0, std::to_string(checked) + " operator checks, " + std::to_string(bad) + " violations", 10.0};
}

Outcome dg_bound() {
  std::mt19937_64 rng(202);
  std::size_t bad = 0, converged = 0;
  double worst = INFINITY;
  for (int rep = 0; rep < 300; ++rep) {
    const auto s = oracle::random_state(rng, 8, 3, 3);
    const auto r = distributed_greedy(s, Association{}, SolverParams{});
    if (!r.converged) continue;
    ++converged;
    const double gap = oracle::mora_utility(s, oracle::to_stations(r.final_association)) -
                       oracle::enumerate_optimum(s).utility;
    worst = std::min(worst, gap);
    if (gap < -1.0 - 1e-9) ++bad;
  }
  return {bad == 0, std::to_string(converged) + " converged, worst W - W_opt " + fmt("%.4f", worst) + ", " +
                        std::to_string(bad) + " violations",
          60.0};
}

Outcome glg_trace() {
  std::mt19937_64 rng(303);
  std::size_t bad = 0, moves = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const auto s = oracle::random_state(rng, 8, 3, 3);
    Association x0(s.num_users());  // first feasible station: a poor start
    for (std::size_t u = 0; u < s.num_users(); ++u) {
      for (std::uint32_t b = 0; b < s.num_stations(); ++b) {
        if (s.rate(u, StationId{b}) > 0.0) {
          x0.assign(u, StationId{b});
          break;
        }
      }
    }
    const auto r = greedy_largest_gain(s, x0, SolverParams{});
    const double opt = oracle::enumerate_optimum(s).utility;
    const auto& t = r.utility_trace;
    moves += r.gain_trace.size();
    bool ok = true;
    for (std::size_t i = 0; i < r.gain_trace.size(); ++i) {
      if (r.gain_trace[i] >= std::exp(1.0) && !(t[i + 1] > t[i])) ok = false;
    }
    bool entered = false;
    for (double w : t) {
      entered = entered || w >= opt - 2.0;
      if (entered && w < opt - (2.0 + max_weight(s)) - 1e-9) ok = false;
    }
    if (!ok) ++bad;
  }
  return {bad == 0, "300 traces, " + std::to_string(moves) + " moves, " + std::to_string(bad) + " violations", 60.0};
}

Outcome operator_bounds() {
  std::mt19937_64 rng(404);
  std::size_t bad = 0, instances = 0;
  double worst_dev = INFINITY, worst_ss = INFINITY;
  while (instances < 100) {
    const auto s = oracle::random_state(rng, 8, 3, 2, 0.15);
    bool small = true;
    for (std::size_t o = 0; o < s.num_operators(); ++o) small = small && s.user_count(o) <= 4;
    if (!small) continue;
    ++instances;
    const auto xs = oracle::enumerate_optimum(s).x;
    const auto r_star = oracle::mora_rates(s, xs);
    for (std::size_t o = 0; o < s.num_operators(); ++o) {
      if (s.user_count(o) == 0) continue;
      const double u_star = oracle::operator_mean_log(s, r_star, o);
      const auto mine = users_of_op(s, o);
      std::vector<std::uint32_t> d(mine.size(), 0);
      while (true) {
        auto x = xs;
        bool feasible = true;
        for (std::size_t i = 0; i < mine.size(); ++i) {
          x[mine[i]] = d[i];
          feasible = feasible && s.rate(mine[i], StationId{d[i]}) > 0.0;
        }
        if (feasible) {
          const double delta = u_star - oracle::operator_mean_log(s, oracle::mora_rates(s, x), o);
          worst_dev = std::min(worst_dev, delta);
          if (delta < -1.0 - 1e-9) ++bad;
        }
        std::size_t k = 0;
        while (k < d.size() && ++d[k] == s.num_stations()) d[k++] = 0;
        if (k == d.size()) break;
      }
      // Against the library's exact SS optimizer and the oracle's.
      const double ss = std::max(oracle::ss_operator_optimum(s, o),
                                 ss_optimize(s, s.operators()[o].id, SsMethod::exact).utility);
      worst_ss = std::min(worst_ss, u_star - ss);
      if (u_star - ss < -1.0 - 1e-9) ++bad;
    }
  }
  return {bad == 0, "worst deviation gain " + fmt("%.4f", -worst_dev) + ", worst U(MORA)-U(SS) " +
                        fmt("%.4f", worst_ss) + ", " + std::to_string(bad) + " violations",
          120.0};
}

Outcome three_dm() {
  std::mt19937_64 rng(505);
  const double R = 10.0;
  std::size_t bad = 0, with = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + rep % 3;
    const std::size_t m = std::min<std::size_t>(5, n + rep % 3);
    const auto family = random_three_dm_family(n, std::max(n, m), rng);
    const bool matching = oracle::has_matching(family);
    with += matching;
    const double w = brute_force_mora(build_3dm_instance(family, R)).utility;
    const double target = three_dm_matching_utility(n, family.triples.size(), R);
    if ((std::abs(w - target) <= 1e-9) != matching) ++bad;
  }
  return {bad == 0, "20 families, " + std::to_string(with) + " with a matching, " + std::to_string(bad) + " mismatches",
          30.0};
}

Outcome online_gap() {
  double worst = 0.0;
  for (std::size_t B : {2u, 4u, 8u}) {
    const LiveNetwork net = replay_online(online_worst_case_fixture(B));
    // Survivors are B equal users with rate 1 everywhere: optimum is one per station.
    const double opt = 0.0;
    worst = std::max(worst, std::abs((opt - net.utility()) - std::log(static_cast<double>(B))));
  }
  return {worst <= 1e-9, "max |gap - ln B| = " + fmt("%.2e", worst)};
}

ScenarioConfig desk(std::size_t rep) {
  ScenarioConfig c;
  c.rings = 1;
  c.user_density = 10.0;
  c.num_operators = 3;
  c.duration_s = 60.0;
  c.seed = replication_seed(1, rep);
  return c;
}

Outcome utility_gain_trend() {
  const std::vector<std::size_t> ms{0, 1, 2, 3, 4, 5, 6};
  std::vector<std::vector<double>> g(ms.size());
  for (std::size_t r = 0; r < 20; ++r) {
    const auto run = normalized_utility_gain(desk(r), ms);
    if (run.degenerate) continue;
    for (std::size_t i = 0; i < ms.size(); ++i) g[i].push_back(run.gain[i]);
  }
  std::ostringstream os;
  bool monotone = true;
  double prev = -INFINITY;
  os << "G_W:";
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const auto [mean, ci] = mean_ci95(g[i]);
    os << " " << fmt("%.4f", mean);
    monotone = monotone && mean >= prev;
    prev = mean;
  }
  const double g3 = mean_ci95(g[3]).first;
  if (!monotone) {
    os << "; paired steps:";
    for (std::size_t i = 1; i < ms.size(); ++i) {
      std::vector<double> d;
      for (std::size_t k = 0; k < g[i].size(); ++k) d.push_back(g[i][k] - g[i - 1][k]);
      const auto [mean, ci] = mean_ci95(d);
      if (mean < 0.0) os << " m" << ms[i - 1] << "->" << ms[i] << " " << fmt("%+.4f", mean) << "+-" << fmt("%.4f", ci);
    }
  }
  os << " (" << g[0].size() << " seeds)";
  return {monotone && g3 >= 0.9, os.str(), 600.0};
}

Outcome policy_ordering() {
  const std::vector<Policy> policies{Policy::sinr_ss, Policy::dg_ss, Policy::gllg, Policy::dg};
  std::vector<std::vector<double>> w(policies.size());
  for (std::size_t r = 0; r < 20; ++r) {
    const ScenarioConfig c = desk(r);
    const Layout layout = build_layout(c.rings, c.isd_m);
    const EventStream events = generate_events(c, layout);
    for (std::size_t p = 0; p < policies.size(); ++p) {
      w[p].push_back(run_scenario(c, layout, events, policies[p]).mean_utility);
    }
  }
  std::vector<double> mean;
  for (const auto& v : w) mean.push_back(mean_ci95(v).first);
  bool ok = mean[0] <= mean[1] && mean[1] <= mean[2] && mean[2] <= mean[3] + 0.02;

  std::size_t brute_bad = 0, snapshots = 0;
  for (std::size_t r = 0; r < 20; ++r) {
    ScenarioConfig c;
    c.rings = 0;
    c.num_operators = 2;
    c.user_density = 4.0 / 3.0;  // two users per operator
    c.mobility = Mobility::stationary;
    c.arrival_rate = 0.0;
    c.duration_s = 5.0;
    c.seed = replication_seed(2, r);
    const Layout layout = build_layout(0);
    const EventStream events = generate_events(c, layout);
    const auto dg = run_scenario(c, layout, events, Policy::dg);
    const auto bf = run_scenario(c, layout, events, Policy::brute);
    for (std::size_t k = 0; k < dg.snapshots.size(); ++k) {
      ++snapshots;
      if (dg.snapshots[k].utility > bf.snapshots[k].utility + 1e-9) ++brute_bad;
    }
  }
  ok = ok && brute_bad == 0;
  std::ostringstream os;
  os << "sinr_ss " << fmt("%.4f", mean[0]) << " dg_ss " << fmt("%.4f", mean[1]) << " gllg " << fmt("%.4f", mean[2])
     << " dg " << fmt("%.4f", mean[3]) << "; DG above brute force in " << brute_bad << "/" << snapshots
     << " snapshots";
  return {ok, os.str()};
}

Outcome operator_gains() {
  ExperimentOptions opt;
  const Table t = run_experiment("fig3", opt);
  std::size_t positive = 0, floor_bad = 0;
  double lo = INFINITY;
  for (const auto& row : t.rows) {
    const double g = std::get<double>(row[4]);
    positive += g > 0.0;
    floor_bad += g < -1.0;
    lo = std::min(lo, g);
  }
  const double frac = static_cast<double>(positive) / static_cast<double>(t.rows.size());
  return {frac >= 0.95 && floor_bad == 0, std::to_string(positive) + "/" + std::to_string(t.rows.size()) +
                                              " positive, min " + fmt("%.4f", lo)};
}

Outcome savings_model() {
  double worst = 0.0;
  std::string where;
  for (double s : {0.2, 0.5, 0.8}) {
    for (std::size_t ratio : {2u, 5u, 10u}) {
      HomogeneousModel m;
      m.s_o = s;
      m.n_o = ratio * m.num_stations;
      const auto r = homogeneous_savings(m, 10000, derive_seed(10, ratio, static_cast<std::uint64_t>(s * 10)));
      const double err = std::abs(r.delta_measured - r.delta_theoretical) / r.delta_theoretical;
      if (err > worst) {
        worst = err;
        where = " at s_o " + fmt("%.1f", s) + ", n_o/|B| " + std::to_string(ratio);
      }
    }
  }
  return {worst <= 0.25, "max relative error " + fmt("%.3f", worst) + where, 1200.0};
}

Outcome taylor_check() {
  double worst = 0.0;
  for (double s : {0.2, 0.5, 0.8}) {
    for (std::size_t ratio : {5u, 10u}) {
      HomogeneousModel m;
      m.s_o = s;
      m.n_o = static_cast<std::size_t>(std::llround(s * static_cast<double>(ratio * m.num_stations)));
      const auto e = homogeneous_monte_carlo(m, 10000, derive_seed(11, ratio, static_cast<std::uint64_t>(s * 10)));
      const double t = homogeneous_taylor_utility(m.num_stations, m.total_users(), m.c);
      worst = std::max(worst, std::abs(e.network_utility - t) / std::abs(t));
    }
  }
  return {worst <= 0.05, "max relative error " + fmt("%.4f", worst)};
}

Outcome download_gain() {
  ExperimentOptions opt;
  const Table t = run_experiment("fig7", opt);
  bool ok = true;
  double min_g = INFINITY, max_spread = 0.0;
  for (std::size_t i = 0; i + 2 < t.rows.size(); i += 3) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t k = i; k < i + 3; ++k) {
      const double g = std::get<double>(t.rows[k][3]);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    ok = ok && lo > 0.0 && hi - lo <= 0.10;
    min_g = std::min(min_g, lo);
    max_spread = std::max(max_spread, hi - lo);
  }
  return {ok, "min G_D " + fmt("%.4f", min_g) + ", max spread " + fmt("%.2f", 100.0 * max_spread) + " pp"};
}

Outcome scaling() {
  const auto pts = computational_scaling({50, 100, 200, 400}, 1, 200, 1);
  const double g_gllg = pts.back().gllg_median_ms / pts.front().gllg_median_ms;
  const double g_dg = pts.back().dg_median_ms / pts.front().dg_median_ms;
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, p.gllg_median_ms);
  return {g_gllg < g_dg && worst < 10.0, "50->400 users: GLLG x" + fmt("%.1f", g_gllg) + ", DG x" + fmt("%.1f", g_dg) +
                                             ", GLLG median up to " + fmt("%.3f", worst) + " ms"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mora");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "mora_acceptance_det";
  fs::remove_all(root);
  std::size_t compared = 0, differ = 0, failed = 0;
  std::vector<std::vector<std::string>> runs;
  for (const char* workers : {"1", "3", "1"}) {
    const std::string tag = std::to_string(runs.size());
    std::vector<std::string> files;
    failed += cli({"--set", "layout.rings=1", "--set", "sim.duration=30", "--seed", "7", "--workers", workers,
                   "--out", (root / ("run" + tag)).string()}) != 0;
    failed += cli({"--experiment", "fig2", "--replications", "3", "--workers", workers, "--out",
                   (root / ("exp" + tag)).string()}) != 0;
    files.push_back(slurp(root / ("run" + tag) / "metrics.csv"));
    files.push_back(slurp(root / ("run" + tag) / "summary.csv"));
    files.push_back(slurp(root / ("exp" + tag) / "fig2.csv"));
    runs.push_back(std::move(files));
  }
  for (std::size_t r = 1; r < runs.size(); ++r) {
    for (std::size_t f = 0; f < runs[0].size(); ++f) {
      ++compared;
      differ += runs[r][f].empty() || runs[r][f] != runs[0][f];
    }
  }
  fs::remove_all(root);
  return {failed == 0 && differ == 0, std::to_string(compared) + " file pairs compared (workers 1/3/1), " +
                                          std::to_string(differ) + " differ"};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"mora-dominates-slicing", dominance},  {"dg-within-one-nat", dg_bound},
      {"glg-trace", glg_trace},               {"operator-bounds", operator_bounds},
      {"3dm-reduction", three_dm},            {"online-gap-ln-B", online_gap},
      {"utility-gain-trend", utility_gain_trend}, {"policy-ordering", policy_ordering},
      {"operator-gain-regime", operator_gains}, {"savings-estimate", savings_model},
      {"taylor-utility", taylor_check},       {"download-gain", download_gain},
      {"computational-scaling", scaling},     {"determinism", determinism},
  };
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!only.empty() && only.count(i + 1) == 0) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.time_limit_s > 0.0 && secs > o.time_limit_s) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", o.time_limit_s) + " s limit";
    }
    failures += !o.pass;
    std::printf("%s %2zu %-24s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, all[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
