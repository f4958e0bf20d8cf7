#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>

#include "mora/analysis.hpp"
#include "mora/rng.hpp"
#include "streams.hpp"

namespace mora {

namespace {

using Row = std::vector<std::variant<double, std::string>>;

struct Grid {
  std::vector<std::size_t> rings;
  std::vector<std::size_t> operators;
  std::vector<double> densities;
  double duration_s;
  std::size_t seeds;
};

Grid grid(Scale scale) {
  if (scale == Scale::paper) return {{0, 1, 2}, {2, 3, 4, 5, 6}, {5, 10, 15}, 300.0, 20};
  return {{0, 1}, {2, 3, 4}, {5, 10}, 60.0, 20};
}

ScenarioConfig base_config(const ExperimentOptions& opt, std::size_t operators, double density) {
  ScenarioConfig c;
  const Grid g = grid(opt.scale);
  c.rings = g.rings.back();
  c.num_operators = operators;
  c.user_density = density;
  c.duration_s = g.duration_s;
  c.seed = opt.seed;
  return c;
}

std::size_t seeds_of(const ExperimentOptions& opt) { return opt.seeds.value_or(grid(opt.scale).seeds); }

ScenarioConfig reseeded(ScenarioConfig c, std::uint64_t master, std::size_t rep) {
  c.seed = replication_seed(master, rep);
  return c;
}

double percentile(std::vector<double>& v, double q) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
}

Table fig1(const ExperimentOptions& opt) {
  std::vector<std::size_t> ms{0, 1, 2, 3, 4, 5, 6};
  const ScenarioConfig base = base_config(opt, 3, 10.0);
  const auto runs = parallel_map<UtilityGain>(seeds_of(opt), opt.workers, [&](std::size_t r) {
    return normalized_utility_gain(reseeded(base, opt.seed, r), ms);
  });
  Table t{{"m", "G_W", "ci95", "seeds"}, {}, true};
  for (std::size_t i = 0; i < ms.size(); ++i) {
    std::vector<double> g;
    for (const auto& run : runs) {
      if (!run.degenerate) g.push_back(run.gain[i]);
    }
    const auto [mean, ci] = mean_ci95(g);
    t.rows.push_back({static_cast<double>(ms[i]), mean, ci, static_cast<double>(g.size())});
  }
  return t;
}

Table fig2(const ExperimentOptions& opt) {
  const std::vector<Policy> policies{Policy::sinr_ss, Policy::dg_ss, Policy::gllg, Policy::dg};
  Table t{{"sectors", "policy", "W", "ci95"}, {}, true};
  for (std::size_t rings : grid(opt.scale).rings) {
    ScenarioConfig base = base_config(opt, 3, 10.0);
    base.rings = rings;
    const auto per_seed = parallel_map<std::vector<double>>(seeds_of(opt), opt.workers, [&](std::size_t r) {
      const ScenarioConfig c = reseeded(base, opt.seed, r);
      const Layout layout = build_layout(c.rings, c.isd_m);
      const EventStream events = generate_events(c, layout);
      std::vector<double> w;
      for (Policy p : policies) w.push_back(run_scenario(c, layout, events, p).mean_utility);
      return w;
    });
    for (std::size_t p = 0; p < policies.size(); ++p) {
      std::vector<double> w;
      for (const auto& s : per_seed) w.push_back(s[p]);
      const auto [mean, ci] = mean_ci95(w);
      t.rows.push_back({3.0 * static_cast<double>(1 + 3 * rings * (rings + 1)), policy_name(policies[p]), mean, ci});
    }
  }
  return t;
}

Table fig3(const ExperimentOptions& opt) {
  Table t{{"operators", "density", "replication", "operator", "gain"}, {}, true};
  const std::size_t reps = opt.seeds.value_or(50);
  for (std::size_t ops : {std::size_t{2}, std::size_t{4}}) {
    for (double density : {5.0, 10.0}) {
      const auto samples = operator_gain_distribution(base_config(opt, ops, density), reps, opt.workers);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        t.rows.push_back({static_cast<double>(ops), density, static_cast<double>(i / ops),
                          static_cast<double>(i % ops), samples[i]});
      }
    }
  }
  return t;
}

Table fig4(const ExperimentOptions& opt) {
  Table t{{"operators", "density", "baseline", "delta", "ci95", "delta_eq8"}, {}, true};
  const Grid g = grid(opt.scale);
  for (std::size_t ops : g.operators) {
    for (double density : g.densities) {
      for (Policy baseline : {Policy::sinr_ss, Policy::dg_ss}) {
        const ScenarioConfig base = base_config(opt, ops, density);
        const auto results = parallel_map<SavingsResult>(seeds_of(opt), opt.workers, [&](std::size_t r) {
          return capacity_savings_measured(reseeded(base, opt.seed, r), baseline);
        });
        std::vector<double> d;
        for (const auto& s : results) d.push_back(s.delta_measured);
        const auto [mean, ci] = mean_ci95(d);
        t.rows.push_back({static_cast<double>(ops), density, policy_name(baseline), mean, ci,
                          results.front().delta_theoretical});
      }
    }
  }
  return t;
}

Table fig5(const ExperimentOptions& opt) {
  Table t{{"s_o", "n_o_per_b", "delta_measured", "delta_eq8"}, {}, true};
  const std::size_t draws = opt.scale == Scale::paper ? 100000 : 10000;
  std::size_t k = 0;
  for (double s : {0.2, 0.5, 0.8}) {
    for (std::size_t ratio : {std::size_t{2}, std::size_t{5}, std::size_t{10}}) {
      HomogeneousModel model;
      model.s_o = s;
      model.n_o = ratio * model.num_stations;
      const SavingsResult r = homogeneous_savings(model, draws, replication_seed(opt.seed, k++));
      t.rows.push_back({s, static_cast<double>(ratio), r.delta_measured, r.delta_theoretical});
    }
  }
  return t;
}

Table fig6(const ExperimentOptions& opt) {
  Table t{{"operators", "density", "policy", "p10_mbps", "p25_mbps", "p50_mbps", "p75_mbps", "p90_mbps"}, {}, true};
  RunOptions run;
  run.record_user_rates = true;
  for (std::size_t ops : {std::size_t{2}, std::size_t{4}}) {
    for (double density : {5.0, 10.0}) {
      for (Policy p : {Policy::sinr_ss, Policy::dg_ss, Policy::gllg}) {
        const ScenarioConfig base = base_config(opt, ops, density);
        const auto rates = parallel_map<std::vector<double>>(seeds_of(opt), opt.workers, [&](std::size_t r) {
          return run_scenario(reseeded(base, opt.seed, r), p, run).user_rates;
        });
        std::vector<double> all;
        for (const auto& v : rates) all.insert(all.end(), v.begin(), v.end());
        for (double& x : all) x /= 1e6;
        Row row{static_cast<double>(ops), density, policy_name(p)};
        for (double q : {0.10, 0.25, 0.50, 0.75, 0.90}) row.push_back(percentile(all, q));
        t.rows.push_back(std::move(row));
      }
    }
  }
  return t;
}

Table fig7(const ExperimentOptions& opt) {
  Table t{{"operators", "density", "file_mbit", "G_D", "ci95"}, {}, true};
  const std::vector<double> sizes{4e6, 16e6, 64e6};
  for (std::size_t ops : {std::size_t{2}, std::size_t{4}}) {
    for (double density : {5.0, 10.0}) {
      ScenarioConfig base = base_config(opt, ops, density);
      base.arrival_rate = 0.0;
      base.duration_s = std::max(base.duration_s, 120.0);
      const auto gains = parallel_map<std::vector<double>>(seeds_of(opt), opt.workers, [&](std::size_t r) {
        return download_time_gain(reseeded(base, opt.seed, r), sizes);
      });
      for (std::size_t i = 0; i < sizes.size(); ++i) {
        std::vector<double> g;
        for (const auto& v : gains) g.push_back(v[i]);
        const auto [mean, ci] = mean_ci95(g);
        t.rows.push_back({static_cast<double>(ops), density, sizes[i] / 1e6, mean, ci});
      }
    }
  }
  return t;
}

Table fig8(const ExperimentOptions& opt) {
  Table t{{"users", "algorithm", "median_ms", "mean_ms"}, {}, false};
  const std::vector<std::size_t> users = opt.scale == Scale::paper
                                             ? std::vector<std::size_t>{100, 200, 400, 800, 1600}
                                             : std::vector<std::size_t>{50, 100, 200, 400};
  const std::size_t rings = opt.scale == Scale::paper ? 2 : 1;
  for (const TimingPoint& p : computational_scaling(users, rings, 200, opt.seed)) {
    t.rows.push_back({static_cast<double>(p.users), std::string("gllg"), p.gllg_median_ms, p.gllg_mean_ms});
    t.rows.push_back({static_cast<double>(p.users), std::string("dg"), p.dg_median_ms, p.dg_mean_ms});
  }
  return t;
}

Table fig9(const ExperimentOptions& opt) {
  Table t{{"concentration", "shared_hotspots", "delta", "ci95"}, {}, true};
  for (bool shared : {true, false}) {
    for (double theta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      ScenarioConfig base = base_config(opt, 3, 10.0);
      base.mobility = Mobility::hotspot;
      base.hotspot_concentration = theta;
      base.hotspot_shared = shared;
      const auto results = parallel_map<SavingsResult>(seeds_of(opt), opt.workers, [&](std::size_t r) {
        return capacity_savings_measured(reseeded(base, opt.seed, r), Policy::dg_ss);
      });
      std::vector<double> d;
      for (const auto& s : results) d.push_back(s.delta_measured);
      const auto [mean, ci] = mean_ci95(d);
      t.rows.push_back({theta, shared ? 1.0 : 0.0, mean, ci});
    }
  }
  return t;
}

double median(std::vector<double> v) { return percentile(v, 0.5); }

double mean(const std::vector<double>& v) { return mean_ci95(v).first; }

}  // namespace

std::vector<TimingPoint> computational_scaling(const std::vector<std::size_t>& users, std::size_t rings,
                                               std::size_t events, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  const Layout layout = build_layout(rings);
  const RadioParams radio;
  const McsTable table = McsTable::builtin();
  const ShadowingField shadow(derive_seed(seed, stream::shadowing), radio.shadowing_sigma_db, radio.shadowing_update_s);
  std::vector<Operator> ops;
  for (std::uint32_t o = 0; o < 4; ++o) ops.push_back({OperatorId{o}, 0.25});

  auto row_for = [&](UserId id, Point p) {
    const ChannelUser u{id, p};
    const ChannelSnapshot s = build_rate_matrix(layout.sectors, std::span(&u, 1), radio, &shadow, 0.0,
                                                RateMode::shannon, table);
    return std::vector<double>(s.rates.row(0).begin(), s.rates.row(0).end());
  };

  std::vector<TimingPoint> out;
  for (std::size_t n : users) {
    std::mt19937_64 rng(derive_seed(seed, stream::instances, n));
    std::vector<User> members;
    RateMatrix rates(n, layout.sectors.size());
    for (std::size_t u = 0; u < n; ++u) {
      members.push_back({UserId{u}, OperatorId{static_cast<std::uint32_t>(u % 4)}, std::nullopt});
      const auto row = row_for(UserId{u}, uniform_position(layout.bounds, rng));
      std::copy(row.begin(), row.end(), rates.row(u).begin());
    }
    const NetworkState state(ops, members, layout.sectors.size(), std::move(rates));

    TimingPoint point;
    point.users = n;
    std::vector<double> dg_ms;
    SolverReport eq;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = Clock::now();
      eq = distributed_greedy(state, Association{}, SolverParams{});
      dg_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    point.dg_median_ms = median(dg_ms);
    point.dg_mean_ms = mean(dg_ms);

    LiveNetwork net = LiveNetwork::from_state(state, eq.final_association);
    std::vector<UserId> alive;
    for (std::size_t u = 0; u < n; ++u) alive.push_back(UserId{u});
    std::uint64_t next_id = n;
    std::vector<double> ms;
    const SolverParams params;
    for (std::size_t e = 0; e < events; ++e) {
      std::uniform_int_distribution<std::size_t> pick(0, alive.size() - 1);
      const std::size_t i = pick(rng);
      const auto row = row_for(UserId{next_id}, uniform_position(layout.bounds, rng));
      const auto t0 = Clock::now();
      switch (e % 3) {
        case 0:
          gllg_on_join(net, UserId{next_id}, next_id % 4, row, params);
          break;
        case 1:
          gllg_on_leave(net, alive[i], params);
          break;
        default:
          gllg_on_move(net, alive[i], row, params);
          break;
      }
      ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
      if (e % 3 == 0) alive.push_back(UserId{next_id++});
      if (e % 3 == 1) alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(i));
    }
    point.gllg_median_ms = median(ms);
    point.gllg_mean_ms = mean(ms);
    out.push_back(point);
  }
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4", "fig5",
                                              "fig6", "fig7", "fig8", "fig9"};
  return names;
}

double experiment_cost_estimate(const std::string& name, const ExperimentOptions& opt) {
  const Grid g = grid(opt.scale);
  const double sectors = 3.0 * static_cast<double>(1 + 3 * g.rings.back() * (g.rings.back() + 1));
  const double seeds = static_cast<double>(seeds_of(opt));
  // Seconds per simulation, from users x snapshots x sectors.
  auto sim = [&](double density) { return 5e-7 * density * sectors * sectors * g.duration_s; };
  const double dmax = g.densities.back();
  const double ops = static_cast<double>(g.operators.size());
  const double dens = static_cast<double>(g.densities.size());
  if (name == "fig1") return seeds * 8.0 * sim(10.0);
  if (name == "fig2") return seeds * 4.0 * sim(10.0) * static_cast<double>(g.rings.size());
  if (name == "fig3") return 4.0 * static_cast<double>(opt.seeds.value_or(50)) * 2.0 * sim(10.0);
  if (name == "fig4") return ops * dens * 2.0 * seeds * 16.0 * sim(dmax);
  if (name == "fig5") return opt.scale == Scale::paper ? 60.0 : 6.0;
  if (name == "fig6") return 4.0 * 3.0 * seeds * sim(10.0);
  if (name == "fig7") return 4.0 * seeds * 2.0 * sim(10.0) * 2.0;
  if (name == "fig8") return opt.scale == Scale::paper ? 120.0 : 10.0;
  if (name == "fig9") return 10.0 * seeds * 16.0 * sim(10.0);
  throw ConfigError("unknown experiment '" + name + "'");
}

Table run_experiment(const std::string& name, const ExperimentOptions& options) {
  static const std::map<std::string, Table (*)(const ExperimentOptions&)> drivers{
      {"fig1", fig1}, {"fig2", fig2}, {"fig3", fig3}, {"fig4", fig4}, {"fig5", fig5},
      {"fig6", fig6}, {"fig7", fig7}, {"fig8", fig8}, {"fig9", fig9}};
  auto it = drivers.find(name);
  if (it == drivers.end()) throw ConfigError("unknown experiment '" + name + "' (fig1..fig9)");
  return it->second(options);
}

}  // namespace mora
