#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mora/analysis.hpp"
#include "mora/rng.hpp"
#include "streams.hpp"

namespace mora {

std::uint64_t replication_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, stream::instances, index);
}

std::pair<double, double> mean_ci95(const std::vector<double>& samples) {
  if (samples.empty()) return {NAN, NAN};
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (samples.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return {mean, 1.96 * std::sqrt(ss / (n - 1.0) / n)};
}

double capacity_savings_estimate(std::size_t num_stations, double n_o, double s_o) {
  if (!(n_o >= 1.0)) throw ValidationError("capacity savings estimate needs n_o >= 1");
  return std::exp(static_cast<double>(num_stations) / (2.0 * n_o) * (1.0 - s_o)) - 1.0;
}

SavingsResult capacity_search(const std::function<double(double)>& baseline, double target,
                              const SearchParams& params) {
  SavingsResult result;
  double lo = params.lo;
  double hi = params.hi;
  const double at_lo = baseline(lo);
  result.trace.emplace_back(lo, at_lo);
  if (at_lo >= target - params.tolerance) {
    result.delta_measured = lo - 1.0;
    result.at_lower_bracket = true;
    result.converged = true;
    return result;
  }
  const double at_hi = baseline(hi);
  result.trace.emplace_back(hi, at_hi);
  if (at_hi < target - params.tolerance) {
    throw NotBracketedError("baseline utility " + std::to_string(at_hi) + " at multiplier " +
                                std::to_string(hi) + " is still below the target " + std::to_string(target),
                            result.trace);
  }
  double best = hi;
  for (std::size_t i = 0; i < params.max_iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double u = baseline(mid);
    result.trace.emplace_back(mid, u);
    if (std::abs(u - target) <= params.tolerance) {
      best = mid;
      result.converged = true;
      break;
    }
    if (u < target) lo = mid;
    else hi = best = mid;
  }
  std::sort(result.trace.begin(), result.trace.end());
  result.delta_measured = best - 1.0;
  return result;
}

SavingsResult capacity_savings_measured(const ScenarioConfig& config, Policy baseline,
                                        const SearchParams& params) {
  const Layout layout = build_layout(config.rings, config.isd_m);
  const EventStream events = generate_events(config, layout);
  const double target = run_scenario(config, layout, events, Policy::gllg).mean_utility;
  SavingsResult result = capacity_search(
      [&](double multiplier) {
        ScenarioConfig scaled = config;
        scaled.capacity_scale = config.capacity_scale * multiplier;
        return run_scenario(scaled, layout, events, baseline).mean_utility;
      },
      target, params);
  const auto shares = config.normalized_shares();
  const auto population = config.target_population(layout.sectors.size());
  double eq8 = 0.0;
  for (std::size_t o = 0; o < shares.size(); ++o) {
    eq8 += capacity_savings_estimate(layout.sectors.size(), std::max<double>(1.0, population[o]), shares[o]);
  }
  result.delta_theoretical = eq8 / static_cast<double>(shares.size());
  return result;
}

// ---------------------------------------------------------------------------
// Homogeneous model

std::size_t HomogeneousModel::total_users() const {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n_o) / s_o));
}

HomogeneousEstimate homogeneous_monte_carlo(const HomogeneousModel& model, std::size_t draws,
                                            std::uint64_t seed) {
  const std::size_t B = model.num_stations;
  const std::size_t total = model.total_users();
  if (B == 0 || model.n_o == 0 || total < model.n_o || draws == 0) {
    throw ValidationError("homogeneous model needs stations, users and draws");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> station(0, B - 1);
  std::vector<std::size_t> all(B), mine(B);
  HomogeneousEstimate est;
  for (std::size_t d = 0; d < draws; ++d) {
    std::fill(all.begin(), all.end(), 0);
    std::fill(mine.begin(), mine.end(), 0);
    for (std::size_t u = 0; u < total; ++u) {
      const std::size_t b = station(rng);
      ++all[b];
      if (u < model.n_o) ++mine[b];
    }
    // Equal weights 1/|U|: MORA gives r = c / N_b; SS gives r = s_o c / N_ob.
    double mora_o = 0.0, ss_o = 0.0, w = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      if (all[b] == 0) continue;
      const double nb = static_cast<double>(all[b]);
      w += nb * std::log(model.c / nb);
      if (mine[b] == 0) continue;
      const double nob = static_cast<double>(mine[b]);
      mora_o += nob * std::log(model.c / nb);
      ss_o += nob * std::log(model.s_o * model.c / nob);
    }
    est.mora_utility += mora_o / static_cast<double>(model.n_o);
    est.ss_utility += ss_o / static_cast<double>(model.n_o);
    est.network_utility += w / static_cast<double>(total);
  }
  const double n = static_cast<double>(draws);
  est.mora_utility /= n;
  est.ss_utility /= n;
  est.network_utility /= n;
  return est;
}

double homogeneous_taylor_utility(std::size_t num_stations, std::size_t users, double c) {
  const double mean_nb = static_cast<double>(users) / static_cast<double>(num_stations);
  return std::log(c / mean_nb) - static_cast<double>(num_stations) / (2.0 * static_cast<double>(users));
}

SavingsResult homogeneous_savings(const HomogeneousModel& model, std::size_t draws, std::uint64_t seed,
                                  const SearchParams& params) {
  const HomogeneousEstimate est = homogeneous_monte_carlo(model, draws, seed);
  // A capacity multiplier k adds ln k to every SS log-rate; the draws are
  // shared, so the search runs on the same sample.
  SavingsResult result = capacity_search(
      [&](double k) { return est.ss_utility + std::log(k); }, est.mora_utility, params);
  result.delta_theoretical =
      capacity_savings_estimate(model.num_stations, static_cast<double>(model.n_o), model.s_o);
  return result;
}

// ---------------------------------------------------------------------------

UtilityGain normalized_utility_gain(const ScenarioConfig& config, const std::vector<std::size_t>& m_values) {
  const Layout layout = build_layout(config.rings, config.isd_m);
  const EventStream events = generate_events(config, layout);
  UtilityGain g;
  g.m = m_values;
  g.w_online = run_scenario(config, layout, events, Policy::online).mean_utility;
  g.w_unconstrained = run_scenario(config, layout, events, Policy::glg).mean_utility;
  const double span = g.w_online - g.w_unconstrained;
  g.degenerate = !(std::abs(span) > 1e-9);
  for (std::size_t m : m_values) {
    if (g.degenerate) {
      g.gain.push_back(NAN);
      continue;
    }
    double w = g.w_online;
    if (m > 0) {
      ScenarioConfig c = config;
      c.m = m;
      w = run_scenario(c, layout, events, Policy::gllg).mean_utility;
    }
    g.gain.push_back(1.0 - (w - g.w_unconstrained) / span);
  }
  return g;
}

std::vector<double> operator_gain_distribution(const ScenarioConfig& config, std::size_t replications,
                                               std::size_t workers) {
  const auto per_rep = parallel_map<std::vector<double>>(replications, workers, [&](std::size_t r) {
    ScenarioConfig c = config;
    c.seed = replication_seed(config.seed, r);
    const Layout layout = build_layout(c.rings, c.isd_m);
    const EventStream events = generate_events(c, layout);
    const MetricsRecord shared = run_scenario(c, layout, events, Policy::gllg);
    const MetricsRecord sliced = run_scenario(c, layout, events, Policy::dg_ss);
    std::vector<double> out;
    for (std::size_t o = 0; o < shared.mean_operator_utility.size(); ++o) {
      out.push_back(shared.mean_operator_utility[o] - sliced.mean_operator_utility[o]);
    }
    return out;
  });
  std::vector<double> samples;
  for (const auto& v : per_rep) samples.insert(samples.end(), v.begin(), v.end());
  return samples;
}

std::vector<double> download_time_gain(const ScenarioConfig& config, const std::vector<double>& file_sizes_bits) {
  const Layout layout = build_layout(config.rings, config.isd_m);
  const EventStream events = generate_events(config, layout);
  RunOptions options;
  options.file_sizes_bits = file_sizes_bits;
  const MetricsRecord shared = run_scenario(config, layout, events, Policy::gllg, options);
  const MetricsRecord sliced = run_scenario(config, layout, events, Policy::dg_ss, options);
  std::vector<double> gains;
  for (std::size_t i = 0; i < file_sizes_bits.size(); ++i) {
    const double d_gllg = mean_ci95(shared.download_times[i]).first;
    const double d_ss = mean_ci95(sliced.download_times[i]).first;
    gains.push_back((d_ss - d_gllg) / d_ss);
  }
  return gains;
}

}  // namespace mora
