#pragma once

// Simulator and experiment drivers: per-snapshot metrics for every policy,
// the capacity-savings estimate and search, normalized utility gain,
// operator gain samples, download-time gains and the figure tables.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mora/scenario.hpp"
#include "mora/solvers.hpp"

namespace mora {

enum class Policy { gllg, online, dg, glg, dg_ss, sinr_ss, brute };

Policy parse_policy(const std::string& name);
std::string policy_name(Policy policy);

struct SnapshotMetrics {
  double time = 0.0;
  double utility = 0.0;                  // W over covered users
  std::vector<double> operator_utility;  // U_o; NaN for an operator without users
  std::size_t users = 0;
  std::size_t outage = 0;          // present but out of coverage, excluded from W
  std::size_t reassociations = 0;  // since the previous snapshot
  bool idle_operator = false;      // some operator had no users
};

struct MetricsRecord {
  std::vector<SnapshotMetrics> snapshots;
  double mean_utility = 0.0;  // time average after the warm-up
  std::vector<double> mean_operator_utility;
  std::size_t total_reassociations = 0;
  std::vector<double> user_rates;  // bits/s, every covered user at every steady-state snapshot
  /// Download times per requested file size (same order as RunOptions).
  std::vector<std::vector<double>> download_times;
};

struct RunOptions {
  std::vector<double> file_sizes_bits;
  bool record_user_rates = false;
};

/// Replays the scenario's event stream under `policy`. Rates are refreshed
/// for every present user on the snapshot grid; a changed rate row counts as
/// a move. Out-of-coverage users are removed until they regain coverage.
MetricsRecord run_scenario(const ScenarioConfig& config, Policy policy, const RunOptions& options = {});
MetricsRecord run_scenario(const ScenarioConfig& config, const Layout& layout, const EventStream& events,
                           Policy policy, const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Capacity savings

/// exp(|B| / (2 n_o) (1 - s_o)) - 1.
double capacity_savings_estimate(std::size_t num_stations, double n_o, double s_o);

struct SearchParams {
  double lo = 1.0;
  double hi = 32.0;
  std::size_t max_iterations = 40;
  double tolerance = 1e-3;  // nats
};

struct SavingsResult {
  double delta_theoretical = 0.0;
  double delta_measured = 0.0;
  std::vector<std::pair<double, double>> trace;  // (multiplier, baseline utility)
  bool at_lower_bracket = false;  // baseline already matched the target at multiplier lo
  bool converged = false;
};

class NotBracketedError : public Error {
 public:
  NotBracketedError(const std::string& what, std::vector<std::pair<double, double>> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<std::pair<double, double>>& trace() const { return trace_; }

 private:
  std::vector<std::pair<double, double>> trace_;
};

/// Bisection for the smallest multiplier at which `baseline(multiplier)`
/// reaches `target`. delta_measured = multiplier - 1.
SavingsResult capacity_search(const std::function<double(double)>& baseline, double target,
                              const SearchParams& params = {});

/// Simulated savings of the GLLG system over `baseline` (dg_ss or sinr_ss).
/// delta_theoretical is capacity_savings_estimate averaged over operators.
SavingsResult capacity_savings_measured(const ScenarioConfig& config, Policy baseline,
                                        const SearchParams& params = {});

/// Homogeneous model: every user reaches only one uniformly drawn station,
/// at rate c; the tagged operator has share s_o and n_o users, a second
/// operator holds the rest, and shares are proportional to users.
struct HomogeneousModel {
  std::size_t num_stations = 20;
  std::size_t n_o = 40;
  double s_o = 0.5;
  double c = 1.0;
  std::size_t total_users() const;
};

struct HomogeneousEstimate {
  double mora_utility = 0.0;  // mean U_o under MORA (= W by symmetry)
  double ss_utility = 0.0;    // mean U_o under SS
  double network_utility = 0.0;
};

HomogeneousEstimate homogeneous_monte_carlo(const HomogeneousModel& model, std::size_t draws,
                                            std::uint64_t seed);
/// ln(c / E[N_b]) - |B| / (2 |U|).
double homogeneous_taylor_utility(std::size_t num_stations, std::size_t users, double c);
/// Measured Delta for the tagged operator through capacity_search on the
/// Monte-Carlo SS utility.
SavingsResult homogeneous_savings(const HomogeneousModel& model, std::size_t draws, std::uint64_t seed,
                                  const SearchParams& params = {});

// ---------------------------------------------------------------------------
// Utility gain, operator gains, downloads

struct UtilityGain {
  std::vector<std::size_t> m;
  std::vector<double> gain;  // G_W(m); NaN when degenerate
  double w_online = 0.0;
  double w_unconstrained = 0.0;
  bool degenerate = false;
};

/// G_W(m) = 1 - (W(m) - W(inf)) / (W(0) - W(inf)) with W(0) from the online
/// policy and W(inf) from unconstrained Greedy Largest Gain.
UtilityGain normalized_utility_gain(const ScenarioConfig& config, const std::vector<std::size_t>& m_values);

/// U_o(GLLG) - U_o(DG SS) per replication and operator (time averages).
std::vector<double> operator_gain_distribution(const ScenarioConfig& config, std::size_t replications,
                                               std::size_t workers = 1);

/// G_D = (D_SS - D_GLLG) / D_SS per file size, from one paired run.
std::vector<double> download_time_gain(const ScenarioConfig& config, const std::vector<double>& file_sizes_bits);

struct TimingPoint {
  std::size_t users = 0;
  double gllg_median_ms = 0.0;  // per join/leave/move event
  double gllg_mean_ms = 0.0;
  double dg_median_ms = 0.0;  // Distributed Greedy from scratch on the same instance
  double dg_mean_ms = 0.0;
};

/// Wall-clock cost of GLLG event handling against a full Distributed Greedy
/// run, on channel-generated instances with 4 equal-share operators.
std::vector<TimingPoint> computational_scaling(const std::vector<std::size_t>& users, std::size_t rings,
                                               std::size_t events, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Figure drivers

enum class Scale { desk, paper };

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::variant<double, std::string>>> rows;
  bool deterministic = true;  // false for wall-clock timings
};

struct ExperimentOptions {
  Scale scale = Scale::desk;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::optional<std::size_t> seeds;  // replications; default per experiment
};

/// Rough single-core runtime in seconds, for the long-run confirmation.
double experiment_cost_estimate(const std::string& name, const ExperimentOptions& options);
Table run_experiment(const std::string& name, const ExperimentOptions& options);
const std::vector<std::string>& experiment_names();

/// Runs fn(0..n-1) on up to `workers` threads; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, std::size_t workers, const std::function<T(std::size_t)>& fn);

/// Seed of replication `index` under a master seed.
std::uint64_t replication_seed(std::uint64_t master, std::size_t index);

/// Mean and 95% normal-approximation half width.
std::pair<double, double> mean_ci95(const std::vector<double>& samples);

}  // namespace mora

#include "mora/detail/parallel.hpp"
