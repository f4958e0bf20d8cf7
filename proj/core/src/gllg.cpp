#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mora/allocation.hpp"
#include "mora/solvers.hpp"

namespace mora {

namespace {

constexpr double kUtilityEpsilon = 1e-12;

struct Candidate {
  UserId user{};
  StationId to = kUnassigned;
  double score = 0.0;
};

std::vector<UserId> users_of_stations(const LiveNetwork& net, std::initializer_list<StationId> stations) {
  std::vector<UserId> ids;
  for (StationId b : stations) {
    if (b == kUnassigned) continue;
    const auto at = net.users_at(b);
    ids.insert(ids.end(), at.begin(), at.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// Largest r_{u,q} / r_u over the candidates; lowest id wins ties.
Candidate largest_gain(const LiveNetwork& net, const std::vector<UserId>& ids) {
  Candidate best;
  for (UserId id : ids) {
    const auto br = net.best_response(id);
    if (br.station == kUnassigned) continue;
    if (best.to == kUnassigned || br.gain > best.score) best = {id, br.station, br.gain};
  }
  return best;
}

// Move maximizing W among the candidates. Compared as a difference: the
// ratio W_{u,q}/W flips meaning when W < 0.
Candidate largest_utility(const LiveNetwork& net, const std::vector<UserId>& ids) {
  Candidate best;
  for (UserId id : ids) {
    const StationId a = net.station_of(id);
    for (std::uint32_t q = 0; q < net.num_stations(); ++q) {
      if (StationId{q} == a || !(net.capacity(id, StationId{q}) > 0.0)) continue;
      const double delta = net.utility_delta(id, StationId{q});
      if (best.to == kUnassigned || delta > best.score) best = {id, StationId{q}, delta};
    }
  }
  return best;
}

// Moves of one repair with their summed utility change.
struct Journal {
  std::vector<std::pair<UserId, StationId>> undo;  // (user, station before the move)
  double delta = 0.0;
};

void apply(LiveNetwork& net, const Candidate& step, Journal& journal) {
  journal.delta += net.utility_delta(step.user, step.to);
  journal.undo.emplace_back(step.user, net.station_of(step.user));
  net.move(step.user, step.to);
}

void record(Trace* trace, const LiveNetwork& net, double gain) {
  if (trace == nullptr) return;
  trace->utility.push_back(net.utility());
  trace->gain.push_back(gain);
}

// One largest-gain move among users of `seed`, then up to m-1 among users of
// {c, p}, then the utility step. Returns the number of moves.
std::size_t local_repair(LiveNetwork& net, std::initializer_list<StationId> seed,
                         const SolverParams& params, Trace* trace, Journal& journal) {
  if (params.m == 0) return 0;
  Candidate step = largest_gain(net, users_of_stations(net, seed));
  if (step.to == kUnassigned || !(step.score > 1.0 + params.hysteresis)) return 0;
  StationId p = net.station_of(step.user);
  apply(net, step, journal);
  record(trace, net, step.score);
  StationId c = step.to;
  std::size_t moves = 1;

  for (std::size_t i = 1; i < params.m; ++i) {
    step = largest_gain(net, users_of_stations(net, {c, p}));
    if (step.to == kUnassigned || !(step.score > 1.0 + params.hysteresis)) return moves;
    p = net.station_of(step.user);
    apply(net, step, journal);
    record(trace, net, step.score);
    c = step.to;
    ++moves;
  }

  step = largest_utility(net, users_of_stations(net, {c, p}));
  if (step.to != kUnassigned && step.score > kUtilityEpsilon) {
    apply(net, step, journal);
    record(trace, net, std::numeric_limits<double>::quiet_NaN());
    ++moves;
  }
  return moves;
}

std::size_t local_repair(LiveNetwork& net, std::initializer_list<StationId> seed,
                         const SolverParams& params, Trace* trace) {
  Journal journal;
  return local_repair(net, seed, params, trace, journal);
}

// Departure repair. Largest-gain steps need not raise W, so a repair that
// ends below the untouched association is taken back.
std::size_t departure_repair(LiveNetwork& net, std::initializer_list<StationId> seed,
                             const SolverParams& params, Trace* trace) {
  const std::size_t mark = trace == nullptr ? 0 : trace->utility.size();
  Journal journal;
  const std::size_t moves = local_repair(net, seed, params, trace, journal);
  if (!(journal.delta < -kUtilityEpsilon)) return moves;
  for (auto it = journal.undo.rbegin(); it != journal.undo.rend(); ++it) net.undo_move(it->first, it->second);
  if (trace != nullptr) {
    trace->gain.resize(trace->gain.size() - (trace->utility.size() - mark));
    trace->utility.resize(mark);
  }
  return 0;
}

// Two highest-load stations other than `gone` (nonzero load only).
std::pair<StationId, StationId> heaviest_two(const LiveNetwork& net, StationId gone) {
  StationId first = kUnassigned, second = kUnassigned;
  for (std::uint32_t b = 0; b < net.num_stations(); ++b) {
    const StationId s{b};
    if (s == gone || !(net.load(s) > 0.0)) continue;
    if (first == kUnassigned || net.load(s) > net.load(first)) {
      second = first;
      first = s;
    } else if (second == kUnassigned || net.load(s) > net.load(second)) {
      second = s;
    }
  }
  return {first, second};
}

void record_start(Trace* trace, const LiveNetwork& net) {
  if (trace != nullptr && net.num_users() > 0) trace->utility.push_back(net.utility());
}

SolverReport make_report(const NetworkState& reported, const LiveNetwork& net, Trace trace,
                         std::size_t moves) {
  SolverReport report;
  report.final_association = net.association();
  report.final_allocation = mora_allocation(reported, report.final_association);
  if (trace.utility.empty()) trace.utility.push_back(0.0);
  report.utility_trace = std::move(trace.utility);
  report.gain_trace = std::move(trace.gain);
  report.reassociation_count = moves;
  report.iterations = moves;
  report.converged = true;
  return report;
}

}  // namespace

std::size_t gllg_on_join(LiveNetwork& net, UserId v, std::size_t op_index,
                         std::span<const double> rates, const SolverParams& params, Trace* trace) {
  net.add_user(v, op_index, rates);
  const StationId b = net.best_join_station(v);
  if (b == kUnassigned) {
    net.remove_user(v);
    throw InfeasibleError("joining user " + std::to_string(v.value) + " reaches no station");
  }
  net.assign(v, b);
  record_start(trace, net);
  return local_repair(net, {b}, params, trace);
}

std::size_t gllg_on_leave(LiveNetwork& net, UserId v, const SolverParams& params, Trace* trace) {
  const StationId a = net.station_of(v);
  net.remove_user(v);
  record_start(trace, net);
  if (net.num_users() == 0) return 0;
  const auto [first, second] = heaviest_two(net, a);
  return departure_repair(net, {first, second}, params, trace);
}

std::size_t gllg_on_move(LiveNetwork& net, UserId v, std::span<const double> new_rates,
                         const SolverParams& params, Trace* trace) {
  net.set_rates(v, new_rates);
  const StationId a = net.station_of(v);
  const auto br = net.best_response(v);
  const bool stranded = !(net.capacity(v, a) > 0.0);
  if (stranded && br.station == kUnassigned) {
    throw InfeasibleError("moving user " + std::to_string(v.value) + " reaches no station");
  }
  if (trace != nullptr) trace->utility.push_back(stranded ? -INFINITY : net.utility());
  if (br.station == kUnassigned || !(br.gain > 1.0 + params.hysteresis)) return 0;

  net.move(v, br.station);
  record(trace, net, br.gain);
  std::size_t moves = 1;
  if (params.m == 0) return moves;
  const auto [first, second] = heaviest_two(net, a);
  moves += departure_repair(net, {first, second}, params, trace);
  moves += local_repair(net, {br.station}, params, trace);
  return moves;
}

SolverReport gllg_join(const NetworkState& state, const Association& x, UserId v,
                       const SolverParams& params) {
  const std::size_t iv = state.index_of(v);
  if (x.size() != state.num_users()) throw ValidationError("association size mismatch");
  if (x[iv] != kUnassigned) throw ValidationError("joining user is already associated");
  const NetworkState before = state.without_user(v);
  std::vector<StationId> rest(x.stations().begin(), x.stations().end());
  rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(iv));
  const Association x_before(std::move(rest));
  validate_association(before, x_before);

  LiveNetwork net = LiveNetwork::from_state(before, x_before);
  Trace trace;
  const std::size_t moves = gllg_on_join(net, v, state.operator_index_of_user(iv),
                                         state.rates().row(iv), params, &trace);
  return make_report(state, net, std::move(trace), moves);
}

SolverReport gllg_leave(const NetworkState& state, const Association& x, UserId v,
                        const SolverParams& params) {
  const std::size_t iv = state.index_of(v);
  validate_association(state, x);
  LiveNetwork net = LiveNetwork::from_state(state, x);
  Trace trace;
  const std::size_t moves = gllg_on_leave(net, v, params, &trace);
  SolverReport report = make_report(state.without_user(v), net, std::move(trace), moves);

  std::vector<StationId> full(report.final_association.stations().begin(),
                              report.final_association.stations().end());
  full.insert(full.begin() + static_cast<std::ptrdiff_t>(iv), kUnassigned);
  report.final_association = Association(std::move(full));
  std::vector<Allocation::Grant> grants;
  for (std::size_t u = 0; u < report.final_allocation.size(); ++u) {
    grants.push_back(report.final_allocation[u]);
  }
  grants.insert(grants.begin() + static_cast<std::ptrdiff_t>(iv), Allocation::Grant{kUnassigned, 0.0});
  report.final_allocation = Allocation(std::move(grants));
  return report;
}

SolverReport gllg_move(const NetworkState& state, const Association& x, UserId v,
                       std::span<const double> new_rates, const SolverParams& params) {
  validate_association(state, x);
  LiveNetwork net = LiveNetwork::from_state(state, x);
  Trace trace;
  const std::size_t moves = gllg_on_move(net, v, new_rates, params, &trace);
  return make_report(net.snapshot(), net, std::move(trace), moves);
}

}  // namespace mora
