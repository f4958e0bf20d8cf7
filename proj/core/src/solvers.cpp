#include "mora/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mora/allocation.hpp"
#include "odometer.hpp"

namespace mora {

namespace {

// Users with the same operator and identical rate rows are interchangeable:
// only how many of them sit at each station matters.
struct UserClass {
  std::vector<std::size_t> members;
  std::vector<StationId> feasible;
  std::vector<double> capacity;  // rate at each feasible station
  double weight = 0.0;
  std::vector<std::vector<std::uint16_t>> occupancies;  // counts per feasible station
};

void enumerate_occupancies(std::size_t remaining, std::size_t slot, std::vector<std::uint16_t>& cur,
                           std::vector<std::vector<std::uint16_t>>& out) {
  if (slot + 1 == cur.size()) {
    cur[slot] = static_cast<std::uint16_t>(remaining);
    out.push_back(cur);
    return;
  }
  for (std::size_t k = remaining + 1; k-- > 0;) {
    cur[slot] = static_cast<std::uint16_t>(k);
    enumerate_occupancies(remaining - k, slot + 1, cur, out);
  }
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

std::vector<UserClass> group_users(const NetworkState& state) {
  std::vector<UserClass> classes;
  std::vector<std::size_t> class_op;
  for (std::size_t u = 0; u < state.num_users(); ++u) {
    const auto row = state.rates().row(u);
    const std::size_t op = state.operator_index_of_user(u);
    bool placed = false;
    for (std::size_t c = 0; c < classes.size() && !placed; ++c) {
      const auto ref = state.rates().row(classes[c].members.front());
      if (class_op[c] == op && std::equal(row.begin(), row.end(), ref.begin())) {
        classes[c].members.push_back(u);
        placed = true;
      }
    }
    if (placed) continue;
    UserClass cls;
    cls.members.push_back(u);
    cls.weight = state.weight(u);
    for (std::uint32_t b = 0; b < state.num_stations(); ++b) {
      if (row[b] > 0.0) {
        cls.feasible.push_back(StationId{b});
        cls.capacity.push_back(row[b]);
      }
    }
    classes.push_back(std::move(cls));
    class_op.push_back(op);
  }
  return classes;
}

Association build_association(const NetworkState& state, const std::vector<UserClass>& classes,
                              const std::vector<std::size_t>& digit) {
  Association x(state.num_users());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& occ = classes[c].occupancies[digit[c]];
    std::size_t next = 0;
    for (std::size_t f = 0; f < occ.size(); ++f) {
      for (std::uint16_t k = 0; k < occ[f]; ++k) {
        x.assign(classes[c].members[next++], classes[c].feasible[f]);
      }
    }
  }
  return x;
}

SolverReport finish_report(const NetworkState& state, const LiveNetwork& net, Trace trace,
                           const LiveOutcome& outcome) {
  SolverReport report;
  report.final_association = net.association();
  report.final_allocation = mora_allocation(state, report.final_association);
  report.utility_trace = std::move(trace.utility);
  report.gain_trace = std::move(trace.gain);
  report.reassociation_count = outcome.moves;
  report.iterations = outcome.moves;
  report.converged = outcome.converged;
  return report;
}

template <class Engine>
SolverReport run_engine(const NetworkState& state, const Association& x0,
                        const SolverParams& params, Engine engine) {
  LiveNetwork net = LiveNetwork::from_state(
      state, x0.size() == 0 ? Association(state.num_users()) : x0);
  if (x0.size() == 0) {
    place_unplaced(net);
  } else {
    validate_association(state, x0);
  }
  Trace trace;
  trace.utility.push_back(net.utility());
  const LiveOutcome outcome = engine(net, params, &trace);
  return finish_report(state, net, std::move(trace), outcome);
}

std::size_t iteration_limit(const LiveNetwork& net, const SolverParams& params) {
  if (params.max_iterations > 0) return params.max_iterations;
  return 100 * std::max<std::size_t>(1, net.num_users());
}

void record(Trace* trace, const LiveNetwork& net, double gain) {
  if (trace == nullptr) return;
  trace->utility.push_back(net.utility());
  trace->gain.push_back(gain);
}

}  // namespace

BruteForceResult brute_force_mora(const NetworkState& state) {
  std::vector<UserClass> classes = group_users(state);
  double configurations = 1.0;
  for (auto& cls : classes) {
    const std::size_t k = cls.members.size();
    const std::size_t f = cls.feasible.size();
    configurations *= binomial(k + f - 1, f - 1);
  }
  if (configurations > kEnumerationLimit) {
    throw SizeError("brute force needs " + std::to_string(configurations) +
                    " associations (limit 1e7)");
  }
  for (auto& cls : classes) {
    std::vector<std::uint16_t> cur(cls.feasible.size(), 0);
    enumerate_occupancies(cls.members.size(), 0, cur, cls.occupancies);
  }

  BruteForceResult result;
  result.configurations = configurations;
  if (state.num_users() == 0) {
    result.association = Association(0);
    result.allocation = Allocation{};
    return result;
  }

  std::vector<std::size_t> digit(classes.size(), 0);
  std::vector<double> load(state.num_stations());
  double best = -INFINITY;
  Association best_x;
  while (true) {
    std::fill(load.begin(), load.end(), 0.0);
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto& occ = classes[c].occupancies[digit[c]];
      for (std::size_t f = 0; f < occ.size(); ++f) {
        load[classes[c].feasible[f].value] += occ[f] * classes[c].weight;
      }
    }
    double w = 0.0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto& cls = classes[c];
      const auto& occ = cls.occupancies[digit[c]];
      for (std::size_t f = 0; f < occ.size(); ++f) {
        if (occ[f] == 0) continue;
        w += occ[f] * cls.weight *
             std::log(cls.weight * cls.capacity[f] / load[cls.feasible[f].value]);
      }
    }
    const double tol = best_x.size() == 0 ? 0.0 : 1e-12 * std::max(1.0, std::abs(best));
    if (best_x.size() == 0 || w > best + tol) {
      best = w;
      best_x = build_association(state, classes, digit);
    } else if (std::abs(w - best) <= tol) {
      Association x = build_association(state, classes, digit);
      if (x.lexicographically_less(best_x)) best_x = std::move(x);
    }
    if (!detail::advance(digit, [&](std::size_t c) { return classes[c].occupancies.size(); })) {
      break;
    }
  }

  result.association = std::move(best_x);
  result.allocation = mora_allocation(state, result.association);
  result.utility = best;
  return result;
}

void place_unplaced(LiveNetwork& net) {
  for (UserId id : net.user_ids()) {
    if (net.station_of(id) == kUnassigned) net.assign(id, net.best_join_station(id));
  }
}

LiveOutcome distributed_greedy(LiveNetwork& net, const SolverParams& params, Trace* trace) {
  const std::size_t limit = iteration_limit(net, params);
  const std::vector<UserId> ids = net.user_ids();
  LiveOutcome out;
  while (true) {
    bool moved = false;
    for (UserId id : ids) {
      if (out.moves >= limit) return out;
      const auto br = net.best_response(id);
      if (br.station != kUnassigned && br.gain > 1.0 + params.hysteresis) {
        net.move(id, br.station);
        ++out.moves;
        moved = true;
        record(trace, net, br.gain);
      }
    }
    if (!moved) {
      out.converged = true;
      return out;
    }
  }
}

LiveOutcome greedy_largest_gain(LiveNetwork& net, const SolverParams& params, Trace* trace) {
  const std::size_t limit = iteration_limit(net, params);
  const std::vector<UserId> ids = net.user_ids();
  LiveOutcome out;
  while (out.moves < limit) {
    UserId mover{};
    LiveNetwork::BestResponse best;
    for (UserId id : ids) {
      const auto br = net.best_response(id);
      if (br.station != kUnassigned && (best.station == kUnassigned || br.gain > best.gain)) {
        mover = id;
        best = br;
      }
    }
    if (best.station == kUnassigned || !(best.gain > 1.0 + params.hysteresis)) {
      out.converged = true;
      return out;
    }
    net.move(mover, best.station);
    ++out.moves;
    record(trace, net, best.gain);
  }
  return out;
}

SolverReport distributed_greedy(const NetworkState& state, const Association& x0,
                                const SolverParams& params) {
  return run_engine(state, x0, params, [](LiveNetwork& net, const SolverParams& p, Trace* t) {
    return distributed_greedy(net, p, t);
  });
}

SolverReport greedy_largest_gain(const NetworkState& state, const Association& x0,
                                 const SolverParams& params) {
  return run_engine(state, x0, params, [](LiveNetwork& net, const SolverParams& p, Trace* t) {
    return greedy_largest_gain(net, p, t);
  });
}

Association sinr_association(const RateMatrix& sinr) {
  Association x(sinr.users());
  for (std::size_t u = 0; u < sinr.users(); ++u) {
    const auto row = sinr.row(u);
    const auto best = std::max_element(row.begin(), row.end());
    x.assign(u, StationId{static_cast<std::uint32_t>(best - row.begin())});
  }
  return x;
}

Association sinr_association(const NetworkState& state) {
  return sinr_association(state.rates());
}

}  // namespace mora
