#include "mora/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mora/solvers.hpp"
#include "odometer.hpp"

namespace mora {

Allocation mora_allocation(const NetworkState& state, const Association& x) {
  validate_association(state, x);
  std::vector<double> load(state.num_stations(), 0.0);
  for (std::size_t u = 0; u < state.num_users(); ++u) load[x[u].value] += state.weight(u);
  std::vector<Allocation::Grant> grants(state.num_users());
  for (std::size_t u = 0; u < state.num_users(); ++u) {
    grants[u] = {x[u], state.weight(u) / load[x[u].value]};
  }
  return Allocation(std::move(grants));
}

Allocation ss_allocation(const NetworkState& state, const Association& x) {
  validate_association(state, x);
  const std::size_t stations = state.num_stations();
  std::vector<std::size_t> count(state.num_operators() * stations, 0);
  for (std::size_t u = 0; u < state.num_users(); ++u) {
    ++count[state.operator_index_of_user(u) * stations + x[u].value];
  }
  std::vector<Allocation::Grant> grants(state.num_users());
  for (std::size_t u = 0; u < state.num_users(); ++u) {
    const std::size_t o = state.operator_index_of_user(u);
    grants[u] = {x[u], state.operators()[o].share /
                           static_cast<double>(count[o * stations + x[u].value])};
  }
  return Allocation(std::move(grants));
}

namespace {

OperatorPlan ss_exact(const NetworkState& state, OperatorId o) {
  OperatorPlan plan;
  plan.op = o;
  plan.users = state.users_of(o);
  if (plan.users.empty()) throw LookupError("operator has no users to optimize");
  const double share = state.operators()[state.operator_index(o)].share;
  const std::size_t n = plan.users.size();

  std::vector<std::vector<StationId>> feasible(n);
  double configurations = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t b = 0; b < state.num_stations(); ++b) {
      if (state.rate(plan.users[i], StationId{b}) > 0.0) feasible[i].push_back(StationId{b});
    }
    configurations *= static_cast<double>(feasible[i].size());
  }
  if (configurations > kEnumerationLimit) {
    throw SizeError("exact static-slicing enumeration needs " + std::to_string(configurations) +
                    " associations (limit 1e7)");
  }

  std::vector<std::size_t> digit(n, 0);
  std::vector<std::size_t> count(state.num_stations(), 0);
  double best = -INFINITY;
  std::vector<std::size_t> best_digit;
  while (true) {
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++count[feasible[i][digit[i]].value];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const StationId b = feasible[i][digit[i]];
      sum += std::log(share * state.rate(plan.users[i], b) / static_cast<double>(count[b.value]));
    }
    const double utility = sum / static_cast<double>(n);
    if (utility > best + 1e-12) {
      best = utility;
      best_digit = digit;
    }
    if (!detail::advance(digit, [&](std::size_t k) { return feasible[k].size(); })) break;
  }

  std::fill(count.begin(), count.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    plan.stations.push_back(feasible[i][best_digit[i]]);
    ++count[plan.stations.back().value];
  }
  for (std::size_t i = 0; i < n; ++i) {
    plan.fractions.push_back(share / static_cast<double>(count[plan.stations[i].value]));
  }
  plan.utility = best;
  return plan;
}

OperatorPlan ss_greedy(const NetworkState& state, OperatorId o) {
  OperatorPlan plan;
  plan.op = o;
  plan.users = state.users_of(o);
  if (plan.users.empty()) throw LookupError("operator has no users to optimize");
  const double share = state.operators()[state.operator_index(o)].share;

  // The operator alone on its slice: a single tenant of share 1 whose rates
  // are scaled by s_o. Equal weights make f^M there coincide with f^S.
  std::vector<User> users;
  RateMatrix rates(plan.users.size(), state.num_stations());
  for (std::size_t i = 0; i < plan.users.size(); ++i) {
    users.push_back(state.users()[plan.users[i]]);
    for (std::uint32_t b = 0; b < state.num_stations(); ++b) {
      rates(i, StationId{b}) = share * state.rate(plan.users[i], StationId{b});
    }
  }
  NetworkState slice({Operator{o, 1.0}}, std::move(users), state.num_stations(), std::move(rates));
  const SolverReport report = distributed_greedy(slice, Association{}, SolverParams{});

  std::vector<std::size_t> count(state.num_stations(), 0);
  for (std::size_t i = 0; i < plan.users.size(); ++i) {
    plan.stations.push_back(report.final_association[i]);
    ++count[plan.stations.back().value];
  }
  for (std::size_t i = 0; i < plan.users.size(); ++i) {
    plan.fractions.push_back(share / static_cast<double>(count[plan.stations[i].value]));
  }
  plan.utility = report.utility_trace.back();
  return plan;
}

}  // namespace

OperatorPlan ss_optimize(const NetworkState& state, OperatorId o, SsMethod method) {
  return method == SsMethod::exact ? ss_exact(state, o) : ss_greedy(state, o);
}

Association ss_optimize_all(const NetworkState& state, SsMethod method) {
  Association x(state.num_users());
  for (const Operator& op : state.operators()) {
    if (state.user_count(state.operator_index(op.id)) == 0) continue;
    const OperatorPlan plan = ss_optimize(state, op.id, method);
    for (std::size_t i = 0; i < plan.users.size(); ++i) x.assign(plan.users[i], plan.stations[i]);
  }
  return x;
}

}  // namespace mora
