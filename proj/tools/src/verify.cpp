#include "mora_cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "mora/allocation.hpp"
#include "mora/rng.hpp"
#include "mora/solvers.hpp"

namespace mora::cli {

namespace {

using Check = std::function<std::optional<std::string>(const NetworkState&, const Association&, bool)>;

struct Property {
  std::string name;
  std::string suite;
  std::size_t max_users;
  std::size_t max_stations;
  std::size_t max_operators;
  std::size_t max_per_operator;  // 0 = no cap
  bool random_association;       // the check reads x; otherwise x is informational
  Check check;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

// Calls fn(x) for every association over feasible stations.
void for_each_association(const NetworkState& state, const std::function<void(const Association&)>& fn) {
  const std::size_t n = state.num_users();
  std::vector<std::vector<StationId>> feasible(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::uint32_t b = 0; b < state.num_stations(); ++b) {
      if (state.rate(u, StationId{b}) > 0.0) feasible[u].push_back(StationId{b});
    }
  }
  std::vector<std::size_t> digit(n, 0);
  Association x(n);
  while (true) {
    for (std::size_t u = 0; u < n; ++u) x.assign(u, feasible[u][digit[u]]);
    fn(x);
    std::size_t k = 0;
    while (k < n && ++digit[k] == feasible[k].size()) digit[k++] = 0;
    if (k == n) return;
  }
}

double mora_w(const NetworkState& state, const Association& x) {
  return network_utility(state, x, mora_allocation(state, x));
}

std::vector<double> rates_of(const NetworkState& state, const Association& x) {
  const Allocation f = mora_allocation(state, x);
  std::vector<double> r(state.num_users());
  for (std::size_t u = 0; u < r.size(); ++u) r[u] = user_rate_at(state, x, f, u);
  return r;
}

std::optional<std::string> allocation_sums(const NetworkState& state, const Association& x, bool corrupt) {
  Allocation fm = mora_allocation(state, x);
  if (corrupt) {
    const StationId b = x[0];
    double total = 0.0;
    for (std::size_t u = 0; u < fm.size(); ++u) total += fm.fraction(u, b);
    for (std::size_t u = 0; u < fm.size(); ++u) {
      if (fm[u].station == b) fm[u].fraction *= 1.5 / total;
    }
  }
  const auto mt = fm.station_totals(state.num_stations());
  std::vector<bool> occupied(state.num_stations(), false);
  for (std::size_t u = 0; u < x.size(); ++u) occupied[x[u].value] = true;
  for (std::size_t b = 0; b < mt.size(); ++b) {
    if (occupied[b] && std::abs(mt[b] - 1.0) > 1e-9) {
      return "f^M sums to " + fmt(mt[b]) + " at station " + std::to_string(b);
    }
  }
  const Allocation fs = ss_allocation(state, x);
  const std::size_t B = state.num_stations();
  std::vector<double> per_op(state.num_operators() * B, 0.0);
  for (std::size_t u = 0; u < x.size(); ++u) {
    per_op[state.operator_index_of_user(u) * B + x[u].value] += fs[u].fraction;
  }
  for (std::size_t o = 0; o < state.num_operators(); ++o) {
    for (std::size_t b = 0; b < B; ++b) {
      const double s = per_op[o * B + b];
      if (s > 0.0 && std::abs(s - state.operators()[o].share) > 1e-9) {
        return "f^S slice of operator index " + std::to_string(o) + " sums to " + fmt(s);
      }
    }
  }
  const auto st = fs.station_totals(B);
  for (std::size_t b = 0; b < B; ++b) {
    if (st[b] > 1.0 + 1e-9) return "f^S sums to " + fmt(st[b]) + " at station " + std::to_string(b);
  }
  return std::nullopt;
}

std::optional<std::string> mora_dominates_ss(const NetworkState& state, const Association& x, bool) {
  const Allocation fm = mora_allocation(state, x);
  const Allocation fs = ss_allocation(state, x);
  for (std::size_t o = 0; o < state.num_operators(); ++o) {
    if (state.user_count(o) == 0) continue;
    const OperatorId id = state.operators()[o].id;
    const double um = operator_utility(state, x, fm, id);
    const double us = operator_utility(state, x, fs, id);
    if (um < us - 1e-12) return "U_o(f^M) = " + fmt(um) + " < U_o(f^S) = " + fmt(us);
  }
  return std::nullopt;
}

std::optional<std::string> mora_allocation_optimal(const NetworkState& state, const Association& x, bool) {
  const Allocation fm = mora_allocation(state, x);
  const double w0 = network_utility(state, x, fm);
  constexpr double eps = 1e-4;
  for (std::size_t u = 0; u < x.size(); ++u) {
    for (std::size_t v = 0; v < x.size(); ++v) {
      if (u == v || x[u] != x[v] || fm[v].fraction <= eps) continue;
      Allocation f = fm;
      f[u].fraction += eps;
      f[v].fraction -= eps;
      const double w = network_utility(state, x, f);
      if (w > w0 + 1e-12) return "moving " + fmt(eps) + " of resource raises W by " + fmt(w - w0);
    }
  }
  return std::nullopt;
}

std::optional<std::string> operator_bounds(const NetworkState& state, const Association&, bool) {
  const BruteForceResult opt = brute_force_mora(state);
  for (std::size_t o = 0; o < state.num_operators(); ++o) {
    if (state.user_count(o) == 0) continue;
    const OperatorId id = state.operators()[o].id;
    const double u_star = operator_utility(state, opt.association, opt.allocation, id);
    const std::vector<std::size_t> mine = state.users_of(id);

    // Every association of o's users, everyone else frozen.
    std::vector<std::size_t> digit(mine.size(), 0);
    Association x = opt.association;
    while (true) {
      bool feasible = true;
      for (std::size_t i = 0; i < mine.size(); ++i) {
        const StationId b{static_cast<std::uint32_t>(digit[i])};
        feasible = feasible && state.rate(mine[i], b) > 0.0;
        x.assign(mine[i], b);
      }
      if (feasible) {
        const double u_dev = operator_utility(state, x, mora_allocation(state, x), id);
        if (u_star - u_dev < -1.0 - 1e-9) {
          return "unilateral deviation gains operator " + std::to_string(id.value) + " " + fmt(u_dev - u_star);
        }
      }
      std::size_t k = 0;
      while (k < mine.size() && ++digit[k] == state.num_stations()) digit[k++] = 0;
      if (k == mine.size()) break;
    }

    const OperatorPlan ss = ss_optimize(state, id, SsMethod::exact);
    if (u_star - ss.utility < -1.0 - 1e-9) {
      return "operator " + std::to_string(id.value) + " loses " + fmt(ss.utility - u_star) + " against its SS optimum";
    }
  }
  return std::nullopt;
}

std::optional<std::string> pareto(const NetworkState& state, const Association&, bool) {
  const BruteForceResult opt = brute_force_mora(state);
  const std::vector<double> r0 = rates_of(state, opt.association);
  std::optional<std::string> bad;
  for_each_association(state, [&](const Association& x) {
    if (bad) return;
    const std::vector<double> r = rates_of(state, x);
    bool better = false, worse = false;
    for (std::size_t u = 0; u < r.size(); ++u) {
      if (r[u] > r0[u] * (1.0 + 1e-9)) better = true;
      if (r[u] < r0[u] * (1.0 - 1e-9)) worse = true;
    }
    if (better && !worse) bad = "an association improves some user and harms none";
  });
  return bad;
}

std::optional<std::string> dg_bound(const NetworkState& state, const Association&, bool) {
  const SolverReport dg = distributed_greedy(state, Association{}, SolverParams{});
  if (!dg.converged) return std::nullopt;
  const double w = mora_w(state, dg.final_association);
  const double w_opt = brute_force_mora(state).utility;
  if (w < w_opt - 1.0 - 1e-9) return "DG equilibrium W = " + fmt(w) + " below W_opt - 1 = " + fmt(w_opt - 1.0);
  return std::nullopt;
}

std::optional<std::string> glg_trace(const NetworkState& state, const Association&, bool) {
  const SolverReport glg = greedy_largest_gain(state, Association{}, SolverParams{});
  const double w_opt = brute_force_mora(state).utility;
  double max_w = 0.0;
  for (std::size_t u = 0; u < state.num_users(); ++u) max_w = std::max(max_w, state.weight(u));
  const auto& t = glg.utility_trace;
  for (std::size_t i = 0; i < glg.gain_trace.size(); ++i) {
    if (glg.gain_trace[i] >= std::exp(1.0) && !(t[i + 1] > t[i])) {
      return "iteration " + std::to_string(i) + " with gain " + fmt(glg.gain_trace[i]) + " did not raise W";
    }
  }
  bool entered = false;
  for (double w : t) {
    if (w >= w_opt - 2.0 - 1e-9) entered = true;
    if (entered && w < w_opt - (2.0 + max_w) - 1e-9) return "trace fell to " + fmt(w) + " after entering the 2-nat region";
  }
  if (glg.converged && t.back() < w_opt - 2.0 - 1e-9) return "terminal W " + fmt(t.back()) + " below W_opt - 2";
  return std::nullopt;
}

std::optional<std::string> brute_exhaustive(const NetworkState& state, const Association&, bool) {
  const BruteForceResult opt = brute_force_mora(state);
  double best = -INFINITY;
  for_each_association(state, [&](const Association& x) { best = std::max(best, mora_w(state, x)); });
  if (std::abs(best - opt.utility) > 1e-9) return "brute force " + fmt(opt.utility) + " vs enumeration " + fmt(best);
  if (std::abs(mora_w(state, opt.association) - opt.utility) > 1e-9) return "reported W does not match its association";
  return std::nullopt;
}

std::optional<std::string> solvers_below_optimum(const NetworkState& state, const Association&, bool) {
  const double w_opt = brute_force_mora(state).utility;
  const SolverParams params;
  const double w_dg = mora_w(state, distributed_greedy(state, Association{}, params).final_association);
  const double w_glg = mora_w(state, greedy_largest_gain(state, Association{}, params).final_association);
  // GLLG: users join one at a time in id order.
  Association x(state.num_users());
  for (std::size_t u = 0; u < state.num_users(); ++u) {
    std::vector<User> users(state.users().begin(), state.users().begin() + static_cast<std::ptrdiff_t>(u + 1));
    RateMatrix rates(u + 1, state.num_stations());
    for (std::size_t k = 0; k <= u; ++k) std::copy_n(state.rates().row(k).begin(), state.num_stations(), rates.row(k).begin());
    const NetworkState partial({state.operators().begin(), state.operators().end()}, std::move(users),
                               state.num_stations(), std::move(rates));
    std::vector<StationId> prior(x.stations().begin(), x.stations().begin() + static_cast<std::ptrdiff_t>(u + 1));
    prior[u] = kUnassigned;
    const SolverReport rep = gllg_join(partial, Association(std::move(prior)), state.users()[u].id, params);
    for (std::size_t k = 0; k <= u; ++k) x.assign(k, rep.final_association[k]);
  }
  const double w_gllg = mora_w(state, x);
  for (auto [name, w] : {std::pair{"DG", w_dg}, {"GLG", w_glg}, {"GLLG", w_gllg}}) {
    if (w > w_opt + 1e-9) return std::string(name) + " W = " + fmt(w) + " exceeds brute force " + fmt(w_opt);
  }
  return std::nullopt;
}

std::optional<std::string> dg_no_improving_move(const NetworkState& state, const Association&, bool) {
  const SolverReport dg = distributed_greedy(state, Association{}, SolverParams{});
  if (!dg.converged) return std::nullopt;
  const Association& x = dg.final_association;
  const std::vector<double> r = rates_of(state, x);
  for (std::size_t u = 0; u < x.size(); ++u) {
    for (std::uint32_t b = 0; b < state.num_stations(); ++b) {
      if (StationId{b} == x[u] || !(state.rate(u, StationId{b}) > 0.0)) continue;
      Association y = x;
      y.assign(u, StationId{b});
      const double ru = rates_of(state, y)[u];
      if (ru > r[u] * (1.0 + 1e-9)) {
        return "user " + std::to_string(state.users()[u].id.value) + " gains by moving to station " + std::to_string(b);
      }
    }
  }
  return std::nullopt;
}

const std::vector<Property>& properties() {
  static const std::vector<Property> all = {
      {"allocation_sums", "theorems", 10, 4, 3, 0, true, allocation_sums},
      {"mora_dominates_ss", "theorems", 10, 4, 3, 0, true, mora_dominates_ss},
      {"mora_allocation_optimal", "theorems", 10, 4, 3, 0, true, mora_allocation_optimal},
      {"operator_bounds", "theorems", 8, 3, 3, 4, false, operator_bounds},
      {"pareto", "theorems", 6, 3, 3, 0, false, pareto},
      {"dg_bound", "theorems", 8, 3, 3, 0, false, dg_bound},
      {"glg_trace", "theorems", 8, 3, 3, 0, false, glg_trace},
      {"brute_exhaustive", "oracle", 7, 3, 3, 0, false, brute_exhaustive},
      {"solvers_below_optimum", "oracle", 8, 3, 3, 0, false, solvers_below_optimum},
      {"dg_no_improving_move", "oracle", 8, 3, 3, 0, false, dg_no_improving_move},
  };
  return all;
}

NetworkState draw_instance(std::mt19937_64& rng, const Property& p) {
  return random_instance(rng, p.max_users, p.max_stations, p.max_operators);
}

bool within_cap(const NetworkState& s, std::size_t cap) {
  if (cap == 0) return true;
  for (std::size_t o = 0; o < s.num_operators(); ++o) {
    if (s.user_count(o) > cap) return false;
  }
  return true;
}

Association random_association(std::mt19937_64& rng, const NetworkState& state) {
  Association x(state.num_users());
  for (std::size_t u = 0; u < state.num_users(); ++u) {
    std::vector<StationId> ok;
    for (std::uint32_t b = 0; b < state.num_stations(); ++b) {
      if (state.rate(u, StationId{b}) > 0.0) ok.push_back(StationId{b});
    }
    x.assign(u, ok[std::uniform_int_distribution<std::size_t>(0, ok.size() - 1)(rng)]);
  }
  return x;
}

}  // namespace

NetworkState random_instance(std::mt19937_64& rng, std::size_t max_users, std::size_t max_stations,
                             std::size_t max_operators) {
  std::uniform_int_distribution<std::size_t> n_users(1, max_users), n_stations(1, max_stations),
      n_ops(1, max_operators);
  const std::size_t U = n_users(rng), B = n_stations(rng), O = n_ops(rng);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<Operator> ops;
  double total = 0.0;
  for (std::size_t o = 0; o < O; ++o) {
    ops.push_back({OperatorId{static_cast<std::uint32_t>(o)}, unit(rng)});
    total += ops.back().share;
  }
  for (auto& o : ops) o.share /= total;
  std::uniform_int_distribution<std::uint32_t> pick_op(0, static_cast<std::uint32_t>(O - 1));
  std::uniform_real_distribution<double> rate(1.0, 100.0);
  std::bernoulli_distribution zero(0.2);
  std::uniform_int_distribution<std::uint32_t> pick_b(0, static_cast<std::uint32_t>(B - 1));
  std::vector<User> users;
  RateMatrix rates(U, B);
  for (std::size_t u = 0; u < U; ++u) {
    users.push_back({UserId{u}, OperatorId{pick_op(rng)}, std::nullopt});
    bool any = false;
    for (std::uint32_t b = 0; b < B; ++b) {
      const double c = rate(rng);
      if (!zero(rng)) {
        rates(u, StationId{b}) = c;
        any = true;
      }
    }
    if (!any) rates(u, StationId{pick_b(rng)}) = rate(rng);
  }
  return NetworkState(std::move(ops), std::move(users), B, std::move(rates));
}

VerifyReport run_verify(const std::string& suite, std::uint64_t seed, std::size_t instances, bool corrupt) {
  if (suite != "theorems" && suite != "oracle" && suite != "all") {
    throw ConfigError("unknown verify suite '" + suite + "' (theorems|oracle|all)");
  }
  if (instances == 0) throw ConfigError("--instances must be at least 1");
  VerifyReport report;
  const auto& props = properties();
  for (std::size_t pi = 0; pi < props.size(); ++pi) {
    const Property& p = props[pi];
    if (suite != "all" && suite != p.suite) continue;
    PropertyOutcome outcome{p.name, 0, 0};
    for (std::size_t i = 0; i < instances; ++i) {
      std::mt19937_64 rng(derive_seed(seed, pi, i));
      NetworkState state = draw_instance(rng, p);
      while (!within_cap(state, p.max_per_operator)) state = draw_instance(rng, p);
      const Association x = p.random_association ? random_association(rng, state) : Association(state.num_users());
      const bool inject = corrupt && p.name == "allocation_sums" && i == 0;
      const auto bad = p.check(state, x, inject);
      ++outcome.checked;
      if (!bad) continue;
      ++outcome.violations;
      if (!report.counterexample) {
        Association shown = x;
        if (!p.random_association) shown = brute_force_mora(state).association;
        report.counterexample =
            Counterexample{p.suite, p.name, seed, i, (inject ? "self-test injection: " : "") + *bad, state, shown};
      }
    }
    report.properties.push_back(outcome);
  }
  return report;
}

std::optional<std::string> recheck(const std::string& property, const NetworkState& state, const Association& x) {
  for (const Property& p : properties()) {
    if (p.name == property) return p.check(state, x, false);
  }
  throw ConfigError("unknown property '" + property + "'");
}

}  // namespace mora::cli
