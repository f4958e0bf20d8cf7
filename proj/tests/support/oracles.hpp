#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's allocation, utility or solver code: loads, weights and rates
// are recomputed from the raw rate matrix.

#include <cstdint>
#include <random>
#include <vector>

#include "mora/fixtures.hpp"
#include "mora/model.hpp"

namespace oracle {

using Stations = std::vector<std::uint32_t>;

/// w_u = s_o / |U_o|, counted directly.
std::vector<double> weights(const mora::NetworkState& s);

/// W under f^M for association x, or -inf if some user sits on a zero rate.
double mora_utility(const mora::NetworkState& s, const Stations& x);
/// Per-user throughput under f^M.
std::vector<double> mora_rates(const mora::NetworkState& s, const Stations& x);
/// Per-user throughput under f^S.
std::vector<double> ss_rates(const mora::NetworkState& s, const Stations& x);
/// (1/|U_o|) sum ln r_u over operator index o.
double operator_mean_log(const mora::NetworkState& s, const std::vector<double>& rates, std::size_t o);

struct Optimum {
  double utility = 0.0;
  Stations x;  // lexicographically smallest optimum
};
/// Plain |B|^|U| enumeration.
Optimum enumerate_optimum(const mora::NetworkState& s);

/// Best SS utility of operator index o by enumerating its users' stations.
double ss_operator_optimum(const mora::NetworkState& s, std::size_t o);

Stations to_stations(const mora::Association& x);
mora::Association to_association(const Stations& x);

/// Users and stations uniform in [1, max]; operators' shares normalized
/// uniform draws; each rate zero with probability `zero_p` (at least one
/// positive entry per user).
mora::NetworkState random_state(std::mt19937_64& rng, std::size_t max_users, std::size_t max_stations,
                                std::size_t max_operators, double zero_p = 0.2,
                                std::size_t min_users = 1);

/// Exhaustive search over n-subsets of the triples.
bool has_matching(const mora::ThreeDmFamily& family);

}  // namespace oracle
