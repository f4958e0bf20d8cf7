#pragma once

// Instance generators with known optima, used by tests and `--verify`.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "mora/live_network.hpp"
#include "mora/model.hpp"

namespace mora {

/// (c_j, d_k, e_l) with each coordinate in [0, n).
struct Triple {
  std::uint32_t c = 0;
  std::uint32_t d = 0;
  std::uint32_t e = 0;
};

struct ThreeDmFamily {
  std::size_t n = 0;
  std::vector<Triple> triples;  // m = triples.size() >= n
};

/// One station per triple. The 2n users for the elements of D and E reach
/// the stations of the triples containing them at rate R; for every c_j
/// there are t_j - 1 dummy users reaching the type-j stations. Element
/// users belong to an operator of share n/m and dummies to one of share
/// (m-n)/m, which yields weights 1/(2m) and 1/m without filler users.
/// Throws ValidationError unless every element of C, D and E is covered.
NetworkState build_3dm_instance(const ThreeDmFamily& family, double rate);

/// W of the instance when a perfect matching exists:
/// (n/m) ln(R/2) + ((m-n)/m) ln R.
double three_dm_matching_utility(std::size_t n, std::size_t m, double rate);

/// Exhaustive search for n pairwise disjoint triples.
bool has_three_dm_matching(const ThreeDmFamily& family);

/// Uniformly drawn triples, redrawn until every element is covered.
ThreeDmFamily random_three_dm_family(std::size_t n, std::size_t m, std::mt19937_64& rng);

struct ScriptEvent {
  enum class Kind { join, leave };
  Kind kind = Kind::join;
  UserId user{};
};

/// Event script over one operator of share 1 and rate 1 everywhere.
struct OnlineScript {
  std::size_t num_stations = 0;
  std::vector<ScriptEvent> events;
};

/// |B|^2 joins, then every user whose id is not a multiple of |B| leaves.
/// Joins in id order land round robin, so the survivors share station 0.
OnlineScript online_worst_case_fixture(std::size_t num_stations);

/// Replays the script with no reassociations (m = 0).
LiveNetwork replay_online(const OnlineScript& script);

}  // namespace mora
