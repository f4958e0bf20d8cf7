#pragma once

// Association optimizers. Every solver allocates with f^M once the
// association is fixed, and breaks ties on the lowest user id and then the
// lowest station id.

#include <cstddef>
#include <span>
#include <vector>

#include "mora/live_network.hpp"
#include "mora/model.hpp"

namespace mora {

struct SolverParams {
  /// Reassociation budget of the local largest-gain repair.
  std::size_t m = 3;
  /// Moves allowed before giving up; 0 means 100 * |U|.
  std::size_t max_iterations = 0;
  /// A move needs r_new / r_old > 1 + hysteresis.
  double hysteresis = 0.0;
};

struct SolverReport {
  Association final_association;
  Allocation final_allocation;
  std::vector<double> utility_trace;  // W before the first move, then after each move
  std::vector<double> gain_trace;     // r_new / r_old of each move (W-step moves excluded: NaN)
  std::size_t reassociation_count = 0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// W and selected gain per move, recorded by the live-network engines.
struct Trace {
  std::vector<double> utility;
  std::vector<double> gain;
};

struct BruteForceResult {
  Association association;
  Allocation allocation;
  double utility = 0.0;
  double configurations = 0.0;  // associations actually evaluated
};

/// Global optimum of W over all associations with f^M. Users that are
/// interchangeable (same operator and identical rate rows) are enumerated as
/// occupancy counts rather than permutations. Throws SizeError when more
/// than kEnumerationLimit configurations would be needed. Among optimal
/// associations (within 1e-12) the lexicographically smallest is returned.
BruteForceResult brute_force_mora(const NetworkState& state);

/// Best-response dynamics sweeping users in id order. An empty `x0` inserts
/// users one by one in id order at their best station given current loads.
SolverReport distributed_greedy(const NetworkState& state, const Association& x0,
                                const SolverParams& params);

/// Each iteration moves the single user with the globally largest gain.
SolverReport greedy_largest_gain(const NetworkState& state, const Association& x0,
                                 const SolverParams& params);

/// Each user on the station with the largest rate row entry (the rate is a
/// monotone proxy for SINR in Shannon mode).
Association sinr_association(const NetworkState& state);
/// Same, with an explicit users x stations SINR matrix.
Association sinr_association(const RateMatrix& sinr);

// Engines on the working copy. Return the number of moves made.
struct LiveOutcome {
  std::size_t moves = 0;
  bool converged = false;
};
LiveOutcome distributed_greedy(LiveNetwork& net, const SolverParams& params, Trace* trace = nullptr);
LiveOutcome greedy_largest_gain(LiveNetwork& net, const SolverParams& params,
                                Trace* trace = nullptr);
/// Places every unplaced user, in id order, at her best station.
void place_unplaced(LiveNetwork& net);

// ---------------------------------------------------------------------------
// Greedy Local Largest Gain: semi-online handling of joins, departures and
// rate changes with a bounded number of reassociations.
//
// After the triggering event, one largest-gain move is taken among users of
// the seed stations, then up to m-1 more among users of the two stations
// touched by the previous move ({c, p}), then one move maximizing W among
// the same candidates. Any step without an improving candidate ends the
// repair. m = 0 disables repairs entirely (pure online handling). A
// departure repair whose moves lower W in total is undone.

/// `state` contains v; `x` places everyone except v (x[v] == kUnassigned).
/// The report is indexed like `state`.
SolverReport gllg_join(const NetworkState& state, const Association& x, UserId v,
                       const SolverParams& params);
/// `state` and `x` contain v. The report is indexed like `state` with v
/// unassigned; utilities are over the remaining users.
SolverReport gllg_leave(const NetworkState& state, const Association& x, UserId v,
                        const SolverParams& params);
/// v's rate row changes to `new_rates`. If another station now beats her
/// current one she moves there, then the departure repair runs at the old
/// station and the join repair at the new one.
SolverReport gllg_move(const NetworkState& state, const Association& x, UserId v,
                       std::span<const double> new_rates, const SolverParams& params);

std::size_t gllg_on_join(LiveNetwork& net, UserId v, std::size_t op_index,
                         std::span<const double> rates, const SolverParams& params,
                         Trace* trace = nullptr);
std::size_t gllg_on_leave(LiveNetwork& net, UserId v, const SolverParams& params,
                          Trace* trace = nullptr);
std::size_t gllg_on_move(LiveNetwork& net, UserId v, std::span<const double> new_rates,
                         const SolverParams& params, Trace* trace = nullptr);

}  // namespace mora
