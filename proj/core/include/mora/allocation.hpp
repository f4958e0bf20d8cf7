#pragma once

// Closed-form per-station allocations for a fixed association, and the
// per-operator association optimization under static slicing.

#include <cstddef>
#include <vector>

#include "mora/model.hpp"

namespace mora {

/// f^M: each user gets w_u / (sum of weights at her station).
Allocation mora_allocation(const NetworkState& state, const Association& x);

/// f^S: operator o owns s_o of every station, split equally among its users
/// there. Slices of operators absent from a station stay unused.
Allocation ss_allocation(const NetworkState& state, const Association& x);

enum class SsMethod { exact, greedy };

/// Association of one operator's users maximizing U_o inside its fixed slice.
struct OperatorPlan {
  OperatorId op;
  std::vector<std::size_t> users;    // indices into NetworkState::users()
  std::vector<StationId> stations;   // parallel to `users`
  std::vector<double> fractions;     // f^S fractions, parallel to `users`
  double utility = 0.0;              // U_o under static slicing
};

inline constexpr double kEnumerationLimit = 1e7;

/// exact: full enumeration (throws SizeError past kEnumerationLimit
/// candidate associations); greedy: Distributed Greedy on the operator alone
/// with rates scaled by its share.
OperatorPlan ss_optimize(const NetworkState& state, OperatorId o, SsMethod method);

/// Combined static-slicing association (every operator optimizes its own
/// users independently).
Association ss_optimize_all(const NetworkState& state, SsMethod method);

}  // namespace mora
