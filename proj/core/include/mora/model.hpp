#pragma once

// Optimization instance: operators with network shares, users with weights,
// base stations and the per-pair rate matrix, plus the association/allocation
// pair every solver produces and the log utilities they maximize.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mora/types.hpp"

namespace mora {

inline constexpr double kShareTolerance = 1e-9;
inline constexpr double kAllocationTolerance = 1e-9;

struct Operator {
  OperatorId id;
  double share = 0.0;  // in (0, 1]
};

struct User {
  UserId id;
  OperatorId op;
  std::optional<Point> position;
};

/// Dense users x stations matrix of achievable rates (bits/s).
class RateMatrix {
 public:
  RateMatrix() = default;
  RateMatrix(std::size_t users, std::size_t stations, double fill = 0.0);

  std::size_t users() const { return users_; }
  std::size_t stations() const { return stations_; }

  double operator()(std::size_t u, StationId b) const { return data_[u * stations_ + b.value]; }
  double& operator()(std::size_t u, StationId b) { return data_[u * stations_ + b.value]; }

  std::span<const double> row(std::size_t u) const {
    return {data_.data() + u * stations_, stations_};
  }
  std::span<double> row(std::size_t u) { return {data_.data() + u * stations_, stations_}; }

  void scale(double factor);

  bool operator==(const RateMatrix&) const = default;

 private:
  std::size_t users_ = 0;
  std::size_t stations_ = 0;
  std::vector<double> data_;
};

/// Immutable snapshot of the network. Users are kept sorted by id so that
/// user index order and id order coincide (lowest-id tie-breaks rely on it).
class NetworkState {
 public:
  NetworkState(std::vector<Operator> operators, std::vector<User> users, std::size_t num_stations,
               RateMatrix rates);

  std::span<const Operator> operators() const { return operators_; }
  std::span<const User> users() const { return users_; }
  std::size_t num_users() const { return users_.size(); }
  std::size_t num_operators() const { return operators_.size(); }
  std::size_t num_stations() const { return num_stations_; }
  const RateMatrix& rates() const { return rates_; }

  double rate(std::size_t u, StationId b) const { return rates_(u, b); }

  /// w_u = s_o / |U_o| for the operator of user index `u`.
  double weight(std::size_t u) const { return weights_[u]; }
  std::span<const double> weights() const { return weights_; }

  /// Operators holding a share but no users in this snapshot. They are left
  /// out of the weight computation and their share goes unused.
  std::span<const OperatorId> idle_operators() const { return idle_; }

  std::size_t index_of(UserId id) const;
  std::size_t operator_index(OperatorId id) const;
  std::size_t operator_index_of_user(std::size_t u) const { return user_op_[u]; }
  std::size_t user_count(std::size_t op_index) const { return op_counts_[op_index]; }
  std::vector<std::size_t> users_of(OperatorId id) const;

  /// Same network without user `id`; weights are recomputed.
  NetworkState without_user(UserId id) const;
  /// Same network with every rate multiplied by `factor`.
  NetworkState with_scaled_rates(double factor) const;

 private:
  std::vector<Operator> operators_;
  std::vector<User> users_;
  std::size_t num_stations_;
  RateMatrix rates_;
  std::vector<std::size_t> user_op_;
  std::vector<std::size_t> op_counts_;
  std::vector<double> weights_;
  std::vector<OperatorId> idle_;
};

/// The x matrix: one station per user, indexed like NetworkState::users().
/// kUnassigned is tolerated only where an operation documents it.
class Association {
 public:
  Association() = default;
  explicit Association(std::size_t num_users) : stations_(num_users, kUnassigned) {}
  explicit Association(std::vector<StationId> stations) : stations_(std::move(stations)) {}

  std::size_t size() const { return stations_.size(); }
  StationId operator[](std::size_t u) const { return stations_[u]; }
  void assign(std::size_t u, StationId b) { stations_[u] = b; }
  std::span<const StationId> stations() const { return stations_; }
  bool is_total() const;

  bool operator==(const Association&) const = default;
  bool lexicographically_less(const Association& other) const;

 private:
  std::vector<StationId> stations_;
};

/// The f matrix in sparse form: each user holds a fraction of exactly one
/// station's resources (f_ub = 0 everywhere else).
class Allocation {
 public:
  struct Grant {
    StationId station = kUnassigned;
    double fraction = 0.0;
    bool operator==(const Grant&) const = default;
  };

  Allocation() = default;
  explicit Allocation(std::vector<Grant> grants) : grants_(std::move(grants)) {}

  std::size_t size() const { return grants_.size(); }
  const Grant& operator[](std::size_t u) const { return grants_[u]; }
  Grant& operator[](std::size_t u) { return grants_[u]; }
  double fraction(std::size_t u, StationId b) const {
    return grants_[u].station == b ? grants_[u].fraction : 0.0;
  }
  /// Sum of fractions granted at every station.
  std::vector<double> station_totals(std::size_t num_stations) const;

  bool operator==(const Allocation&) const = default;

 private:
  std::vector<Grant> grants_;
};

/// Throws ValidationError unless x is total, in range and uses positive-rate
/// stations only.
void validate_association(const NetworkState& state, const Association& x);
/// Throws ValidationError unless f matches x, fractions lie in [0, 1] and
/// every station's total stays within 1 + kAllocationTolerance.
void validate_allocation(const NetworkState& state, const Association& x, const Allocation& f);

/// Per-user weights (same values as NetworkState::weights()).
std::vector<double> compute_weights(const NetworkState& state);

/// r_u = f_{u,x(u)} c_{u,x(u)}.
double user_rate(const NetworkState& state, const Association& x, const Allocation& f, UserId u);
double user_rate_at(const NetworkState& state, const Association& x, const Allocation& f,
                    std::size_t u);

/// W = sum_u w_u ln r_u (nats). Throws InfeasibleError on any zero rate.
double network_utility(const NetworkState& state, const Association& x, const Allocation& f);

/// U_o = (1/|U_o|) sum_{u in U_o} ln r_u. Throws LookupError for unknown or
/// user-less operators, InfeasibleError on zero rates.
double operator_utility(const NetworkState& state, const Association& x, const Allocation& f,
                        OperatorId o);

}  // namespace mora
