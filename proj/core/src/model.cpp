#include "mora/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mora {

RateMatrix::RateMatrix(std::size_t users, std::size_t stations, double fill)
    : users_(users), stations_(stations), data_(users * stations, fill) {}

void RateMatrix::scale(double factor) {
  for (double& c : data_) c *= factor;
}

NetworkState::NetworkState(std::vector<Operator> operators, std::vector<User> users,
                           std::size_t num_stations, RateMatrix rates)
    : operators_(std::move(operators)),
      users_(std::move(users)),
      num_stations_(num_stations),
      rates_(std::move(rates)) {
  if (operators_.empty()) throw ValidationError("network has no operators");
  double total_share = 0.0;
  for (std::size_t i = 0; i < operators_.size(); ++i) {
    const double s = operators_[i].share;
    if (!(s > 0.0 && s <= 1.0 + kShareTolerance)) {
      throw ValidationError("operator " + std::to_string(operators_[i].id.value) +
                            " has share outside (0, 1]");
    }
    total_share += s;
    for (std::size_t j = 0; j < i; ++j) {
      if (operators_[j].id == operators_[i].id) throw ValidationError("duplicate operator id");
    }
  }
  if (std::abs(total_share - 1.0) > kShareTolerance) {
    throw ValidationError("operator shares sum to " + std::to_string(total_share) + ", not 1");
  }
  if (rates_.users() != users_.size() || rates_.stations() != num_stations_) {
    throw ValidationError("rate matrix dimensions do not match users x stations");
  }

  user_op_.resize(users_.size());
  op_counts_.assign(operators_.size(), 0);
  for (std::size_t u = 0; u < users_.size(); ++u) {
    if (u > 0 && !(users_[u - 1].id < users_[u].id)) {
      throw ValidationError("user ids must be unique and sorted ascending");
    }
    user_op_[u] = operator_index(users_[u].op);
    ++op_counts_[user_op_[u]];
    bool reachable = false;
    for (double c : rates_.row(u)) {
      if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("rates must be finite and >= 0");
      reachable = reachable || c > 0.0;
    }
    if (!reachable) {
      throw InfeasibleError("user " + std::to_string(users_[u].id.value) +
                            " has no station with a positive rate");
    }
  }

  weights_.resize(users_.size());
  for (std::size_t u = 0; u < users_.size(); ++u) {
    const std::size_t o = user_op_[u];
    weights_[u] = operators_[o].share / static_cast<double>(op_counts_[o]);
  }
  for (std::size_t o = 0; o < operators_.size(); ++o) {
    if (op_counts_[o] == 0) idle_.push_back(operators_[o].id);
  }
}

std::size_t NetworkState::index_of(UserId id) const {
  auto it = std::lower_bound(users_.begin(), users_.end(), id,
                             [](const User& u, UserId key) { return u.id < key; });
  if (it == users_.end() || it->id != id) {
    throw LookupError("unknown user id " + std::to_string(id.value));
  }
  return static_cast<std::size_t>(it - users_.begin());
}

std::size_t NetworkState::operator_index(OperatorId id) const {
  for (std::size_t i = 0; i < operators_.size(); ++i) {
    if (operators_[i].id == id) return i;
  }
  throw LookupError("unknown operator id " + std::to_string(id.value));
}

std::vector<std::size_t> NetworkState::users_of(OperatorId id) const {
  const std::size_t o = operator_index(id);
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < users_.size(); ++u) {
    if (user_op_[u] == o) out.push_back(u);
  }
  return out;
}

NetworkState NetworkState::without_user(UserId id) const {
  const std::size_t gone = index_of(id);
  std::vector<User> users;
  users.reserve(users_.size() - 1);
  RateMatrix rates(users_.size() - 1, num_stations_);
  for (std::size_t u = 0, k = 0; u < users_.size(); ++u) {
    if (u == gone) continue;
    users.push_back(users_[u]);
    std::copy(rates_.row(u).begin(), rates_.row(u).end(), rates.row(k).begin());
    ++k;
  }
  return NetworkState(operators_, std::move(users), num_stations_, std::move(rates));
}

NetworkState NetworkState::with_scaled_rates(double factor) const {
  RateMatrix rates = rates_;
  rates.scale(factor);
  return NetworkState(operators_, users_, num_stations_, std::move(rates));
}

bool Association::is_total() const {
  return std::none_of(stations_.begin(), stations_.end(),
                      [](StationId b) { return b == kUnassigned; });
}

bool Association::lexicographically_less(const Association& other) const {
  return std::lexicographical_compare(stations_.begin(), stations_.end(), other.stations_.begin(),
                                      other.stations_.end());
}

std::vector<double> Allocation::station_totals(std::size_t num_stations) const {
  std::vector<double> totals(num_stations, 0.0);
  for (const Grant& g : grants_) {
    if (g.station != kUnassigned && g.station.value < num_stations) {
      totals[g.station.value] += g.fraction;
    }
  }
  return totals;
}

void validate_association(const NetworkState& state, const Association& x) {
  if (x.size() != state.num_users()) throw ValidationError("association size mismatch");
  for (std::size_t u = 0; u < x.size(); ++u) {
    const StationId b = x[u];
    if (b == kUnassigned) throw ValidationError("association is not total");
    if (b.value >= state.num_stations()) throw ValidationError("station index out of range");
    if (!(state.rate(u, b) > 0.0)) {
      throw ValidationError("user " + std::to_string(state.users()[u].id.value) +
                            " associated with a zero-rate station");
    }
  }
}

void validate_allocation(const NetworkState& state, const Association& x, const Allocation& f) {
  if (f.size() != state.num_users()) throw ValidationError("allocation size mismatch");
  for (std::size_t u = 0; u < f.size(); ++u) {
    const auto& g = f[u];
    if (!(g.fraction >= 0.0 && g.fraction <= 1.0 + kAllocationTolerance)) {
      throw ValidationError("allocation fraction outside [0, 1]");
    }
    if (g.fraction > 0.0 && g.station != x[u]) {
      throw ValidationError("allocation grants resources at a station the user is not on");
    }
  }
  for (double total : f.station_totals(state.num_stations())) {
    if (total > 1.0 + kAllocationTolerance) {
      throw ValidationError("station allocation sums to " + std::to_string(total) + " > 1");
    }
  }
}

std::vector<double> compute_weights(const NetworkState& state) {
  return {state.weights().begin(), state.weights().end()};
}

double user_rate_at(const NetworkState& state, const Association& x, const Allocation& f,
                    std::size_t u) {
  const StationId b = x[u];
  if (b == kUnassigned) return 0.0;
  return f.fraction(u, b) * state.rate(u, b);
}

double user_rate(const NetworkState& state, const Association& x, const Allocation& f, UserId u) {
  return user_rate_at(state, x, f, state.index_of(u));
}

namespace {

double log_rate_or_throw(const NetworkState& state, const Association& x, const Allocation& f,
                         std::size_t u) {
  const double r = user_rate_at(state, x, f, u);
  if (!(r > 0.0)) {
    throw InfeasibleError("user " + std::to_string(state.users()[u].id.value) +
                          " has zero rate; log utility is undefined");
  }
  return std::log(r);
}

}  // namespace

double network_utility(const NetworkState& state, const Association& x, const Allocation& f) {
  validate_association(state, x);
  validate_allocation(state, x, f);
  double w = 0.0;
  for (std::size_t u = 0; u < state.num_users(); ++u) {
    w += state.weight(u) * log_rate_or_throw(state, x, f, u);
  }
  return w;
}

double operator_utility(const NetworkState& state, const Association& x, const Allocation& f,
                        OperatorId o) {
  validate_association(state, x);
  validate_allocation(state, x, f);
  const auto members = state.users_of(o);
  if (members.empty()) {
    throw LookupError("operator " + std::to_string(o.value) + " has no users in this snapshot");
  }
  double sum = 0.0;
  for (std::size_t u : members) sum += log_rate_or_throw(state, x, f, u);
  return sum / static_cast<double>(members.size());
}

}  // namespace mora
