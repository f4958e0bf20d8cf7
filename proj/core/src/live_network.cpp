#include "mora/live_network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mora {

namespace {

double xlogx(double l) { return l > 0.0 ? l * std::log(l) : 0.0; }

}  // namespace

LiveNetwork::LiveNetwork(std::vector<Operator> operators, std::size_t num_stations)
    : operators_(std::move(operators)),
      num_stations_(num_stations),
      at_station_(num_stations),
      op_count_(operators_.size(), 0),
      placed_(operators_.size() * num_stations, 0),
      weight_(operators_.size(), 0.0),
      load_(num_stations, 0.0) {}

LiveNetwork LiveNetwork::from_state(const NetworkState& state, const Association& x) {
  if (x.size() != state.num_users()) throw ValidationError("association size mismatch");
  LiveNetwork net({state.operators().begin(), state.operators().end()}, state.num_stations());
  for (std::size_t u = 0; u < state.num_users(); ++u) {
    net.add_user(state.users()[u].id, state.operator_index_of_user(u), state.rates().row(u));
  }
  for (std::size_t u = 0; u < state.num_users(); ++u) {
    if (x[u] != kUnassigned) net.assign(state.users()[u].id, x[u]);
  }
  return net;
}

const LiveNetwork::Member& LiveNetwork::at(UserId id) const {
  auto it = members_.find(id);
  if (it == members_.end()) throw LookupError("unknown user id " + std::to_string(id.value));
  return it->second;
}

LiveNetwork::Member& LiveNetwork::at(UserId id) {
  auto it = members_.find(id);
  if (it == members_.end()) throw LookupError("unknown user id " + std::to_string(id.value));
  return it->second;
}

void LiveNetwork::refresh_load(StationId b) {
  double l = 0.0;
  for (std::size_t o = 0; o < operators_.size(); ++o) {
    l += weight_[o] * static_cast<double>(placed_[o * num_stations_ + b.value]);
  }
  load_[b.value] = l;
}

void LiveNetwork::refresh_weights(std::size_t op_index) {
  const std::size_t n = op_count_[op_index];
  weight_[op_index] = n == 0 ? 0.0 : operators_[op_index].share / static_cast<double>(n);
  for (std::uint32_t b = 0; b < num_stations_; ++b) refresh_load(StationId{b});
}

double LiveNetwork::load_without(StationId b, std::size_t op_index) const {
  double l = 0.0;
  for (std::size_t o = 0; o < operators_.size(); ++o) {
    std::size_t n = placed_[o * num_stations_ + b.value];
    if (o == op_index) --n;
    l += weight_[o] * static_cast<double>(n);
  }
  return l;
}

double LiveNetwork::load_with(StationId b, std::size_t op_index) const {
  return load_[b.value] + weight_[op_index];
}

void LiveNetwork::add_user(UserId id, std::size_t op_index, std::span<const double> rates) {
  if (members_.count(id) != 0) throw ValidationError("user " + std::to_string(id.value) + " already present");
  if (op_index >= operators_.size()) throw LookupError("operator index out of range");
  if (rates.size() != num_stations_) throw ValidationError("rate row has wrong length");
  Member m;
  m.op = op_index;
  m.rates.assign(rates.begin(), rates.end());
  members_.emplace(id, std::move(m));
  ++op_count_[op_index];
  refresh_weights(op_index);
}

void LiveNetwork::detach(UserId id, Member& m) {
  if (m.station == kUnassigned) return;
  auto& list = at_station_[m.station.value];
  auto it = std::find(list.begin(), list.end(), id);
  *it = list.back();
  list.pop_back();
  --placed_[m.op * num_stations_ + m.station.value];
  const StationId old = m.station;
  m.station = kUnassigned;
  refresh_load(old);
}

void LiveNetwork::attach(UserId id, Member& m, StationId b) {
  if (b.value >= num_stations_) throw LookupError("station index out of range");
  if (!(m.rates[b.value] > 0.0)) {
    throw ValidationError("user " + std::to_string(id.value) + " cannot reach station " +
                          std::to_string(b.value));
  }
  at_station_[b.value].push_back(id);
  ++placed_[m.op * num_stations_ + b.value];
  m.station = b;
  refresh_load(b);
}

void LiveNetwork::remove_user(UserId id) {
  auto it = members_.find(id);
  if (it == members_.end()) throw LookupError("unknown user id " + std::to_string(id.value));
  detach(id, it->second);
  const std::size_t op = it->second.op;
  members_.erase(it);
  --op_count_[op];
  refresh_weights(op);
}

void LiveNetwork::set_rates(UserId id, std::span<const double> rates) {
  Member& m = at(id);
  if (rates.size() != num_stations_) throw ValidationError("rate row has wrong length");
  m.rates.assign(rates.begin(), rates.end());
}

void LiveNetwork::assign(UserId id, StationId b) {
  Member& m = at(id);
  if (m.station != kUnassigned) throw ValidationError("user already placed; use move()");
  attach(id, m, b);
}

void LiveNetwork::move(UserId id, StationId b) {
  Member& m = at(id);
  if (m.station == kUnassigned) throw ValidationError("user not placed; use assign()");
  if (m.station == b) return;
  detach(id, m);
  attach(id, m, b);
  ++reassociations_;
}

void LiveNetwork::undo_move(UserId id, StationId b) {
  Member& m = at(id);
  if (m.station == kUnassigned || m.station == b || reassociations_ == 0) {
    throw ValidationError("no move of user " + std::to_string(id.value) + " to take back");
  }
  detach(id, m);
  attach(id, m, b);
  --reassociations_;
}

double LiveNetwork::rate(UserId id) const {
  const Member& m = at(id);
  if (m.station == kUnassigned) return 0.0;
  return weight_[m.op] * m.rates[m.station.value] / load_[m.station.value];
}

double LiveNetwork::rate_if_at(UserId id, StationId b) const {
  const Member& m = at(id);
  if (m.station == b) return rate(id);
  const double w = weight_[m.op];
  return w * m.rates[b.value] / load_with(b, m.op);
}

LiveNetwork::BestResponse LiveNetwork::best_response(UserId id) const {
  const Member& m = at(id);
  const double w = weight_[m.op];
  const StationId a = m.station;
  // Ratios compare c_b / (l_b + w) with c_a / l_a; w cancels.
  const double current = a == kUnassigned ? 0.0 : m.rates[a.value] / load_[a.value];
  BestResponse best;
  double best_value = 0.0;
  for (std::uint32_t b = 0; b < num_stations_; ++b) {
    if (StationId{b} == a || !(m.rates[b] > 0.0)) continue;
    const double value = m.rates[b] / (load_[b] + w);
    if (best.station == kUnassigned || value > best_value) {
      best.station = StationId{b};
      best_value = value;
    }
  }
  if (best.station != kUnassigned) {
    best.gain = current > 0.0 ? best_value / current : INFINITY;
  }
  return best;
}

StationId LiveNetwork::best_join_station(UserId id) const {
  const Member& m = at(id);
  const double w = weight_[m.op];
  StationId best = kUnassigned;
  double best_value = 0.0;
  for (std::uint32_t b = 0; b < num_stations_; ++b) {
    if (!(m.rates[b] > 0.0)) continue;
    const double value = m.rates[b] / (load_[b] + w);
    if (best == kUnassigned || value > best_value) {
      best = StationId{b};
      best_value = value;
    }
  }
  return best;
}

double LiveNetwork::utility() const {
  double total = 0.0;
  for (const auto& [id, m] : members_) {
    if (m.station == kUnassigned) {
      throw InfeasibleError("user " + std::to_string(id.value) + " is not placed");
    }
    const double w = weight_[m.op];
    total += w * std::log(w * m.rates[m.station.value] / load_[m.station.value]);
  }
  return total;
}

double LiveNetwork::utility_delta(UserId id, StationId b) const {
  // W = sum_u w_u ln(w_u c_u) - sum_b l_b ln l_b; a move touches one rate
  // term and two load terms.
  const Member& m = at(id);
  const StationId a = m.station;
  if (a == b) return 0.0;
  const double w = weight_[m.op];
  const double la = load_[a.value];
  const double la_after = load_without(a, m.op);
  const double lb = load_[b.value];
  const double lb_after = load_with(b, m.op);
  return w * std::log(m.rates[b.value] / m.rates[a.value]) -
         (xlogx(la_after) - xlogx(la) + xlogx(lb_after) - xlogx(lb));
}

std::vector<UserId> LiveNetwork::user_ids() const {
  std::vector<UserId> ids;
  ids.reserve(members_.size());
  for (const auto& entry : members_) ids.push_back(entry.first);
  return ids;
}

NetworkState LiveNetwork::snapshot() const {
  std::vector<User> users;
  users.reserve(members_.size());
  RateMatrix rates(members_.size(), num_stations_);
  std::size_t k = 0;
  for (const auto& [id, m] : members_) {
    users.push_back(User{id, operators_[m.op].id, std::nullopt});
    std::copy(m.rates.begin(), m.rates.end(), rates.row(k).begin());
    ++k;
  }
  return NetworkState(operators_, std::move(users), num_stations_, std::move(rates));
}

Association LiveNetwork::association() const {
  std::vector<StationId> x;
  x.reserve(members_.size());
  for (const auto& entry : members_) x.push_back(entry.second.station);
  return Association(std::move(x));
}

}  // namespace mora
