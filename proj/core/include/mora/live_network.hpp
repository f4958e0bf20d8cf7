#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "mora/model.hpp"

namespace mora {

/// Mutable working copy owned by a solver or simulator. Users join, leave,
/// change rates and move between stations; weights (s_o/|U_o|) and station
/// loads (sum of weights) are kept exact after every change, so per-event
/// work does not scale with a full rebuild of the instance.
///
/// Rates under the MORA allocation follow r_u = w_u c_ub / l_b.
class LiveNetwork {
 public:
  struct BestResponse {
    StationId station = kUnassigned;
    double gain = 0.0;  // r_new / r_old
  };

  LiveNetwork(std::vector<Operator> operators, std::size_t num_stations);

  /// Adds every user of `state` and places those with an assigned station
  /// in `x` (kUnassigned entries are added but left unplaced).
  static LiveNetwork from_state(const NetworkState& state, const Association& x);

  std::size_t num_stations() const { return num_stations_; }
  std::size_t num_operators() const { return operators_.size(); }
  std::size_t num_users() const { return members_.size(); }
  std::span<const Operator> operators() const { return operators_; }
  bool contains(UserId id) const { return members_.count(id) != 0; }

  /// New user, counted in her operator's weight but not yet on a station.
  void add_user(UserId id, std::size_t op_index, std::span<const double> rates);
  void remove_user(UserId id);
  void set_rates(UserId id, std::span<const double> rates);

  /// First placement of an unplaced user; not a reassociation.
  void assign(UserId id, StationId b);
  /// Reassociation of a placed user; counted.
  void move(UserId id, StationId b);
  /// Takes back an earlier move() of `id` from `b`; the reassociation no longer counts.
  void undo_move(UserId id, StationId b);
  std::size_t reassociations() const { return reassociations_; }

  StationId station_of(UserId id) const { return at(id).station; }
  std::size_t operator_of(UserId id) const { return at(id).op; }
  double weight_of(UserId id) const { return weight_[at(id).op]; }
  double capacity(UserId id, StationId b) const { return at(id).rates[b.value]; }
  std::span<const double> rates_of(UserId id) const { return at(id).rates; }
  double load(StationId b) const { return load_[b.value]; }
  std::size_t operator_users(std::size_t op_index) const { return op_count_[op_index]; }

  /// Current throughput (0 while unplaced).
  double rate(UserId id) const;
  /// Throughput the user would get at b != current station.
  double rate_if_at(UserId id, StationId b) const;
  /// Best alternative to the current station; lowest station id on ties.
  BestResponse best_response(UserId id) const;
  /// Station maximizing w c_b / (l_b + w) for an unplaced user.
  StationId best_join_station(UserId id) const;

  /// W over all placed users. Throws InfeasibleError if a present user is
  /// unplaced.
  double utility() const;
  /// W after moving `id` to `b` minus W now.
  double utility_delta(UserId id, StationId b) const;

  /// Present user ids in ascending order.
  std::vector<UserId> user_ids() const;
  /// Users placed at b, unordered.
  std::span<const UserId> users_at(StationId b) const { return at_station_[b.value]; }

  /// Present users as an immutable snapshot, plus their association.
  NetworkState snapshot() const;
  Association association() const;

 private:
  struct Member {
    std::size_t op = 0;
    StationId station = kUnassigned;
    std::vector<double> rates;
  };

  const Member& at(UserId id) const;
  Member& at(UserId id);
  void refresh_weights(std::size_t op_index);
  void refresh_load(StationId b);
  double load_without(StationId b, std::size_t op_index) const;
  double load_with(StationId b, std::size_t op_index) const;
  void detach(UserId id, Member& m);
  void attach(UserId id, Member& m, StationId b);

  std::vector<Operator> operators_;
  std::size_t num_stations_;
  std::map<UserId, Member> members_;
  std::vector<std::vector<UserId>> at_station_;
  std::vector<std::size_t> op_count_;            // users per operator
  std::vector<std::size_t> placed_;              // [op * stations + b]
  std::vector<double> weight_;                   // per operator
  std::vector<double> load_;                     // per station
  std::size_t reassociations_ = 0;
};

}  // namespace mora
