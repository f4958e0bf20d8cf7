#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "mora/analysis.hpp"
#include "mora/rng.hpp"
#include "streams.hpp"

namespace mora {

Policy parse_policy(const std::string& name) {
  static const std::map<std::string, Policy> names = {
      {"gllg", Policy::gllg},   {"online", Policy::online},   {"dg", Policy::dg},
      {"glg", Policy::glg},     {"dg_ss", Policy::dg_ss},     {"sinr_ss", Policy::sinr_ss},
      {"brute", Policy::brute}};
  auto it = names.find(name);
  if (it == names.end()) {
    throw ConfigError("unknown policy '" + name + "' (gllg|online|dg|glg|dg_ss|sinr_ss|brute)");
  }
  return it->second;
}

std::string policy_name(Policy policy) {
  switch (policy) {
    case Policy::gllg: return "gllg";
    case Policy::online: return "online";
    case Policy::dg: return "dg";
    case Policy::glg: return "glg";
    case Policy::dg_ss: return "dg_ss";
    case Policy::sinr_ss: return "sinr_ss";
    case Policy::brute: return "brute";
  }
  return "gllg";
}

namespace {

// Mean ln r per operator over the placed users of `net`; NaN where empty.
std::vector<double> operator_log_means(const LiveNetwork& net) {
  std::vector<double> sum(net.num_operators(), 0.0);
  std::vector<std::size_t> count(net.num_operators(), 0);
  for (UserId id : net.user_ids()) {
    const std::size_t o = net.operator_of(id);
    sum[o] += std::log(net.rate(id));
    ++count[o];
  }
  for (std::size_t o = 0; o < sum.size(); ++o) sum[o] = count[o] ? sum[o] / static_cast<double>(count[o]) : NAN;
  return sum;
}

class Engine {
 public:
  virtual ~Engine() = default;
  virtual void join(UserId id, std::size_t op, std::span<const double> rates, std::span<const double> sinr) = 0;
  virtual void leave(UserId id) = 0;
  virtual void update(UserId id, std::span<const double> rates, std::span<const double> sinr) = 0;
  virtual void settle() {}
  virtual double utility() const = 0;
  virtual std::vector<double> operator_utility() const = 0;
  virtual double rate(UserId id) const = 0;
  virtual std::size_t reassociations() const = 0;
};

// All operators share every station (MORA allocation).
class SharedEngine final : public Engine {
 public:
  SharedEngine(std::vector<Operator> ops, std::size_t stations, Policy policy, SolverParams params)
      : net_(std::move(ops), stations), policy_(policy), params_(params) {
    if (policy_ == Policy::online) params_.m = 0;
  }

  void join(UserId id, std::size_t op, std::span<const double> rates, std::span<const double>) override {
    if (policy_ == Policy::gllg || policy_ == Policy::online) {
      gllg_on_join(net_, id, op, rates, params_);
      return;
    }
    net_.add_user(id, op, rates);
    net_.assign(id, net_.best_join_station(id));
  }

  void leave(UserId id) override {
    if (policy_ == Policy::gllg || policy_ == Policy::online) {
      gllg_on_leave(net_, id, params_);
      return;
    }
    net_.remove_user(id);
  }

  void update(UserId id, std::span<const double> rates, std::span<const double>) override {
    if (policy_ == Policy::gllg || policy_ == Policy::online) {
      gllg_on_move(net_, id, rates, params_);
      return;
    }
    net_.set_rates(id, rates);
  }

  void settle() override {
    switch (policy_) {
      case Policy::dg: distributed_greedy(net_, params_); break;
      case Policy::glg: greedy_largest_gain(net_, params_); break;
      case Policy::brute: {
        if (net_.num_users() == 0) break;
        const NetworkState state = net_.snapshot();
        const BruteForceResult best = brute_force_mora(state);
        for (std::size_t u = 0; u < state.num_users(); ++u) net_.move(state.users()[u].id, best.association[u]);
        break;
      }
      default: break;
    }
  }

  double utility() const override { return net_.num_users() ? net_.utility() : 0.0; }
  std::vector<double> operator_utility() const override { return operator_log_means(net_); }
  double rate(UserId id) const override { return net_.rate(id); }
  std::size_t reassociations() const override { return net_.reassociations(); }

 private:
  LiveNetwork net_;
  Policy policy_;
  SolverParams params_;
};

// Static slicing: each operator alone on its slice, a single tenant of
// share 1 with rates scaled by s_o.
class SlicedEngine final : public Engine {
 public:
  SlicedEngine(const std::vector<Operator>& ops, std::size_t stations, Policy policy, SolverParams params)
      : policy_(policy), params_(params) {
    for (const Operator& op : ops) {
      shares_.push_back(op.share);
      slices_.emplace_back(std::vector<Operator>{Operator{op.id, 1.0}}, stations);
    }
  }

  void join(UserId id, std::size_t op, std::span<const double> rates, std::span<const double> sinr) override {
    LiveNetwork& net = slices_[op];
    net.add_user(id, 0, scaled(op, rates));
    net.assign(id, policy_ == Policy::sinr_ss ? strongest(net, id, sinr) : net.best_join_station(id));
    owner_[id] = op;
  }

  void leave(UserId id) override {
    slices_[owner_.at(id)].remove_user(id);
    owner_.erase(id);
  }

  void update(UserId id, std::span<const double> rates, std::span<const double> sinr) override {
    LiveNetwork& net = slices_[owner_.at(id)];
    net.set_rates(id, scaled(owner_.at(id), rates));
    if (policy_ == Policy::sinr_ss) net.move(id, strongest(net, id, sinr));
  }

  void settle() override {
    if (policy_ != Policy::dg_ss) return;
    for (LiveNetwork& net : slices_) distributed_greedy(net, params_);
  }

  double utility() const override {
    double w = 0.0;
    for (std::size_t o = 0; o < slices_.size(); ++o) {
      if (slices_[o].num_users() > 0) w += shares_[o] * slices_[o].utility();
    }
    return w;
  }

  std::vector<double> operator_utility() const override {
    std::vector<double> out;
    for (const LiveNetwork& net : slices_) out.push_back(net.num_users() ? net.utility() : NAN);
    return out;
  }

  double rate(UserId id) const override { return slices_[owner_.at(id)].rate(id); }

  std::size_t reassociations() const override {
    std::size_t n = 0;
    for (const LiveNetwork& net : slices_) n += net.reassociations();
    return n;
  }

 private:
  std::vector<double> scaled(std::size_t op, std::span<const double> rates) const {
    std::vector<double> out(rates.begin(), rates.end());
    for (double& r : out) r *= shares_[op];
    return out;
  }

  static StationId strongest(const LiveNetwork& net, UserId id, std::span<const double> sinr) {
    StationId best = kUnassigned;
    for (std::uint32_t b = 0; b < sinr.size(); ++b) {
      if (!(net.capacity(id, StationId{b}) > 0.0)) continue;
      if (best == kUnassigned || sinr[b] > sinr[best.value]) best = StationId{b};
    }
    return best;
  }

  Policy policy_;
  SolverParams params_;
  std::vector<double> shares_;
  std::vector<LiveNetwork> slices_;
  std::map<UserId, std::size_t> owner_;
};

struct Present {
  std::size_t op = 0;
  Point position;
  bool covered = false;
  std::vector<double> rates;
};

}  // namespace

MetricsRecord run_scenario(const ScenarioConfig& config, Policy policy, const RunOptions& options) {
  config.validate();
  const Layout layout = build_layout(config.rings, config.isd_m);
  const EventStream events = generate_events(config, layout);
  return run_scenario(config, layout, events, policy, options);
}

MetricsRecord run_scenario(const ScenarioConfig& config, const Layout& layout, const EventStream& events,
                           Policy policy, const RunOptions& options) {
  config.validate();
  const std::size_t B = layout.sectors.size();
  const std::vector<double> shares = config.normalized_shares();
  std::vector<Operator> ops;
  for (std::size_t o = 0; o < shares.size(); ++o) {
    ops.push_back({OperatorId{static_cast<std::uint32_t>(o)}, shares[o]});
  }
  SolverParams params;
  params.m = config.m;
  params.hysteresis = config.hysteresis;

  std::unique_ptr<Engine> engine;
  if (policy == Policy::dg_ss || policy == Policy::sinr_ss) {
    engine = std::make_unique<SlicedEngine>(ops, B, policy, params);
  } else {
    engine = std::make_unique<SharedEngine>(ops, B, policy, params);
  }

  const McsTable table = config.mcs_table.empty() ? McsTable::builtin() : McsTable::load(config.mcs_table);
  const ShadowingField shadow(derive_seed(config.seed, stream::shadowing), config.radio.shadowing_sigma_db,
                              config.radio.shadowing_update_s);
  const ShadowingField* shadowing = config.shadowing ? &shadow : nullptr;
  const std::uint64_t fading_seed = derive_seed(config.seed, stream::fading);

  auto channel = [&](UserId id, Point p, double t) {
    const ChannelUser user{id, p};
    ChannelSnapshot snap = build_rate_matrix(layout.sectors, std::span(&user, 1), config.radio, shadowing, t,
                                             config.rate_mode, table, fading_seed);
    snap.rates.scale(config.capacity_scale);
    return snap;
  };

  std::map<UserId, Present> present;
  auto place = [&](UserId id, Present& p, double t) {
    const ChannelSnapshot snap = channel(id, p.position, t);
    const auto rates = snap.rates.row(0);
    const bool covered = !snap.outage[0];
    if (p.covered && covered) {
      if (!std::equal(rates.begin(), rates.end(), p.rates.begin())) engine->update(id, rates, snap.sinr.row(0));
    } else if (p.covered) {
      engine->leave(id);
    } else if (covered) {
      engine->join(id, p.op, rates, snap.sinr.row(0));
    }
    p.covered = covered;
    p.rates.assign(rates.begin(), rates.end());
  };

  std::vector<DownloadTracker> trackers;
  for (double size : options.file_sizes_bits) trackers.emplace_back(size);

  MetricsRecord record;
  const double warmup = config.warmup_fraction * config.duration_s;
  const auto steps = static_cast<std::size_t>(std::floor(config.duration_s / config.snapshot_s + 1e-9));
  std::size_t next_event = 0;
  std::size_t last_moves = 0;
  std::vector<double> op_sum(ops.size(), 0.0);
  std::vector<std::size_t> op_count(ops.size(), 0);
  double w_sum = 0.0;
  std::size_t w_count = 0;

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * config.snapshot_s;
    while (next_event < events.events.size() && events.events[next_event].time <= t + 1e-9) {
      const Event& e = events.events[next_event++];
      switch (e.kind) {
        case Event::Kind::join: {
          Present& p = present[e.user];
          p.op = e.op_index;
          p.position = e.position;
          place(e.user, p, e.time);
          break;
        }
        case Event::Kind::leave: {
          auto it = present.find(e.user);
          if (it->second.covered) engine->leave(e.user);
          present.erase(it);
          break;
        }
        case Event::Kind::move:
          present.at(e.user).position = e.position;
          break;
      }
    }
    if (k > 0) {
      for (auto& [id, p] : present) place(id, p, t);
    }
    engine->settle();

    SnapshotMetrics snap;
    snap.time = t;
    snap.utility = engine->utility();
    snap.operator_utility = engine->operator_utility();
    for (const auto& [id, p] : present) {
      ++snap.users;
      if (!p.covered) ++snap.outage;
    }
    snap.idle_operator = std::any_of(snap.operator_utility.begin(), snap.operator_utility.end(),
                                     [](double u) { return std::isnan(u); });
    const std::size_t moves = engine->reassociations();
    snap.reassociations = moves - last_moves;
    last_moves = moves;

    if (t >= warmup - 1e-9) {
      w_sum += snap.utility;
      ++w_count;
      for (std::size_t o = 0; o < ops.size(); ++o) {
        if (!std::isnan(snap.operator_utility[o])) {
          op_sum[o] += snap.operator_utility[o];
          ++op_count[o];
        }
      }
      if (options.record_user_rates) {
        for (const auto& [id, p] : present) {
          if (p.covered) record.user_rates.push_back(engine->rate(id));
        }
      }
    }
    if (!trackers.empty() && k < steps) {
      RateSample sample;
      sample.time = t;
      sample.dt = config.snapshot_s;
      for (const auto& [id, p] : present) {
        if (p.covered) sample.rates.emplace(id, engine->rate(id));
      }
      for (auto& tr : trackers) tr.advance(sample);
    }
    record.snapshots.push_back(std::move(snap));
  }

  record.mean_utility = w_count ? w_sum / static_cast<double>(w_count) : NAN;
  for (std::size_t o = 0; o < ops.size(); ++o) {
    record.mean_operator_utility.push_back(op_count[o] ? op_sum[o] / static_cast<double>(op_count[o]) : NAN);
  }
  record.total_reassociations = last_moves;
  for (const auto& tr : trackers) record.download_times.push_back(tr.download_times());
  return record;
}

}  // namespace mora
