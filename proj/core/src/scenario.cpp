#include "mora/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mora/rng.hpp"
#include "streams.hpp"

namespace mora {

Layout build_layout(std::size_t rings, double isd_m) {
  if (!(isd_m > 0.0)) throw ValidationError("inter-site distance must be positive");
  Layout layout;
  layout.isd_m = isd_m;
  layout.rings = rings;
  struct Site {
    long ring;
    double angle;
    Point p;
  };
  std::vector<Site> sites;
  const long R = static_cast<long>(rings);
  for (long q = -R; q <= R; ++q) {
    for (long r = std::max(-R, -q - R); r <= std::min(R, -q + R); ++r) {
      const Point p{isd_m * (static_cast<double>(q) + static_cast<double>(r) / 2.0),
                    isd_m * std::sqrt(3.0) / 2.0 * static_cast<double>(r)};
      const long ring = std::max({std::abs(q), std::abs(r), std::abs(q + r)});
      double angle = std::atan2(p.y, p.x);
      if (angle < -1e-12) angle += 2.0 * std::numbers::pi;
      sites.push_back({ring, ring == 0 ? 0.0 : angle, p});
    }
  }
  std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    return a.ring != b.ring ? a.ring < b.ring : a.angle < b.angle;
  });
  layout.bounds = {{INFINITY, INFINITY}, {-INFINITY, -INFINITY}};
  for (const Site& s : sites) {
    layout.sites.push_back(s.p);
    for (double boresight : {30.0, 150.0, 270.0}) layout.sectors.push_back({s.p, boresight});
    layout.bounds.min.x = std::min(layout.bounds.min.x, s.p.x - isd_m / 2.0);
    layout.bounds.min.y = std::min(layout.bounds.min.y, s.p.y - isd_m / 2.0);
    layout.bounds.max.x = std::max(layout.bounds.max.x, s.p.x + isd_m / 2.0);
    layout.bounds.max.y = std::max(layout.bounds.max.y, s.p.y + isd_m / 2.0);
  }
  return layout;
}

Point uniform_position(const Bounds& bounds, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(bounds.min.x, bounds.max.x);
  std::uniform_real_distribution<double> y(bounds.min.y, bounds.max.y);
  const double px = x(rng);
  return {px, y(rng)};
}

namespace {

double draw_speed(const RwpParams& params, std::mt19937_64& rng) {
  if (params.speed_max <= params.speed_min) return params.speed_min;
  return std::uniform_real_distribution<double>(params.speed_min, params.speed_max)(rng);
}

double reflect(double v, double lo, double hi) {
  const double w = hi - lo;
  if (!(w > 0.0)) return lo;
  double t = std::fmod(v - lo, 2.0 * w);
  if (t < 0.0) t += 2.0 * w;
  return t <= w ? lo + t : lo + 2.0 * w - t;
}

Point hotspot_point(const std::vector<Hotspot>& hotspots, double radius_m, const Bounds& bounds,
                    std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> which(0, hotspots.size() - 1);
  std::normal_distribution<double> n(0.0, radius_m);
  const Point c = hotspots[which(rng)].center;
  const double dx = n(rng);
  const double dy = n(rng);
  return {reflect(c.x + dx, bounds.min.x, bounds.max.x), reflect(c.y + dy, bounds.min.y, bounds.max.y)};
}

}  // namespace

RwpState rwp_init(const Bounds& bounds, const RwpParams& params, std::mt19937_64& rng) {
  const double diag = std::hypot(bounds.max.x - bounds.min.x, bounds.max.y - bounds.min.y);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (true) {
    const Point a = uniform_position(bounds, rng);
    const Point b = uniform_position(bounds, rng);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (unit(rng) * diag > len) continue;
    const double t = unit(rng);
    RwpState s;
    s.position = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    s.waypoint = b;
    s.speed = draw_speed(params, rng);
    return s;
  }
}

void rwp_step(RwpState& s, double dt, const Bounds& bounds, const RwpParams& params,
              std::mt19937_64& rng) {
  double left = dt;
  for (int guard = 0; left > 0.0 && guard < 10000; ++guard) {
    if (s.pause_left > 0.0) {
      const double d = std::min(left, s.pause_left);
      s.pause_left -= d;
      left -= d;
      continue;
    }
    if (s.position == s.waypoint) {
      s.waypoint = uniform_position(bounds, rng);
      s.speed = draw_speed(params, rng);
      continue;
    }
    if (!(s.speed > 0.0)) return;
    const double dist = std::hypot(s.waypoint.x - s.position.x, s.waypoint.y - s.position.y);
    const double needed = dist / s.speed;
    if (needed > left) {
      const double f = s.speed * left / dist;
      s.position = {s.position.x + f * (s.waypoint.x - s.position.x),
                    s.position.y + f * (s.waypoint.y - s.position.y)};
      return;
    }
    s.position = s.waypoint;
    left -= needed;
    s.pause_left = params.pause_s;
  }
}

std::vector<Hotspot> draw_hotspots(std::size_t count, const Bounds& bounds, std::mt19937_64& rng) {
  std::vector<Hotspot> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back({uniform_position(bounds, rng)});
  return out;
}

std::vector<Point> hotspot_positions(std::size_t n, const std::vector<Hotspot>& hotspots,
                                     double radius_m, double theta, const Bounds& bounds,
                                     std::mt19937_64& rng) {
  if (theta < 0.0 || theta > 1.0) throw ValidationError("hotspot concentration must be in [0, 1]");
  const auto concentrated = static_cast<std::size_t>(std::llround(theta * static_cast<double>(n)));
  if (concentrated > 0 && hotspots.empty()) throw ValidationError("no hotspots to concentrate around");
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(i < concentrated ? hotspot_point(hotspots, radius_m, bounds, rng)
                                   : uniform_position(bounds, rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

std::vector<double> ScenarioConfig::normalized_shares() const {
  if (shares.empty()) return std::vector<double>(num_operators, 1.0 / static_cast<double>(num_operators));
  return shares;
}

std::vector<std::size_t> ScenarioConfig::target_population(std::size_t num_stations) const {
  std::vector<std::size_t> out;
  for (double s : normalized_shares()) {
    out.push_back(static_cast<std::size_t>(std::llround(user_density * static_cast<double>(num_stations) * s)));
  }
  return out;
}

void ScenarioConfig::validate() const {
  if (num_operators == 0) throw ConfigError("operators.count must be >= 1");
  if (!shares.empty()) {
    if (shares.size() != num_operators) throw ConfigError("operators.shares must list operators.count values");
    double sum = 0.0;
    for (double s : shares) {
      if (!(s > 0.0) || s > 1.0) throw ConfigError("shares must lie in (0, 1]");
      sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("operators.shares must sum to 1");
  }
  if (!(user_density > 0.0)) throw ConfigError("users.density must be positive");
  if (!(duration_s > 0.0) || !(snapshot_s > 0.0)) throw ConfigError("sim.duration and sim.snapshot must be positive");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) throw ConfigError("sim.warmup must be in [0, 1)");
  if (!(mean_session_s > 0.0)) throw ConfigError("events.mean_session must be positive");
  if (!(file_size_bits > 0.0)) throw ConfigError("traffic.file_mbit must be positive");
  if (!(capacity_scale > 0.0)) throw ConfigError("capacity.scale must be positive");
  if (hysteresis < 0.0) throw ConfigError("solver.hysteresis must be >= 0");
  if (rwp.speed_min < 0.0 || rwp.speed_max < rwp.speed_min) throw ConfigError("bad mobility speed range");
  if (hotspot_concentration < 0.0 || hotspot_concentration > 1.0) {
    throw ConfigError("hotspot.concentration must be in [0, 1]");
  }
  if (mobility == Mobility::hotspot && hotspot_count == 0 && hotspot_concentration > 0.0) {
    throw ConfigError("hotspot.count must be >= 1");
  }
  if (!(radio.bandwidth_hz > 0.0)) throw ConfigError("channel.bandwidth_hz must be positive");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const char* mobility_name(Mobility m) {
  switch (m) {
    case Mobility::rwp: return "rwp";
    case Mobility::hotspot: return "hotspot";
    case Mobility::stationary: return "static";
  }
  return "rwp";
}

struct Key {
  const char* name;
  std::function<void(ScenarioConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define MORA_DOUBLE_KEY(NAME, FIELD)                                                            \
  Key {                                                                                         \
    NAME, [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_double(k, v); }, \
        [](const ScenarioConfig& c) { return fmt(c.FIELD); }                                    \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"seed", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); },
       [](const ScenarioConfig& c) { return std::to_string(c.seed); }},
      {"layout.rings",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.rings = to_u64(k, v); },
       [](const ScenarioConfig& c) { return std::to_string(c.rings); }},
      MORA_DOUBLE_KEY("layout.isd", isd_m),
      {"operators.count",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.num_operators = to_u64(k, v); },
       [](const ScenarioConfig& c) { return std::to_string(c.num_operators); }},
      {"operators.shares",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         c.shares.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           if (!trim(item).empty()) c.shares.push_back(to_double(k, trim(item)));
         }
       },
       [](const ScenarioConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.shares.size(); ++i) out += (i ? "," : "") + fmt(c.shares[i]);
         return out;
       }},
      MORA_DOUBLE_KEY("users.density", user_density),
      {"mobility.model",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         if (v == "rwp") c.mobility = Mobility::rwp;
         else if (v == "hotspot") c.mobility = Mobility::hotspot;
         else if (v == "static") c.mobility = Mobility::stationary;
         else throw ConfigError(k + ": expected rwp|hotspot|static, got '" + v + "'");
       },
       [](const ScenarioConfig& c) { return std::string(mobility_name(c.mobility)); }},
      MORA_DOUBLE_KEY("mobility.speed_min", rwp.speed_min),
      MORA_DOUBLE_KEY("mobility.speed_max", rwp.speed_max),
      MORA_DOUBLE_KEY("mobility.pause", rwp.pause_s),
      {"hotspot.count",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.hotspot_count = to_u64(k, v); },
       [](const ScenarioConfig& c) { return std::to_string(c.hotspot_count); }},
      MORA_DOUBLE_KEY("hotspot.radius", hotspot_radius_m),
      MORA_DOUBLE_KEY("hotspot.concentration", hotspot_concentration),
      {"hotspot.shared",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.hotspot_shared = to_bool(k, v); },
       [](const ScenarioConfig& c) { return std::string(c.hotspot_shared ? "true" : "false"); }},
      MORA_DOUBLE_KEY("events.arrival_rate", arrival_rate),
      MORA_DOUBLE_KEY("events.mean_session", mean_session_s),
      {"traffic.file_mbit",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.file_size_bits = to_double(k, v) * 1e6; },
       [](const ScenarioConfig& c) { return fmt(c.file_size_bits / 1e6); }},
      MORA_DOUBLE_KEY("sim.duration", duration_s),
      MORA_DOUBLE_KEY("sim.snapshot", snapshot_s),
      MORA_DOUBLE_KEY("sim.warmup", warmup_fraction),
      MORA_DOUBLE_KEY("channel.tx_power_dbm", radio.tx_power_dbm),
      MORA_DOUBLE_KEY("channel.noise_dbm", radio.noise_dbm),
      MORA_DOUBLE_KEY("channel.carrier_ghz", radio.carrier_ghz),
      MORA_DOUBLE_KEY("channel.bandwidth_hz", radio.bandwidth_hz),
      MORA_DOUBLE_KEY("channel.antenna_gain_dbi", radio.antenna_gain_dbi),
      MORA_DOUBLE_KEY("channel.front_to_back_db", radio.front_to_back_db),
      MORA_DOUBLE_KEY("channel.sigma_db", radio.shadowing_sigma_db),
      MORA_DOUBLE_KEY("channel.shadowing_update", radio.shadowing_update_s),
      MORA_DOUBLE_KEY("channel.min_distance", radio.min_distance_m),
      {"channel.shadowing",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.shadowing = to_bool(k, v); },
       [](const ScenarioConfig& c) { return std::string(c.shadowing ? "true" : "false"); }},
      {"channel.fading",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.radio.fading = to_bool(k, v); },
       [](const ScenarioConfig& c) { return std::string(c.radio.fading ? "true" : "false"); }},
      {"channel.mode",
       [](ScenarioConfig& c, const std::string&, const std::string& v) { c.rate_mode = parse_rate_mode(v); },
       [](const ScenarioConfig& c) { return std::string(c.rate_mode == RateMode::shannon ? "shannon" : "mcs"); }},
      {"channel.mcs_table",
       [](ScenarioConfig& c, const std::string&, const std::string& v) { c.mcs_table = v; },
       [](const ScenarioConfig& c) { return c.mcs_table; }},
      {"policy", [](ScenarioConfig& c, const std::string&, const std::string& v) { c.policy = v; },
       [](const ScenarioConfig& c) { return c.policy; }},
      {"gllg.m", [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.m = to_u64(k, v); },
       [](const ScenarioConfig& c) { return std::to_string(c.m); }},
      MORA_DOUBLE_KEY("solver.hysteresis", hysteresis),
      MORA_DOUBLE_KEY("capacity.scale", capacity_scale),
  };
  return table;
}

#undef MORA_DOUBLE_KEY

}  // namespace

void apply_setting(ScenarioConfig& config, const std::string& key, const std::string& value) {
  for (const Key& k : keys()) {
    if (key == k.name) {
      k.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_override(ScenarioConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected KEY=VALUE, got '" + assignment + "'");
  apply_setting(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_override(config, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in);
}

std::string describe_config(const ScenarioConfig& config) {
  std::string out;
  for (const Key& k : keys()) out += std::string(k.name) + "=" + k.get(config) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Events

EventStream generate_events(const ScenarioConfig& config, const Layout& layout) {
  config.validate();
  const std::size_t ops = config.num_operators;
  EventStream stream;
  stream.duration_s = config.duration_s;
  stream.target_population = config.target_population(layout.sectors.size());

  std::vector<std::vector<Hotspot>> hotspots(ops);
  if (config.mobility == Mobility::hotspot) {
    std::mt19937_64 shared(derive_seed(config.seed, stream::hotspots, 0));
    const auto common = draw_hotspots(config.hotspot_count, layout.bounds, shared);
    for (std::size_t o = 0; o < ops; ++o) {
      if (config.hotspot_shared) {
        hotspots[o] = common;
      } else {
        std::mt19937_64 own(derive_seed(config.seed, stream::hotspots, o + 1));
        hotspots[o] = draw_hotspots(config.hotspot_count, layout.bounds, own);
      }
    }
  }

  struct Session {
    double join;
    double leave;
    std::size_t op;
  };
  std::vector<Session> sessions;
  const bool churn = config.arrival_rate != 0.0;
  std::vector<Session> arrivals;
  for (std::size_t o = 0; o < ops; ++o) {
    std::mt19937_64 rng(derive_seed(config.seed, stream::churn, o));
    std::exponential_distribution<double> lifetime(1.0 / config.mean_session_s);
    for (std::size_t k = 0; k < stream.target_population[o]; ++k) {
      sessions.push_back({0.0, churn ? lifetime(rng) : INFINITY, o});
    }
    if (!churn) continue;
    const double rate = config.arrival_rate > 0.0
                            ? config.arrival_rate
                            : static_cast<double>(stream.target_population[o]) / config.mean_session_s;
    if (!(rate > 0.0)) continue;
    std::exponential_distribution<double> gap(rate);
    for (double t = gap(rng); t < config.duration_s; t += gap(rng)) {
      arrivals.push_back({t, t + lifetime(rng), o});
    }
  }
  std::stable_sort(arrivals.begin(), arrivals.end(), [](const Session& a, const Session& b) {
    return a.join != b.join ? a.join < b.join : a.op < b.op;
  });
  sessions.insert(sessions.end(), arrivals.begin(), arrivals.end());

  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const Session& s = sessions[i];
    const UserId id{i};
    std::mt19937_64 rng(derive_seed(config.seed, stream::mobility, i));
    RwpState rwp;
    Point start;
    switch (config.mobility) {
      case Mobility::rwp:
        rwp = rwp_init(layout.bounds, config.rwp, rng);
        start = rwp.position;
        break;
      case Mobility::hotspot: {
        std::bernoulli_distribution near(config.hotspot_concentration);
        start = near(rng) ? hotspot_positions(1, hotspots[s.op], config.hotspot_radius_m, 1.0, layout.bounds, rng)[0]
                          : uniform_position(layout.bounds, rng);
        break;
      }
      case Mobility::stationary:
        start = uniform_position(layout.bounds, rng);
        break;
    }
    stream.events.push_back({s.join, Event::Kind::join, id, s.op, start});
    if (s.leave < config.duration_s) stream.events.push_back({s.leave, Event::Kind::leave, id, s.op, {}});
    if (config.mobility != Mobility::rwp) continue;
    double last = s.join;
    for (auto k = static_cast<std::uint64_t>(std::floor(s.join / config.snapshot_s)) + 1;; ++k) {
      const double t = static_cast<double>(k) * config.snapshot_s;
      if (t > config.duration_s + 1e-9 || t >= s.leave) break;
      rwp_step(rwp, t - last, layout.bounds, config.rwp, rng);
      last = t;
      stream.events.push_back({t, Event::Kind::move, id, s.op, rwp.position});
    }
  }
  std::sort(stream.events.begin(), stream.events.end(), [](const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.user < b.user;
  });
  return stream;
}

// ---------------------------------------------------------------------------
// Downloads

DownloadTracker::DownloadTracker(double file_bits) : file_bits_(file_bits) {
  if (!(file_bits > 0.0)) throw ValidationError("file size must be positive");
}

void DownloadTracker::advance(const RateSample& sample) {
  for (auto it = active_.begin(); it != active_.end();) {
    it = sample.rates.count(it->first) ? std::next(it) : active_.erase(it);
  }
  for (const auto& [id, r] : sample.rates) {
    auto [it, fresh] = active_.try_emplace(id, Progress{file_bits_, sample.time});
    Progress& p = it->second;
    double t = sample.time;
    double left = sample.dt;
    while (r > 0.0 && left > 0.0) {
      const double needed = p.remaining / r;
      if (needed > left) {
        p.remaining -= r * left;
        break;
      }
      t += needed;
      left -= needed;
      times_.push_back(t - p.started);
      p.started = t;
      p.remaining = file_bits_;
    }
  }
}

double DownloadTracker::mean_download_time() const {
  if (times_.empty()) return NAN;
  return std::accumulate(times_.begin(), times_.end(), 0.0) / static_cast<double>(times_.size());
}

std::vector<double> simulate_downloads(const std::vector<RateSample>& trajectory, double file_bits) {
  DownloadTracker tracker(file_bits);
  for (const RateSample& s : trajectory) tracker.advance(s);
  return tracker.download_times();
}

}  // namespace mora
