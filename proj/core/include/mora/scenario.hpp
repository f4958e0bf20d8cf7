#pragma once

// Simulation worlds: hexagonal sectorized layout, user placement and
// mobility, session churn and the file-download process.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mora/channel.hpp"
#include "mora/model.hpp"

namespace mora {

struct Bounds {
  Point min;
  Point max;
  bool contains(Point p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
};

struct Layout {
  double isd_m = 200.0;
  std::size_t rings = 0;
  std::vector<Point> sites;
  std::vector<Sector> sectors;  // 3 per site, station id = 3 * site + k
  Bounds bounds;                // site bounding box plus half an ISD
};

/// Sites on hexagonal rings around the origin: 1 + 3 rings (rings + 1) sites,
/// sorted by ring and then by angle. Boresights are 30, 150 and 270 degrees.
Layout build_layout(std::size_t rings, double isd_m = 200.0);

struct RwpParams {
  double speed_min = 0.5;  // m/s
  double speed_max = 1.5;
  double pause_s = 2.0;
};

struct RwpState {
  Point position;
  Point waypoint;
  double speed = 0.0;
  double pause_left = 0.0;
};

/// Draws a state from the stationary RWP position law: a leg is picked with
/// probability proportional to its length and the user placed uniformly on
/// it, heading for its end.
RwpState rwp_init(const Bounds& bounds, const RwpParams& params, std::mt19937_64& rng);
/// Advances by dt seconds: move toward the waypoint, pause on arrival, then
/// draw a new waypoint and speed.
void rwp_step(RwpState& state, double dt, const Bounds& bounds, const RwpParams& params,
              std::mt19937_64& rng);

struct Hotspot {
  Point center;
};

/// round(theta * n) users Gaussian (sigma = radius) around uniformly chosen
/// hotspots, reflected into the bounds; the rest uniform.
std::vector<Point> hotspot_positions(std::size_t n, const std::vector<Hotspot>& hotspots,
                                     double radius_m, double theta, const Bounds& bounds,
                                     std::mt19937_64& rng);
std::vector<Hotspot> draw_hotspots(std::size_t count, const Bounds& bounds, std::mt19937_64& rng);
Point uniform_position(const Bounds& bounds, std::mt19937_64& rng);

enum class Mobility { rwp, hotspot, stationary };

struct ScenarioConfig {
  std::uint64_t seed = 1;

  std::size_t rings = 1;
  double isd_m = 200.0;

  std::size_t num_operators = 3;
  std::vector<double> shares;  // empty: equal shares
  double user_density = 10.0;  // mean users per sector

  Mobility mobility = Mobility::rwp;
  RwpParams rwp;
  std::size_t hotspot_count = 3;
  double hotspot_radius_m = 40.0;
  double hotspot_concentration = 0.5;
  bool hotspot_shared = true;  // false: each operator draws its own hotspots

  double arrival_rate = -1.0;  // sessions/s per operator; negative: N_o / mean duration
  double mean_session_s = 120.0;

  double file_size_bits = 16e6;

  double duration_s = 60.0;
  double snapshot_s = 1.0;
  double warmup_fraction = 0.1;

  RadioParams radio;
  bool shadowing = true;
  RateMode rate_mode = RateMode::shannon;
  std::string mcs_table;  // empty: built-in

  std::string policy = "gllg";
  std::size_t m = 3;
  double hysteresis = 0.0;
  double capacity_scale = 1.0;  // multiplies every rate

  std::vector<double> normalized_shares() const;
  /// |U_o| = round(density * |B| * s_o).
  std::vector<std::size_t> target_population(std::size_t num_stations) const;
  void validate() const;
};

/// Applies one "key=value" assignment. Throws ConfigError for unknown keys
/// or unparsable values.
void apply_setting(ScenarioConfig& config, const std::string& key, const std::string& value);
void apply_override(ScenarioConfig& config, const std::string& assignment);
/// Flat key=value lines, '#' comments, dotted keys.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);
/// Every recognized key with its current value, one "key=value" per line.
std::string describe_config(const ScenarioConfig& config);

struct Event {
  enum class Kind { join = 0, leave = 1, move = 2 };
  double time = 0.0;
  Kind kind = Kind::join;
  UserId user{};
  std::size_t op_index = 0;  // join only
  Point position;            // join and move
};

struct EventStream {
  std::vector<Event> events;  // ordered by (time, kind, user)
  std::vector<std::size_t> target_population;
  double duration_s = 0.0;
};

/// Initial populations join at t = 0. Arrivals are Poisson per operator with
/// exponential session lengths (initial users get exponential residual
/// lifetimes), so the mean population stays at |U| s_o. Moves are emitted
/// on the snapshot grid for every present user under RWP.
EventStream generate_events(const ScenarioConfig& config, const Layout& layout);

/// Rates of the present users over [time, time + dt).
struct RateSample {
  double time = 0.0;
  double dt = 0.0;
  std::map<UserId, double> rates;  // bits/s
};

/// Back-to-back downloads per user while present. A user leaving mid-file
/// abandons it; abandoned files are not counted.
class DownloadTracker {
 public:
  explicit DownloadTracker(double file_bits);

  void advance(const RateSample& sample);
  const std::vector<double>& download_times() const { return times_; }
  double mean_download_time() const;

 private:
  struct Progress {
    double remaining;
    double started;
  };
  double file_bits_;
  std::map<UserId, Progress> active_;
  std::vector<double> times_;
};

std::vector<double> simulate_downloads(const std::vector<RateSample>& trajectory, double file_bits);

}  // namespace mora
