#pragma once

// Radio model: path loss, sector antenna, log-normal shadowing, SINR and
// the SINR-to-rate mapping. Powers are handled in mW internally.

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "mora/model.hpp"

namespace mora {

struct RadioParams {
  double tx_power_dbm = 41.0;
  double noise_dbm = -104.0;
  double carrier_ghz = 2.5;
  double bandwidth_hz = 1e7;
  double antenna_gain_dbi = 17.0;
  double front_to_back_db = 25.0;  // attenuation outside the sector
  double beamwidth_deg = 120.0;
  double shadowing_sigma_db = 8.0;
  double shadowing_update_s = 1.0;
  double min_distance_m = 3.0;
  bool fading = false;  // Rayleigh power gain on the SINR used for MCS selection
};

enum class RateMode { shannon, mcs };

RateMode parse_rate_mode(const std::string& name);

class McsTable {
 public:
  struct Entry {
    double sinr_db;
    double efficiency;  // bit/s/Hz
  };

  /// The 15-entry CQI table also shipped as data/mcs_cqi.txt.
  static McsTable builtin();
  /// Two columns "sinr_db efficiency", '#' starts a comment.
  static McsTable parse(std::istream& in);
  static McsTable load(const std::string& path);

  explicit McsTable(std::vector<Entry> entries);

  std::span<const Entry> entries() const { return entries_; }
  /// Efficiency of the highest entry whose threshold is <= sinr_db; 0 below
  /// the first.
  double efficiency(double sinr_db) const;

 private:
  std::vector<Entry> entries_;
};

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_mw(double dbm);

/// 36.7 log10(d) + 22.7 + 26 log10(fc), d floored at d_min.
double path_loss_db(double distance_m, double carrier_ghz, double min_distance_m = 3.0);

struct Sector {
  Point site;
  double boresight_deg = 0.0;
};

/// Flat peak gain inside the beam, reduced by the front-to-back ratio outside.
double antenna_gain_db(const Sector& sector, Point user, const RadioParams& params);

/// P_b g_ub / (sum_{k != b} P_k g_uk + noise), all linear.
double sinr(std::span<const double> received_mw, std::size_t b, double noise_mw);

double achievable_rate(double sinr_linear, const RadioParams& params, RateMode mode,
                       const McsTable& table);

/// i.i.d. N(0, sigma^2) dB samples per (user, station), redrawn every
/// update period. A row depends only on (seed, user, epoch).
class ShadowingField {
 public:
  ShadowingField(std::uint64_t seed, double sigma_db, double update_s);

  std::uint64_t epoch(double time_s) const;
  std::vector<double> row(UserId user, std::uint64_t epoch, std::size_t stations) const;

 private:
  std::uint64_t seed_;
  double sigma_db_;
  double update_s_;
};

struct ChannelUser {
  UserId id{};
  Point position;
};

struct ChannelSnapshot {
  RateMatrix rates;  // bits/s
  RateMatrix sinr;   // linear, average (no fading)
  std::vector<bool> outage;  // no station with a positive rate
};

/// Rates for every user against every sector at time `time_s`. A null
/// `shadowing` disables shadowing. `fading_seed` feeds the optional
/// Rayleigh draw, keyed by (user, time).
ChannelSnapshot build_rate_matrix(std::span<const Sector> sectors, std::span<const ChannelUser> users,
                                  const RadioParams& params, const ShadowingField* shadowing,
                                  double time_s, RateMode mode, const McsTable& table,
                                  std::uint64_t fading_seed = 0);

}  // namespace mora
