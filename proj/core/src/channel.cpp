#include "mora/channel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "mora/rng.hpp"

namespace mora {

RateMode parse_rate_mode(const std::string& name) {
  if (name == "shannon") return RateMode::shannon;
  if (name == "mcs") return RateMode::mcs;
  throw ConfigError("unknown rate mode '" + name + "' (shannon|mcs)");
}

McsTable McsTable::builtin() {
  return McsTable({{-6.7, 0.1523}, {-4.7, 0.2344}, {-2.3, 0.3770}, {0.2, 0.6016},
                   {2.4, 0.8770},  {4.3, 1.1758},  {5.9, 1.4766},  {8.1, 1.9141},
                   {10.3, 2.4063}, {11.7, 2.7305}, {14.1, 3.3223}, {16.3, 3.9023},
                   {18.7, 4.5234}, {21.0, 5.1152}, {22.7, 5.5547}});
}

McsTable McsTable::parse(std::istream& in) {
  std::vector<Entry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    Entry e{};
    if (!(fields >> e.sinr_db)) continue;
    std::string extra;
    if (!(fields >> e.efficiency) || (fields >> extra)) {
      throw ConfigError("MCS table line " + std::to_string(line_no) + ": expected 'sinr_db efficiency'");
    }
    entries.push_back(e);
  }
  return McsTable(std::move(entries));
}

McsTable McsTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open MCS table " + path);
  return parse(in);
}

McsTable::McsTable(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("MCS table is empty");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (!(e.efficiency > 0.0)) throw ValidationError("MCS efficiency must be positive");
    if (e.efficiency > std::log2(1.0 + db_to_linear(e.sinr_db))) {
      throw ValidationError("MCS entry at " + std::to_string(e.sinr_db) + " dB exceeds Shannon");
    }
    if (i > 0 && !(e.sinr_db > entries_[i - 1].sinr_db)) {
      throw ValidationError("MCS thresholds must be strictly increasing");
    }
    if (i > 0 && e.efficiency < entries_[i - 1].efficiency) {
      throw ValidationError("MCS efficiencies must be non-decreasing");
    }
  }
}

double McsTable::efficiency(double sinr_db) const {
  auto it = std::upper_bound(entries_.begin(), entries_.end(), sinr_db,
                             [](double s, const Entry& e) { return s < e.sinr_db; });
  return it == entries_.begin() ? 0.0 : std::prev(it)->efficiency;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
double dbm_to_mw(double dbm) { return db_to_linear(dbm); }

double path_loss_db(double distance_m, double carrier_ghz, double min_distance_m) {
  const double d = std::max(distance_m, min_distance_m);
  return 36.7 * std::log10(d) + 22.7 + 26.0 * std::log10(carrier_ghz);
}

double antenna_gain_db(const Sector& sector, Point user, const RadioParams& params) {
  const double bearing = std::atan2(user.y - sector.site.y, user.x - sector.site.x) * 180.0 / std::numbers::pi;
  double off = std::fmod(std::abs(bearing - sector.boresight_deg), 360.0);
  if (off > 180.0) off = 360.0 - off;
  const double peak = params.antenna_gain_dbi;
  return off <= params.beamwidth_deg / 2.0 ? peak : peak - params.front_to_back_db;
}

double sinr(std::span<const double> received_mw, std::size_t b, double noise_mw) {
  double interference = 0.0;
  for (std::size_t k = 0; k < received_mw.size(); ++k) {
    if (k != b) interference += received_mw[k];
  }
  return received_mw[b] / (interference + noise_mw);
}

double achievable_rate(double sinr_linear, const RadioParams& params, RateMode mode,
                       const McsTable& table) {
  if (!(sinr_linear > 0.0)) return 0.0;
  if (mode == RateMode::shannon) return params.bandwidth_hz * std::log2(1.0 + sinr_linear);
  return params.bandwidth_hz * table.efficiency(linear_to_db(sinr_linear));
}

ShadowingField::ShadowingField(std::uint64_t seed, double sigma_db, double update_s)
    : seed_(seed), sigma_db_(sigma_db), update_s_(update_s) {
  if (!(update_s > 0.0)) throw ValidationError("shadowing update period must be positive");
  if (sigma_db < 0.0) throw ValidationError("shadowing sigma must be >= 0");
}

std::uint64_t ShadowingField::epoch(double time_s) const {
  return static_cast<std::uint64_t>(std::floor(time_s / update_s_ + 1e-9));
}

std::vector<double> ShadowingField::row(UserId user, std::uint64_t epoch, std::size_t stations) const {
  std::mt19937_64 rng(derive_seed(seed_, user.value, epoch));
  std::normal_distribution<double> n(0.0, sigma_db_);
  std::vector<double> out(stations);
  for (double& v : out) v = n(rng);
  return out;
}

ChannelSnapshot build_rate_matrix(std::span<const Sector> sectors, std::span<const ChannelUser> users,
                                  const RadioParams& params, const ShadowingField* shadowing,
                                  double time_s, RateMode mode, const McsTable& table,
                                  std::uint64_t fading_seed) {
  const std::size_t B = sectors.size();
  ChannelSnapshot snap{RateMatrix(users.size(), B), RateMatrix(users.size(), B),
                       std::vector<bool>(users.size(), false)};
  const double noise = dbm_to_mw(params.noise_dbm);
  const std::uint64_t epoch = shadowing != nullptr ? shadowing->epoch(time_s) : 0;
  std::vector<double> rx(B), prefix(B + 1), suffix(B + 1);

  for (std::size_t u = 0; u < users.size(); ++u) {
    const Point p = users[u].position;
    const std::vector<double> shadow =
        shadowing != nullptr ? shadowing->row(users[u].id, epoch, B) : std::vector<double>(B, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
      const double d = std::hypot(p.x - sectors[b].site.x, p.y - sectors[b].site.y);
      const double gain_db = -path_loss_db(d, params.carrier_ghz, params.min_distance_m) +
                             antenna_gain_db(sectors[b], p, params) + shadow[b];
      rx[b] = dbm_to_mw(params.tx_power_dbm + gain_db);
    }
    // Interference excluding b from prefix and suffix sums keeps precision
    // when one sector dominates.
    prefix[0] = 0.0;
    for (std::size_t b = 0; b < B; ++b) prefix[b + 1] = prefix[b] + rx[b];
    suffix[B] = 0.0;
    for (std::size_t b = B; b-- > 0;) suffix[b] = suffix[b + 1] + rx[b];

    std::mt19937_64 fade(derive_seed(fading_seed, users[u].id.value, std::bit_cast<std::uint64_t>(time_s)));
    std::exponential_distribution<double> rayleigh_power(1.0);
    bool any = false;
    for (std::size_t b = 0; b < B; ++b) {
      const double s = rx[b] / (prefix[b] + suffix[b + 1] + noise);
      snap.sinr(u, StationId{static_cast<std::uint32_t>(b)}) = s;
      double effective = s;
      if (params.fading && mode == RateMode::mcs) effective *= rayleigh_power(fade);
      const double r = achievable_rate(effective, params, mode, table);
      snap.rates(u, StationId{static_cast<std::uint32_t>(b)}) = r;
      any = any || r > 0.0;
    }
    snap.outage[u] = !any;
  }
  return snap;
}

}  // namespace mora
