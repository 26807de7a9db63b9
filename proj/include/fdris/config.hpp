// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace fdris {

/// Raised for an invalid or unusable scenario/sweep configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an optimization variable violates a hard constraint.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The seven field-response links plus the scalar inter-user link.
///  br: BS tx -> RIS        rb: RIS -> BS rx      bd: BS tx -> DL user
///  bu: UL user -> BS rx    rd: RIS -> DL user    ru: UL user -> RIS
///  si: BS tx -> BS rx (residual self-interference)
enum class Link : int { kBR = 0, kRB, kBd, kBu, kRd, kRu, kSI };
inline constexpr int kNumLinks = 7;
inline constexpr std::array<Link, kNumLinks> kAllLinks = {Link::kBR, Link::kRB, Link::kBd, Link::kBu,
                                                         Link::kRd, Link::kRu, Link::kSI};

std::string_view link_name(Link link);

enum class Duplex { kFull, kHalf };

using Point3 = std::array<double, 3>;

/// Physical scenario. Power-like quantities are stored in the units named by
/// the field; use SystemParams for the derived linear values.
struct ScenarioConfig {
  double wavelength_m = 0.1;
  double beta0_db = -30.0;
  // path-loss exponents, indexed by Link (si unused: the SI link has its own level)
  std::array<double, kNumLinks> pathloss_exponent = {2.1, 2.1, 3.5, 3.5, 2.2, 2.2, 0.0};
  double pathloss_exponent_ud = 3.7;
  std::array<int, kNumLinks> paths = {6, 6, 6, 6, 6, 6, 6};

  Point3 bs_position_m = {5.0, 0.0, 15.0};
  Point3 ris_position_m = {0.0, 10.0, 10.0};
  Point3 ul_position_m = {65.0, 60.0, 1.5};
  Point3 dl_position_m = {5.0, 80.0, 1.5};

  double region_side_wavelengths = 4.0;
  double min_separation_wavelengths = 0.5;

  double noise_psd_dbm_per_hz = -174.0;
  double bandwidth_hz = 1.0;
  double si_level_db = -90.0;
  double si_eta = 1e-8;

  double power_bs_max_dbm = 37.0;
  double power_ul_max_dbm = 20.0;
  double rate_threshold_dl_bps_hz = 1.0;
  double rate_threshold_ul_bps_hz = 1.0;

  int antennas_tx = 8;
  int antennas_rx = 4;
  int ris_elements = 16;

  Duplex duplex = Duplex::kFull;

  double region_side_m() const { return region_side_wavelengths * wavelength_m; }
  double min_separation_m() const { return min_separation_wavelengths * wavelength_m; }

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

/// Largest number of points a square region of side `side` can hold on a
/// grid of pitch `pitch`.
int grid_capacity(double side, double pitch);

/// Named parameter sets: "desk" (CI scale) and "paper" (full Table-I scale).
ScenarioConfig profile_config(std::string_view profile);

ScenarioConfig config_from_json(const nlohmann::json& j, const ScenarioConfig& base = {});
nlohmann::json config_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base = {});

/// Linear-scale quantities consumed by the rate and optimization code.
struct SystemParams {
  double noise_dl = 0.0;  // W
  double noise_ul = 0.0;  // W
  double eta = 0.0;
  double power_bs_max = 0.0;  // W
  double power_ul_max = 0.0;  // W
  double gamma_min_dl = 0.0;
  double gamma_min_ul = 0.0;
  Duplex duplex = Duplex::kFull;
};

SystemParams system_params(const ScenarioConfig& cfg);

double dbm_to_watt(double dbm);
double db_to_linear(double db);

/// Link endpoint distance (m) from the global node placements.
double link_distance(const ScenarioConfig& cfg, Link link);
double inter_user_distance(const ScenarioConfig& cfg);

/// Per-path gain variance beta0 * d^-alpha / L (SI: level / L at unit distance).
double path_gain_variance(const ScenarioConfig& cfg, Link link);

}  // namespace fdris
