// SPDX-License-Identifier: Apache-2.0
#include "fdris/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fdris {

namespace {

constexpr std::array<std::string_view, kNumLinks> kLinkNames = {"br", "rb", "bd", "bu", "rd", "ru", "si"};

double distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Point3 read_point(const nlohmann::json& j, std::string_view key) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError("positions_m." + std::string(key) + " must be a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string_view link_name(Link link) { return kLinkNames[static_cast<int>(link)]; }

double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

int grid_capacity(double side, double pitch) {
  if (pitch <= 0.0) return 0;
  // small slack so that side == k * pitch counts k + 1 points per row
  const int per_row = static_cast<int>(std::floor(side / pitch * (1.0 + 1e-12))) + 1;
  return per_row * per_row;
}

void ScenarioConfig::validate() const {
  if (!(wavelength_m > 0.0)) throw ConfigError("wavelength_m must be positive");
  if (antennas_tx < 1) throw ConfigError("antennas_tx must be >= 1");
  if (antennas_rx < 1) throw ConfigError("antennas_rx must be >= 1");
  if (ris_elements < 1) throw ConfigError("ris_elements must be >= 1");
  for (Link link : kAllLinks) {
    if (paths[static_cast<int>(link)] < 1) {
      throw ConfigError("paths." + std::string(link_name(link)) + " must be >= 1");
    }
  }
  if (!(si_eta >= 0.0 && si_eta <= 1.0)) throw ConfigError("si_eta must lie in [0, 1]");
  if (!(region_side_wavelengths > 0.0)) throw ConfigError("region_side_wavelengths must be positive");
  if (!(min_separation_wavelengths > 0.0)) throw ConfigError("min_separation_wavelengths must be positive");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be positive");
  if (rate_threshold_dl_bps_hz < 0.0 || rate_threshold_ul_bps_hz < 0.0) {
    throw ConfigError("rate thresholds must be non-negative");
  }
  const double side = region_side_m();
  const double pitch = min_separation_m();
  const int capacity = grid_capacity(side, pitch);
  const auto check_fit = [&](int count, const char* what) {
    const int per_row = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    if (count > capacity || side < pitch * (per_row - 1) * (1.0 - 1e-12)) {
      throw ConfigError(std::string(what) + " = " + std::to_string(count) +
                        " exceeds the movement-region grid capacity of " + std::to_string(capacity) +
                        " points (region side " + std::to_string(side) + " m, separation " +
                        std::to_string(pitch) + " m)");
    }
  };
  check_fit(antennas_tx, "antennas_tx");
  check_fit(antennas_rx, "antennas_rx");
  check_fit(ris_elements, "ris_elements");
}

ScenarioConfig profile_config(std::string_view profile) {
  ScenarioConfig cfg;
  if (profile == "paper") {
    cfg.antennas_tx = 8;
    cfg.antennas_rx = 4;
    cfg.ris_elements = 64;
    cfg.paths = {6, 6, 6, 6, 6, 6, 6};
    return cfg;
  }
  if (profile == "desk") {
    cfg.antennas_tx = 4;
    cfg.antennas_rx = 2;
    cfg.ris_elements = 16;
    cfg.paths = {4, 4, 4, 4, 4, 4, 6};
    return cfg;
  }
  throw ConfigError("unknown profile '" + std::string(profile) + "' (valid: desk, paper)");
}

ScenarioConfig config_from_json(const nlohmann::json& j, const ScenarioConfig& base) {
  if (!j.is_object()) throw ConfigError("scenario configuration must be a JSON object");
  static const std::array<const char*, 23> kKnown = {
      "profile",          "wavelength_m",        "beta0_db",
      "pathloss_exponent", "paths",              "positions_m",
      "region_side_wavelengths", "min_separation_wavelengths", "noise_psd_dbm_per_hz",
      "bandwidth_hz",     "si_level_db",         "si_eta",
      "power_bs_max_dbm", "power_ul_max_dbm",    "rate_threshold_dl_bps_hz",
      "rate_threshold_ul_bps_hz", "antennas_tx", "antennas_rx",
      "ris_elements",     "duplex",              "comment",
      "name",             "description"};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    if (!known) throw ConfigError("unknown configuration key '" + key + "'");
  }

  ScenarioConfig cfg = j.contains("profile") ? profile_config(j.at("profile").get<std::string>()) : base;
  try {
    read_if(j, "wavelength_m", cfg.wavelength_m);
    read_if(j, "beta0_db", cfg.beta0_db);
    if (j.contains("pathloss_exponent")) {
      const auto& pe = j.at("pathloss_exponent");
      for (Link link : kAllLinks) {
        if (link == Link::kSI) continue;
        read_if(pe, std::string(link_name(link)).c_str(), cfg.pathloss_exponent[static_cast<int>(link)]);
      }
      read_if(pe, "ud", cfg.pathloss_exponent_ud);
    }
    if (j.contains("paths")) {
      const auto& pj = j.at("paths");
      if (pj.is_number_integer()) {
        // a single count applies to the six propagation links; SI keeps its own
        for (Link link : kAllLinks) {
          if (link != Link::kSI) cfg.paths[static_cast<int>(link)] = pj.get<int>();
        }
      } else {
        for (Link link : kAllLinks) read_if(pj, std::string(link_name(link)).c_str(), cfg.paths[static_cast<int>(link)]);
      }
    }
    if (j.contains("positions_m")) {
      const auto& pos = j.at("positions_m");
      if (pos.contains("bs")) cfg.bs_position_m = read_point(pos.at("bs"), "bs");
      if (pos.contains("ris")) cfg.ris_position_m = read_point(pos.at("ris"), "ris");
      if (pos.contains("ul")) cfg.ul_position_m = read_point(pos.at("ul"), "ul");
      if (pos.contains("dl")) cfg.dl_position_m = read_point(pos.at("dl"), "dl");
    }
    read_if(j, "region_side_wavelengths", cfg.region_side_wavelengths);
    read_if(j, "min_separation_wavelengths", cfg.min_separation_wavelengths);
    read_if(j, "noise_psd_dbm_per_hz", cfg.noise_psd_dbm_per_hz);
    read_if(j, "bandwidth_hz", cfg.bandwidth_hz);
    read_if(j, "si_level_db", cfg.si_level_db);
    read_if(j, "si_eta", cfg.si_eta);
    read_if(j, "power_bs_max_dbm", cfg.power_bs_max_dbm);
    read_if(j, "power_ul_max_dbm", cfg.power_ul_max_dbm);
    read_if(j, "rate_threshold_dl_bps_hz", cfg.rate_threshold_dl_bps_hz);
    read_if(j, "rate_threshold_ul_bps_hz", cfg.rate_threshold_ul_bps_hz);
    read_if(j, "antennas_tx", cfg.antennas_tx);
    read_if(j, "antennas_rx", cfg.antennas_rx);
    read_if(j, "ris_elements", cfg.ris_elements);
    if (j.contains("duplex")) {
      const auto mode = j.at("duplex").get<std::string>();
      if (mode == "full") {
        cfg.duplex = Duplex::kFull;
      } else if (mode == "half") {
        cfg.duplex = Duplex::kHalf;
      } else {
        throw ConfigError("duplex must be 'full' or 'half', got '" + mode + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json config_to_json(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["wavelength_m"] = cfg.wavelength_m;
  j["beta0_db"] = cfg.beta0_db;
  nlohmann::json pe, paths;
  for (Link link : kAllLinks) {
    const auto name = std::string(link_name(link));
    if (link != Link::kSI) pe[name] = cfg.pathloss_exponent[static_cast<int>(link)];
    paths[name] = cfg.paths[static_cast<int>(link)];
  }
  pe["ud"] = cfg.pathloss_exponent_ud;
  j["pathloss_exponent"] = pe;
  j["paths"] = paths;
  j["positions_m"] = {{"bs", cfg.bs_position_m},
                      {"ris", cfg.ris_position_m},
                      {"ul", cfg.ul_position_m},
                      {"dl", cfg.dl_position_m}};
  j["region_side_wavelengths"] = cfg.region_side_wavelengths;
  j["min_separation_wavelengths"] = cfg.min_separation_wavelengths;
  j["noise_psd_dbm_per_hz"] = cfg.noise_psd_dbm_per_hz;
  j["bandwidth_hz"] = cfg.bandwidth_hz;
  j["si_level_db"] = cfg.si_level_db;
  j["si_eta"] = cfg.si_eta;
  j["power_bs_max_dbm"] = cfg.power_bs_max_dbm;
  j["power_ul_max_dbm"] = cfg.power_ul_max_dbm;
  j["rate_threshold_dl_bps_hz"] = cfg.rate_threshold_dl_bps_hz;
  j["rate_threshold_ul_bps_hz"] = cfg.rate_threshold_ul_bps_hz;
  j["antennas_tx"] = cfg.antennas_tx;
  j["antennas_rx"] = cfg.antennas_rx;
  j["ris_elements"] = cfg.ris_elements;
  j["duplex"] = cfg.duplex == Duplex::kFull ? "full" : "half";
  return j;
}

ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return config_from_json(j, base);
}

SystemParams system_params(const ScenarioConfig& cfg) {
  SystemParams sp;
  const double noise_dbm = cfg.noise_psd_dbm_per_hz + 10.0 * std::log10(cfg.bandwidth_hz);
  sp.noise_dl = dbm_to_watt(noise_dbm);
  sp.noise_ul = sp.noise_dl;
  sp.eta = cfg.si_eta;
  sp.power_bs_max = dbm_to_watt(cfg.power_bs_max_dbm);
  sp.power_ul_max = dbm_to_watt(cfg.power_ul_max_dbm);
  sp.duplex = cfg.duplex;
  // half duplex: each user gets half the time, so R_th needs log2(1+g)/2 >= R_th
  const double scale = cfg.duplex == Duplex::kHalf ? 2.0 : 1.0;
  sp.gamma_min_dl = std::exp2(scale * cfg.rate_threshold_dl_bps_hz) - 1.0;
  sp.gamma_min_ul = std::exp2(scale * cfg.rate_threshold_ul_bps_hz) - 1.0;
  return sp;
}

double link_distance(const ScenarioConfig& cfg, Link link) {
  switch (link) {
    case Link::kBR:
    case Link::kRB:
      return distance(cfg.bs_position_m, cfg.ris_position_m);
    case Link::kBd:
      return distance(cfg.bs_position_m, cfg.dl_position_m);
    case Link::kBu:
      return distance(cfg.bs_position_m, cfg.ul_position_m);
    case Link::kRd:
      return distance(cfg.ris_position_m, cfg.dl_position_m);
    case Link::kRu:
      return distance(cfg.ris_position_m, cfg.ul_position_m);
    case Link::kSI:
      return 1.0;
  }
  return 1.0;
}

double inter_user_distance(const ScenarioConfig& cfg) { return distance(cfg.ul_position_m, cfg.dl_position_m); }

double path_gain_variance(const ScenarioConfig& cfg, Link link) {
  const int paths = cfg.paths[static_cast<int>(link)];
  if (link == Link::kSI) return db_to_linear(cfg.si_level_db) / paths;
  const double d = link_distance(cfg, link);
  return db_to_linear(cfg.beta0_db) * std::pow(d, -cfg.pathloss_exponent[static_cast<int>(link)]) / paths;
}

}  // namespace fdris
