// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "fdris/channel.hpp"
#include "fdris/metrics.hpp"
#include "fdris/subproblems.hpp"

namespace fdris {

/// Which blocks of the alternating loop run. A disabled position block keeps
/// its array on the initial grid.
struct VariantMask {
  bool optimize_beamformer = true;
  bool optimize_combiner = true;
  bool optimize_power = true;
  bool optimize_phases = true;
  bool move_tx_antennas = true;
  bool move_rx_antennas = true;
  bool move_ris_elements = true;

  /// Only the power block enabled.
  static VariantMask power_only();
};

/// A named baseline: block mask plus duplex mode.
struct Variant {
  std::string name;
  VariantMask mask;
  Duplex duplex = Duplex::kFull;
};

/// ma_me, fa_me, ma_fe, fa_fe, hd_ma_me, hd_fa_fe.
const std::vector<Variant>& all_variants();
/// Throws ConfigError listing the valid names.
const Variant& variant_by_name(const std::string& name);
std::string variant_names_joined();

enum class Block : int { kOmega = 0, kV, kP, kPhi, kTx, kRx, kRis };
inline constexpr int kNumBlocks = 7;
std::string_view block_name(Block b);

struct AoOptions {
  double epsilon = 1e-3;  // stop when the sum-rate gain of an iteration is at most this
  int max_iterations = 50;
  OmegaOptions omega;
  ScaOptions sca;
};

struct AoIterationRecord {
  int iteration = 0;  // 0 is the initial point
  RateReport report;
  std::array<double, kNumBlocks> block_seconds{};
  std::array<bool, kNumBlocks> block_accepted{};
  double radius_phases = 0.0;
  double radius_tx = 0.0;
  double radius_rx = 0.0;
  double radius_ris = 0.0;
  int srocr_iterations = 0;
  std::string errors;  // ';'-separated block failures
};

struct AoTrace {
  std::vector<AoIterationRecord> records;
  bool converged = false;

  /// Deterministic columns only (no wall time).
  std::string to_csv() const;
  /// Per-block wall time, one row per iteration.
  std::string timing_csv() const;
  int iterations() const { return records.empty() ? 0 : records.back().iteration; }
  const RateReport& final_report() const { return records.back().report; }
};

struct AoResult {
  OptState state;
  AoTrace trace;
};

/// Grid layouts at pitch d0, random phases from `seed`, maximum-ratio
/// beamformer at full power, matched-filter combiner, full uplink power.
/// Throws ConfigError when an array does not fit its region.
OptState initialize(const ScenarioConfig& cfg, const ScenarioRealization& real, std::uint64_t seed);

/// Alternating optimization over omega -> v -> p -> Phi -> T_t -> T_r -> R.
AoResult run_ao(const ScenarioConfig& cfg, const ScenarioRealization& real, const VariantMask& mask,
                std::uint64_t seed, const AoOptions& opts = {});

/// Structured snapshot of a state; from_json validates shapes.
nlohmann::json state_to_json(const OptState& st);
OptState state_from_json(const nlohmann::json& j);

}  // namespace fdris
