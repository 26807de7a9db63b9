// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdris/ao.hpp"
#include "fdris/config.hpp"

namespace fdris {

enum class SweepParameter { kRisElements, kEta, kPowerBsMax, kDuplex };
std::string_view parameter_key(SweepParameter p);
SweepParameter parameter_from_key(const std::string& key);

/// One Monte Carlo sweep. Values of the duplex parameter are 0 (full) and 1 (half).
struct SweepSpec {
  SweepParameter parameter = SweepParameter::kRisElements;
  std::vector<double> values;
  std::vector<std::string> variants;
  int realizations = 1;
  std::uint64_t seed_base = 1;
  ScenarioConfig base;
  AoOptions ao;
  int threads = 0;  // 0: hardware concurrency

  /// Throws ConfigError naming the first problem.
  void validate() const;
};

/// {"parameter": "ris_elements" | "si_eta" | "power_bs_max_dbm" | "duplex",
///  "values": [...], "variants": [...], "realizations": n, "seed_base": s,
///  "scenario": {...scenario keys...}, "max_iterations": n, "threads": n}
/// Duplex values may be given as "full" / "half".
SweepSpec sweep_from_json(const nlohmann::json& j, const ScenarioConfig& base = {});
SweepSpec load_sweep(const std::string& path, const ScenarioConfig& base = {});

/// splitmix64 finalizer of (a, b).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
/// Seed of realization `index`; shared by every variant and swept value.
std::uint64_t realization_seed(std::uint64_t seed_base, int index);

/// Scenario of one sweep cell.
ScenarioConfig cell_config(const SweepSpec& spec, const Variant& variant, double value);

struct ResultRow {
  std::string variant;
  double value = 0.0;
  int index = 0;
  std::uint64_t seed = 0;
  double r_sum = 0.0;
  double r_dl = 0.0;
  double r_ul = 0.0;
  double gamma_dl = 0.0;
  double gamma_ul = 0.0;
  int iterations = 0;
  bool converged = false;
  bool feasible = false;
  std::string error;  // empty on success
};

struct ResultTable {
  SweepParameter parameter = SweepParameter::kRisElements;
  std::vector<ResultRow> rows;

  std::string to_csv() const;
  static ResultTable from_csv(const std::string& text);
};

/// One AO run per (variant, value, realization), executed on a worker pool.
/// Rows come back in (variant, value, index) order regardless of scheduling.
ResultTable run_sweep(const SweepSpec& spec);

struct AggregateRow {
  std::string variant;
  double value = 0.0;
  int count = 0;  // successful runs
  int failures = 0;
  double mean_sum = 0.0, se_sum = 0.0;
  double mean_dl = 0.0, se_dl = 0.0;
  double mean_ul = 0.0, se_ul = 0.0;
  double converged_fraction = 0.0;
};

/// Mean and standard error per (variant, value), in first-appearance order.
std::vector<AggregateRow> aggregate(const ResultTable& table);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

/// Line plot of mean sum rate with standard-error bars, one series per variant.
std::string render_svg(const std::vector<AggregateRow>& rows, SweepParameter parameter,
                       const std::string& title = "");

/// Writes results.csv, summary.csv and sum_rate.svg into `dir` for the listed
/// variants (all variants in the table when `variants` is null). Throws
/// ConfigError listing the valid variants when the selection is empty or
/// unknown, IoError naming the path on write failure.
void emit_outputs(const ResultTable& table, const std::string& dir, const std::vector<std::string>* variants = nullptr);

/// Writes `text` to `path`, creating parent directories. Throws IoError naming the path.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace fdris
