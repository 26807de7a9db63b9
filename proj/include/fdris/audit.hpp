// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "fdris/channel.hpp"
#include "fdris/metrics.hpp"

namespace fdris {

/// Random feasible-shaped state: grid layouts, random phases, beamformer,
/// unit combiner and uplink power inside their budgets.
OptState random_state(const ScenarioConfig& cfg, std::uint64_t seed);

/// Worst relative error of analytic against central-difference gradients, per
/// block. Errors are relative to the largest gradient entry of the block.
struct GradientAudit {
  int probes = 0;
  double phase = 0.0;
  double tx = 0.0;
  double rx = 0.0;
  double ris = 0.0;
  double worst() const;
  std::string to_csv() const;
};

/// `probes` random states; phase step 1e-6 rad, position step 1e-6 wavelengths.
GradientAudit gradient_audit(const ScenarioConfig& cfg, int probes, std::uint64_t seed);

/// Brute-force comparisons on small random instances.
struct OracleAudit {
  int instances = 0;
  double transform_error = 0.0;       // max |LDT(zeta*) - R|, |QT(beta*) - ratio sum|
  double combiner_shortfall = 0.0;    // max relative gamma_ul(random v) - gamma_ul(v*), clipped at 0
  double power_gap = 0.0;             // max distance of p* to the optimum of a grid spanning the
                                      // QoS-feasible interval, in units of P_u_max
  double power_rate_shortfall = 0.0;  // max grid rate - rate(p*), clipped at 0
  std::string to_csv() const;
};

OracleAudit oracle_audit(const ScenarioConfig& cfg, int instances, int random_combiners, int power_grid,
                         std::uint64_t seed);

}  // namespace fdris
