// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdris/channel.hpp"
#include "fdris/metrics.hpp"

namespace fdris {

/// d(gamma) for gamma = |s|^2 / (|i|^2 + n) with n fixed.
double gamma_derivative(cd s, cd ds, cd i, cd di, double n);

/// Gradients of the SINRs and rates with respect to one block of real
/// variables. Rates honour the duplex mode's time share.
struct BlockGradient {
  RVec gamma_dl;
  RVec gamma_ul;
  RVec rate_dl;
  RVec rate_ul;
  RVec rate_sum() const { return rate_dl + rate_ul; }
};

/// With respect to the RIS phases (radians).
BlockGradient phase_gradient(const ChannelSet& ch, const OptState& st, const SystemParams& sp);

/// With respect to vec(positions) of one array: [x_1, y_1, x_2, y_2, ...].
BlockGradient position_gradient(const ScenarioRealization& real, const OptState& st, const SystemParams& sp,
                                Array array);

}  // namespace fdris
