// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <json.hpp>

#include "fdris/config.hpp"

namespace fdris {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CRow = Eigen::RowVectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// Angles and complex gains of the L paths of one link. Both ends carry an
/// (elevation, azimuth) pair; one-sided links (user ends are single fixed
/// antennas) simply ignore the unused side.
struct PathSet {
  RVec elevation_tx, azimuth_tx;
  RVec elevation_rx, azimuth_rx;
  CVec gain;

  int size() const { return static_cast<int>(gain.size()); }
  /// Throws ValidationError if the arrays disagree in length or a gain is not finite.
  void validate() const;
};

/// One Monte Carlo draw of the propagation environment. Immutable once sampled.
struct ScenarioRealization {
  std::array<PathSet, kNumLinks> links;
  cd inter_user{0.0, 0.0};
  double wavelength_m = 0.1;

  const PathSet& link(Link l) const { return links[static_cast<int>(l)]; }
};

ScenarioRealization sample_realization(const ScenarioConfig& cfg, std::uint64_t seed);

/// Versioned JSON form of a realization (cross-implementation oracle fixtures).
nlohmann::json realization_to_json(const ScenarioRealization& real);
ScenarioRealization realization_from_json(const nlohmann::json& j);

/// Antenna/element coordinates inside a square movement region centred on the
/// array's local origin. Column k is the (x, y) of element k in metres.
struct PositionSet {
  Eigen::Matrix2Xd coords;
  double half_side = 0.0;
  double min_separation = 0.0;

  int size() const { return static_cast<int>(coords.cols()); }
  double min_pairwise_distance() const;
  bool in_region() const;
  bool separated() const;
  /// Throws ValidationError naming the violated constraint (`what` labels the array).
  void validate(const char* what) const;
};

/// Compact row-major grid of `count` points at pitch `pitch`, centred on the origin.
PositionSet grid_positions(int count, double region_side, double pitch);

/// All channels for one set of positions.
///  H: N x Mt, G: Mr x N, h_d: 1 x Mt, h_u: Mr x 1, h_ris_dl: 1 x N, g: N x 1,
///  f_si: Mr x Mt, inter_user: scalar.
struct ChannelSet {
  CMat H;
  CMat G;
  CRow h_d;
  CVec h_u;
  CRow h_ris_dl;
  CVec g;
  CMat f_si;
  cd inter_user{0.0, 0.0};

  static ChannelSet zeros_like(const ChannelSet& other);
};

/// Field-response vector of one antenna at `p`: exp(j 2pi/lambda (x cos(el) sin(az) + y sin(el))).
CVec frv(const Eigen::Vector2d& p, const RVec& elevation, const RVec& azimuth, double wavelength);

/// Field-response matrix: one FRV per column of `positions`.
CMat frm(const Eigen::Matrix2Xd& positions, const RVec& elevation, const RVec& azimuth, double wavelength);

/// C = F^H diag(gain) E. Throws ConfigError on non-conforming dimensions.
CMat assemble_channel(const CMat& recv_frm, const CVec& gain, const CMat& tx_frm);

ChannelSet build_channels(const ScenarioRealization& real, const PositionSet& tx, const PositionSet& rx,
                          const PositionSet& ris);

enum class Array { kTx, kRx, kRis };
enum class Axis { kX, kY };

/// One scalar coordinate of one movable antenna or RIS element.
struct CoordinateId {
  Array array = Array::kTx;
  int index = 0;
  Axis axis = Axis::kX;
};

/// Partial derivative of every channel with respect to one position
/// coordinate. Channels that do not depend on the coordinate are zero.
/// Throws std::out_of_range for an index outside the array.
ChannelSet d_channel_d_position(const ScenarioRealization& real, const PositionSet& tx, const PositionSet& rx,
                                const PositionSet& ris, const CoordinateId& which);

/// All per-element derivatives for one array and axis in a single ChannelSet:
/// for a link whose transmit end is `array`, column m is d(column m)/dq_m; for
/// a link whose receive end is `array`, row m is d(row m)/dq_m. Links that do
/// not touch `array` are zero. No two links of a ChannelSet overlap, so this is
/// lossless.
ChannelSet stacked_position_derivative(const ScenarioRealization& real, const PositionSet& tx,
                                      const PositionSet& rx, const PositionSet& ris, Array array, Axis axis);

}  // namespace fdris
