// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "fdris/channel.hpp"
#include "fdris/config.hpp"

namespace fdris {

/// The optimization variables {p, omega, v, Phi, T_t, T_r, R}. Phi is stored
/// through its phases: Phi = diag(exp(j * phases)).
struct OptState {
  CVec omega;     // transmit beamformer, Mt
  CVec v;         // receive combiner, Mr
  double p = 0.0;  // uplink power, W
  RVec phases;    // RIS phases in [0, 2pi], N
  PositionSet tx;
  PositionSet rx;
  PositionSet ris;

  CVec reflection() const;
};

/// Wraps every phase into [0, 2pi).
RVec wrap_phases(const RVec& phases);

/// Signal, interference and noise terms of both SINRs:
///   gamma = |signal|^2 / (|interference|^2 + noise).
/// DL: signal (h_d + h~ Phi H) w, interference sqrt(p) (I + h~ Phi g), noise sigma_d^2.
/// UL: signal sqrt(p) v^H (h_u + G Phi g), interference sqrt(eta) v^H (F + G Phi H) w,
///     noise sigma_u^2 ||v||^2.
/// In half-duplex mode both interference terms are zero.
struct LinkTerms {
  cd signal_dl{0.0, 0.0};
  cd interference_dl{0.0, 0.0};
  double noise_dl = 0.0;
  cd signal_ul{0.0, 0.0};
  cd interference_ul{0.0, 0.0};
  double noise_ul = 0.0;

  double gamma_dl() const;
  double gamma_ul() const;
};

LinkTerms link_terms(const ChannelSet& ch, const OptState& st, const SystemParams& sp);

/// Downlink SINR.
double sinr_dl(const ChannelSet& ch, const OptState& st, const SystemParams& sp);
/// Uplink SINR. Throws ValidationError when v = 0.
double sinr_ul(const ChannelSet& ch, const OptState& st, const SystemParams& sp);

struct FeasibilityFlags {
  bool bs_power = true;
  bool ul_power = true;
  bool qos_dl = true;
  bool qos_ul = true;
  bool unit_modulus = true;
  bool region_tx = true;
  bool region_rx = true;
  bool region_ris = true;
  bool separation_tx = true;
  bool separation_rx = true;
  bool separation_ris = true;

  bool qos() const { return qos_dl && qos_ul; }
  bool regions() const { return region_tx && region_rx && region_ris; }
  bool separations() const { return separation_tx && separation_rx && separation_ris; }
  bool all() const { return bs_power && ul_power && qos() && unit_modulus && regions() && separations(); }
};

struct RateReport {
  double gamma_dl = 0.0;
  double gamma_ul = 0.0;
  double rate_dl = 0.0;
  double rate_ul = 0.0;
  double rate_sum = 0.0;
  FeasibilityFlags flags;
};

/// Rate of one user from its SINR, honouring the duplex mode's time share.
double rate_of(double gamma, Duplex duplex);

/// Full evaluation of the objective and every constraint. In half-duplex mode
/// this is the half-duplex report.
RateReport sum_rate(const ChannelSet& ch, const OptState& st, const SystemParams& sp);

/// Orthogonal time sharing baseline: each user gets half the time and sees
/// neither self-interference nor inter-user interference.
RateReport half_duplex_rate(const ChannelSet& ch, const OptState& st, const SystemParams& sp);

/// Column order of rate_report_csv_row.
std::string rate_report_csv_header();
std::string rate_report_csv_row(const RateReport& r);

}  // namespace fdris
