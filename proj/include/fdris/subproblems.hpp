// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdris/channel.hpp"
#include "fdris/kernels.hpp"
#include "fdris/metrics.hpp"

namespace fdris {

// ---------------------------------------------------------------------------
// Fractional-programming auxiliaries
// ---------------------------------------------------------------------------

/// zeta: Lagrangian-dual-transform auxiliaries. beta: quadratic-transform auxiliaries.
struct FpAuxiliaries {
  double zeta_dl = 0.0;
  double zeta_ul = 0.0;
  cd beta_dl{0.0, 0.0};
  cd beta_ul{0.0, 0.0};
};

/// zeta_i = gamma_i at the current state.
FpAuxiliaries ldt_aux(const ChannelSet& ch, const OptState& st, const SystemParams& sp);

/// Closed-form betas for the given zetas:
///   beta_DL = sqrt(1+zeta_DL) s_DL / (|s_DL|^2 + |i_DL|^2 + sigma_d^2)
///   beta_UL = sqrt(1+zeta_UL) s_UL / (|s_UL|^2 + |i_UL|^2 + sigma_u^2 ||v||^2)
/// with s_UL = sqrt(p) v^H (h_u + G Phi g). Only the zetas of `aux` are read.
FpAuxiliaries qt_aux(const ChannelSet& ch, const OptState& st, const SystemParams& sp, FpAuxiliaries aux);

/// sum_i (log2(1+zeta_i) - zeta_i) + sum_i (1+zeta_i) f_i,  f_i = A_i / (A_i + B_i).
/// Scaled by 1/2 in half-duplex mode, so at zeta = gamma it equals the sum rate.
double ldt_objective(const ChannelSet& ch, const OptState& st, const SystemParams& sp, const FpAuxiliaries& aux);

/// sum_i (1+zeta_i) f_i.
double ratio_sum(const ChannelSet& ch, const OptState& st, const SystemParams& sp, const FpAuxiliaries& aux);

/// sum_i 2 sqrt(1+zeta_i) Re{beta_i^* sqrt(A_i)} - |beta_i|^2 (A_i + B_i).
double qt_objective(const ChannelSet& ch, const OptState& st, const SystemParams& sp, const FpAuxiliaries& aux);

/// qt_objective in binary128. The value grows like 1 + zeta, so at large SINR
/// only this form resolves small absolute differences.
__float128 qt_objective_quad(const ChannelSet& ch, const OptState& st, const SystemParams& sp,
                             const FpAuxiliaries& aux);

/// Square root in binary128: double estimate refined by Newton steps.
__float128 sqrt_quad(__float128 x);

// ---------------------------------------------------------------------------
// Beamformer: semidefinite relaxation with rank-one recovery
// ---------------------------------------------------------------------------

/// The lifted beamformer problem in W = [w; 1][w; 1]^H, (Mt+1) x (Mt+1):
///   maximize tr(A W) + constant
///   s.t. tr(E_DL W) >= b_DL, tr(E_UL W) >= b_UL, tr(W) <= P + 1, W_{M+1,M+1} = 1.
/// tr(A W) + constant equals the surrogate (log terms + qt_objective) at rank one.
/// Rows that cannot bind are dropped; `qos_impossible` marks a QoS row that no
/// beamformer can satisfy.
struct SdrProblem {
  SdpProblem sdp;
  double constant = 0.0;
  bool qos_impossible = false;
};

SdrProblem build_sdr(const ChannelSet& ch, const OptState& st, const SystemParams& sp, const FpAuxiliaries& aux);

/// Surrogate value at a rank-one point, for lifting checks.
double sdr_value(const SdrProblem& prob, const CVec& omega);

/// Recover w from W via its principal eigenvector, scaled by the last entry and
/// clipped to the power budget.
CVec recover_beamformer(const CMat& W, double power_max);

struct SrocrOptions {
  double epsilon = 1e-3;  // stop when lambda_max/tr >= 1 - epsilon
  int max_iterations = 30;
  SdpOptions sdp;
};

struct SrocrResult {
  SdpStatus relaxed_status = SdpStatus::kNumericalError;
  CMat W;                     // terminal iterate
  double relaxed_bound = 0.0;  // tr(A W0) + constant of the rank-relaxed problem
  double rank_ratio = 0.0;     // lambda_max(W) / tr(W)
  double m = 0.0;              // terminal relaxation level
  int iterations = 0;
  int infeasible_steps = 0;
  bool converged = false;
};

SrocrResult run_srocr(const SdrProblem& prob, const SrocrOptions& opts = {});

struct OmegaOptions {
  SrocrOptions srocr;
  int aux_refreshes = 5;
  double accept_tol = 1e-12;
};

struct OmegaUpdate {
  CVec omega;
  bool accepted = false;
  bool qos_infeasible = false;
  int srocr_iterations = 0;
  double rank_ratio = 0.0;
};

OmegaUpdate update_omega(const ChannelSet& ch, const OptState& st, const SystemParams& sp,
                         const OmegaOptions& opts = {});

// ---------------------------------------------------------------------------
// Combiner and uplink power
// ---------------------------------------------------------------------------

struct CombinerUpdate {
  CVec v;
  bool qos_ok = true;
};

/// v = (sigma_u^2 I + eta b b^H)^{-1} a normalized; b = (F + G Phi H) w, a = h_u + G Phi g.
CombinerUpdate update_v(const ChannelSet& ch, const OptState& st, const SystemParams& sp);

struct PowerUpdate {
  double p = 0.0;
  bool qos_feasible = true;
};

/// Sum-rate maximizing p over the QoS-feasible subinterval of [0, P_u_max];
/// minimum total relative QoS violation when that subinterval is empty.
PowerUpdate update_p(const ChannelSet& ch, const OptState& st, const SystemParams& sp, double tol_rel = 1e-9);

// ---------------------------------------------------------------------------
// Trust-region successive convex approximation: phases and positions
// ---------------------------------------------------------------------------

struct TrustRegionState {
  double radius = 0.25;
  double min_radius = 1e-6;
  double max_radius = 3.141592653589793;
  double grow = 2.0;
  double shrink = 0.5;
  double good_ratio = 0.75;
  double poor_ratio = 0.25;

  static TrustRegionState for_phases();
  static TrustRegionState for_positions(double wavelength, double region_side);
  void clamp();
};

struct ScaOptions {
  int max_iterations = 10;
  double lp_tol = 1e-8;
  double min_predicted = 1e-12;  // stop when the model predicts less than this gain (bps/Hz)
  // evaluate every candidate with the closed-form combiner of that candidate
  bool refit_combiner = true;
};

struct ScaReport {
  int iterations = 0;
  int accepted = 0;
  int rejected = 0;
  bool qos_ok = true;
};

/// Sum-rate SCA over the RIS phases. Returns the wrapped phases. With
/// refit_combiner the caller should refit v at the returned point.
RVec update_phi(const ChannelSet& ch, const OptState& st, const SystemParams& sp, TrustRegionState& tr,
                const ScaOptions& opts = {}, ScaReport* report = nullptr);

/// SCA over the positions of one array; the objective is the sum rate for the
/// transmit antennas and RIS elements and the uplink rate for the receive antennas.
PositionSet update_positions(const ScenarioRealization& real, const OptState& st, const SystemParams& sp,
                             Array which, TrustRegionState& tr, const ScaOptions& opts = {},
                             ScaReport* report = nullptr);

}  // namespace fdris
