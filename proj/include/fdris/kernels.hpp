// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "fdris/channel.hpp"

namespace fdris {

// ---------------------------------------------------------------------------
// Small dense complex SDP
//
//   maximize    tr(A W)
//   subject to  tr(C_k W) {>=, <=, =} b_k,   k = 1..K
//               W Hermitian positive semidefinite (n x n)
//
// Solved on the real symmetric embedding [Re -Im; Im Re] with a homogeneous
// self-dual primal-dual interior-point method (HKM direction, Mehrotra
// predictor-corrector), so infeasible and unbounded problems are detected.
// ---------------------------------------------------------------------------

enum class Sense { kGreaterEqual, kLessEqual, kEqual };

struct SdpConstraint {
  CMat C;
  Sense sense = Sense::kLessEqual;
  double b = 0.0;
};

struct SdpProblem {
  CMat A;
  std::vector<SdpConstraint> constraints;
  int size() const { return static_cast<int>(A.rows()); }
};

/// Largest PSD dimension accepted by solve_sdp.
inline constexpr int kSdpMaxSize = 64;

enum class SdpStatus { kOptimal, kInfeasible, kUnbounded, kMaxIterations, kNumericalError };
std::string_view to_string(SdpStatus s);

struct SdpOptions {
  double tol = 1e-7;
  int max_iterations = 100;
  std::ostream* trace = nullptr;  // per-iteration residual dump when set
};

struct SdpResult {
  SdpStatus status = SdpStatus::kNumericalError;
  CMat W;
  double objective = 0.0;
  int iterations = 0;
  /// Worst scaled residuals at termination.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  /// Per constraint: tr(C_k W) - b_k and the Lagrange multiplier.
  RVec slack;
  RVec multiplier;
};

/// Throws ConfigError for a malformed problem (non-Hermitian data, size cap).
SdpResult solve_sdp(const SdpProblem& prob, const SdpOptions& opts = {});

struct EigPair {
  double value = 0.0;
  CVec vector;
};

/// Largest eigenvalue of a Hermitian matrix and a unit eigenvector.
EigPair dominant_eigpair(const CMat& M);

/// (sigma2 I + S)^{-1} a, normalized. Maximizes |v^H a|^2 / (v^H (S + sigma2 I) v).
CVec whitened_mmse_direction(const CVec& a, const CMat& S, double sigma2);

// ---------------------------------------------------------------------------
// Trust-region linear program
//
//   maximize    c^T x
//   subject to  G x >= h,   lower <= x <= upper,   ||x - center|| <= radius
// ---------------------------------------------------------------------------

struct TrustRegionLp {
  RVec c;
  RMat G;  // rows x n (may have zero rows)
  RVec h;
  RVec lower;  // empty = unbounded
  RVec upper;
  RVec center;
  double radius = 1.0;
};

enum class LpStatus { kOptimal, kInfeasibleRestore, kMaxIterations };
std::string_view to_string(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::kOptimal;
  RVec x;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int newton_steps = 0;
};

LpResult solve_tr_lp(const TrustRegionLp& prob, double tol = 1e-8);

}  // namespace fdris
