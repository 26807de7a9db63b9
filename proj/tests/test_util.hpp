// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "fdris/channel.hpp"
#include "fdris/metrics.hpp"

namespace fdris::testing {

inline CMat random_cmat(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * cd(n(rng), n(rng));
  return m;
}

inline CVec random_cvec(std::mt19937_64& rng, int n, double scale = 1.0) { return random_cmat(rng, n, 1, scale); }

inline CMat random_hermitian(std::mt19937_64& rng, int n) {
  const CMat x = random_cmat(rng, n, n);
  return 0.5 * (x + x.adjoint());
}

inline CVec random_unit(std::mt19937_64& rng, int n) {
  CVec v = random_cvec(rng, n);
  return v / v.norm();
}

// Cyclic Jacobi on a real symmetric matrix. Returns eigenvalues (unsorted)
// and the eigenvectors as columns of `vecs`.
inline RVec jacobi_eigen(RMat a, RMat* vecs = nullptr) {
  const auto n = a.rows();
  RMat v = RMat::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (vecs) *vecs = v;
  return a.diagonal();
}

// Largest eigenvalue of a Hermitian matrix via Jacobi on its real embedding.
inline double lambda_max_oracle(const CMat& m) {
  const auto n = m.rows();
  RMat r(2 * n, 2 * n);
  r << m.real(), -m.imag(), m.imag(), m.real();
  return jacobi_eigen(r).maxCoeff();
}

// Small random state for the desk-style shapes.
struct Instance {
  ScenarioConfig cfg;
  ScenarioRealization real;
  SystemParams sp;
  OptState st;
  ChannelSet ch;
};

inline Instance random_instance(std::uint64_t seed, int mt = 4, int mr = 2, int n = 8, int paths = 4) {
  Instance in;
  in.cfg = profile_config("desk");
  in.cfg.antennas_tx = mt;
  in.cfg.antennas_rx = mr;
  in.cfg.ris_elements = n;
  for (Link l : kAllLinks)
    if (l != Link::kSI) in.cfg.paths[static_cast<int>(l)] = paths;
  in.real = sample_realization(in.cfg, seed);
  in.sp = system_params(in.cfg);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double side = in.cfg.region_side_m();
  const double pitch = 1.25 * in.cfg.min_separation_m();
  in.st.tx = grid_positions(mt, side, pitch);
  in.st.rx = grid_positions(mr, side, pitch);
  in.st.ris = grid_positions(n, side, pitch);
  for (PositionSet* ps : {&in.st.tx, &in.st.rx, &in.st.ris}) ps->min_separation = in.cfg.min_separation_m();
  in.st.phases = RVec(n);
  for (int k = 0; k < n; ++k) in.st.phases[k] = 2.0 * M_PI * u(rng);
  in.st.omega = random_cvec(rng, mt);
  in.st.omega *= std::sqrt(in.sp.power_bs_max) * u(rng) / in.st.omega.norm();
  in.st.v = random_unit(rng, mr);
  in.st.p = in.sp.power_ul_max * u(rng);
  in.ch = build_channels(in.real, in.st.tx, in.st.rx, in.st.ris);
  return in;
}

}  // namespace fdris::testing
