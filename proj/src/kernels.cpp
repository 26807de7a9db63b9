// SPDX-License-Identifier: Apache-2.0
#include <Eigen/Eigenvalues>

#include "fdris/kernels.hpp"

namespace fdris {

EigPair dominant_eigpair(const CMat& M) {
  const auto n = M.rows();
  EigPair out;
  if (n == 0) return out;
  const CMat h = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  out.value = es.eigenvalues()[n - 1];
  out.vector = es.eigenvectors().col(n - 1);
  // fix the global phase: largest-magnitude entry real positive
  Eigen::Index k = 0;
  out.vector.cwiseAbs().maxCoeff(&k);
  if (std::abs(out.vector[k]) > 0.0) out.vector *= std::conj(out.vector[k]) / std::abs(out.vector[k]);
  return out;
}

CVec whitened_mmse_direction(const CVec& a, const CMat& S, double sigma2) {
  const auto n = a.size();
  const CMat k = sigma2 * CMat::Identity(n, n) + 0.5 * (S + S.adjoint());
  CVec v = k.ldlt().solve(a);
  const double nv = v.norm();
  if (!(nv > 0.0) || !std::isfinite(nv)) {
    CVec e = CVec::Zero(n);
    if (n > 0) e[0] = 1.0;
    return e;
  }
  return v / nv;
}

}  // namespace fdris
