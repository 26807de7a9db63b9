// SPDX-License-Identifier: Apache-2.0
//
// Homogeneous self-dual interior-point method for small dense SDPs.
//
// The complex problem is mapped to the real conic form
//
//   minimize  <C, X>   s.t.  <A_i, X> + a_i^T x_l = b_i,   X in S^d_+,  x_l >= 0
//
// where X is the real symmetric embedding of W and x_l holds one slack per
// inequality. The embedding (x, y, s, tau, kappa) is driven to a solution of
//
//   A x = b tau,   A^T y + s = c tau,   b^T y - c^T x = kappa
//
// so tau -> 0 with kappa > 0 yields an infeasibility certificate.

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "fdris/kernels.hpp"

namespace fdris {

std::string_view to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::kOptimal:
      return "optimal";
    case SdpStatus::kInfeasible:
      return "infeasible";
    case SdpStatus::kUnbounded:
      return "unbounded";
    case SdpStatus::kMaxIterations:
      return "max_iterations";
    case SdpStatus::kNumericalError:
      return "numerical_error";
  }
  return "unknown";
}

namespace {

// A point in S^d x R^k.
struct ConeVec {
  RMat s;
  RVec l;
};

double dot(const ConeVec& a, const ConeVec& b) { return (a.s.array() * b.s.array()).sum() + a.l.dot(b.l); }

ConeVec axpy(double alpha, const ConeVec& x, const ConeVec& y) { return {alpha * x.s + y.s, alpha * x.l + y.l}; }

ConeVec scaled(double alpha, const ConeVec& x) { return {alpha * x.s, alpha * x.l}; }

double norm(const ConeVec& a) { return std::sqrt(dot(a, a)); }

RMat sym(const RMat& m) { return 0.5 * (m + m.transpose()); }

RMat real_embedding(const CMat& c) {
  const auto n = c.rows();
  RMat r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = c.real();
  r.topRightCorner(n, n) = -c.imag();
  r.bottomLeftCorner(n, n) = c.imag();
  r.bottomRightCorner(n, n) = c.real();
  return r;
}

CMat from_embedding(const RMat& x) {
  const auto n = x.rows() / 2;
  const RMat re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  const RMat im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  CMat w(n, n);
  w.real() = sym(re);
  w.imag() = 0.5 * (im - im.transpose());
  return w;
}

// Largest alpha in [0, inf) with M + alpha dM PSD, given M PD.
double max_step_psd(const RMat& m, const RMat& dm) {
  Eigen::LLT<RMat> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const RMat l_inv_dm = llt.matrixL().solve(dm);
  const RMat scaled_dm = llt.matrixL().solve(l_inv_dm.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(sym(scaled_dm), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_step_pos(const RVec& x, const RVec& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  }
  return a;
}

double max_step_scalar(double x, double dx) {
  return dx < 0.0 ? -x / dx : std::numeric_limits<double>::infinity();
}

class ConicSolver {
 public:
  ConicSolver(std::vector<ConeVec> rows, RVec b, ConeVec c, int dim, int nslack)
      : rows_(std::move(rows)), b_(std::move(b)), c_(std::move(c)), dim_(dim), nslack_(nslack) {}

  struct Outcome {
    SdpStatus status = SdpStatus::kNumericalError;
    ConeVec x, s;
    RVec y;
    int iterations = 0;
    double pres = 0.0, dres = 0.0, gap = 0.0;
  };

  Outcome solve(double tol, int max_iterations, std::ostream* trace) {
    const int m = static_cast<int>(rows_.size());
    x_ = {RMat::Identity(dim_, dim_), RVec::Ones(nslack_)};
    s_ = x_;
    y_ = RVec::Zero(m);
    tau_ = 1.0;
    kappa_ = 1.0;
    const double nu = dim_ + nslack_ + 1.0;
    const double bnorm = b_.norm();
    const double cnorm = norm(c_);

    Outcome out;
    for (int it = 0; it <= max_iterations; ++it) {
      out.iterations = it;
      // residuals of the embedding
      const RVec ax = apply_a(x_);
      const ConeVec aty = apply_at(y_);
      const RVec rp = b_ * tau_ - ax;
      const ConeVec rd = axpy(-1.0, s_, axpy(-1.0, aty, scaled(tau_, c_)));
      const double cx = dot(c_, x_);
      const double by = b_.dot(y_);
      const double rg = kappa_ + cx - by;
      const double mu = (dot(x_, s_) + tau_ * kappa_) / nu;

      out.pres = (ax / tau_ - b_).norm() / (1.0 + bnorm);
      out.dres = norm(axpy(1.0 / tau_, s_, axpy(1.0 / tau_, aty, scaled(-1.0, c_)))) / (1.0 + cnorm);
      const double pobj = cx / tau_;
      const double dobj = by / tau_;
      out.gap = dot(x_, s_) / (tau_ * tau_);
      if (trace) {
        *trace << "it=" << it << " pobj=" << pobj << " dobj=" << dobj << " pres=" << out.pres
               << " dres=" << out.dres << " gap=" << out.gap << " tau=" << tau_ << " kappa=" << kappa_
               << " mu=" << mu << "\n";
      }
      if (out.pres <= tol && out.dres <= tol && out.gap <= tol * (1.0 + std::abs(pobj))) {
        out.status = SdpStatus::kOptimal;
        break;
      }
      if (by > 0.0 && norm(axpy(1.0, s_, aty)) <= tol * by) {
        out.status = SdpStatus::kInfeasible;
        break;
      }
      if (cx < 0.0 && ax.norm() <= tol * (-cx)) {
        out.status = SdpStatus::kUnbounded;
        break;
      }
      if (it == max_iterations) {
        out.status = SdpStatus::kMaxIterations;
        break;
      }

      if (!factor()) {
        out.status = SdpStatus::kNumericalError;
        break;
      }

      // predictor (affine scaling)
      ConeVec rc_aff = {-x_.s, -x_.l};
      Direction aff;
      if (!direction(rp, rd, rg, rc_aff, -kappa_, 1.0, aff)) {
        out.status = SdpStatus::kNumericalError;
        break;
      }
      const double alpha_aff = std::min(1.0, max_step(aff));
      const ConeVec xa = axpy(alpha_aff, aff.dx, x_);
      const ConeVec sa = axpy(alpha_aff, aff.ds, s_);
      const double mu_aff =
          (dot(xa, sa) + (tau_ + alpha_aff * aff.dtau) * (kappa_ + alpha_aff * aff.dkappa)) / nu;
      const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

      // corrector with the second-order term
      const double target = sigma * mu;
      ConeVec rc;
      rc.s = sym((target * RMat::Identity(dim_, dim_) - aff.dx.s * aff.ds.s) * s_inv_) - x_.s;
      rc.l = ((target - aff.dx.l.array() * aff.ds.l.array()) / s_.l.array()).matrix() - x_.l;
      const double rc_tau = (target - tau_ * kappa_ - aff.dtau * aff.dkappa) / tau_;
      Direction d;
      if (!direction(rp, rd, rg, rc, rc_tau, 1.0 - sigma, d)) {
        out.status = SdpStatus::kNumericalError;
        break;
      }
      const double alpha = std::min(1.0, 0.98 * max_step(d));
      x_ = axpy(alpha, d.dx, x_);
      s_ = axpy(alpha, d.ds, s_);
      y_ += alpha * d.dy;
      tau_ += alpha * d.dtau;
      kappa_ += alpha * d.dkappa;
      x_.s = sym(x_.s);
      s_.s = sym(s_.s);
    }
    out.x = x_;
    out.s = s_;
    out.y = y_;
    if (out.status == SdpStatus::kOptimal || out.status == SdpStatus::kMaxIterations ||
        out.status == SdpStatus::kNumericalError) {
      out.x = scaled(1.0 / tau_, x_);
      out.s = scaled(1.0 / tau_, s_);
      out.y = y_ / tau_;
    }
    return out;
  }

 private:
  struct Direction {
    ConeVec dx, ds;
    RVec dy;
    double dtau = 0.0, dkappa = 0.0;
  };

  RVec apply_a(const ConeVec& x) const {
    RVec out(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) out[static_cast<Eigen::Index>(i)] = dot(rows_[i], x);
    return out;
  }

  ConeVec apply_at(const RVec& y) const {
    ConeVec out{RMat::Zero(dim_, dim_), RVec::Zero(nslack_)};
    for (std::size_t i = 0; i < rows_.size(); ++i) out = axpy(y[static_cast<Eigen::Index>(i)], rows_[i], out);
    return out;
  }

  // HKM scaling operator: sym(X Z S^{-1}) on the matrix block, (x/s) z on the slacks.
  ConeVec scale_op(const ConeVec& z) const {
    return {sym(x_.s * z.s * s_inv_), (x_.l.array() / s_.l.array() * z.l.array()).matrix()};
  }

  bool factor() {
    Eigen::LLT<RMat> llt_s(s_.s);
    if (llt_s.info() != Eigen::Success) return false;
    s_inv_ = llt_s.solve(RMat::Identity(dim_, dim_));
    s_inv_ = sym(s_inv_);
    const int m = static_cast<int>(rows_.size());
    RMat schur(m, m);
    std::vector<ConeVec> d_rows;
    d_rows.reserve(rows_.size());
    for (const auto& r : rows_) d_rows.push_back(scale_op(r));
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) schur(i, j) = schur(j, i) = dot(rows_[i], d_rows[j]);
    }
    dc_ = scale_op(c_);
    adc_ = apply_a(dc_);
    cdc_ = dot(c_, dc_);
    schur_.compute(schur);
    if (schur_.info() != Eigen::Success) {
      const double reg = 1e-14 * std::max(1.0, schur.diagonal().maxCoeff());
      schur_.compute(schur + reg * RMat::Identity(m, m));
      if (schur_.info() != Eigen::Success) return false;
    }
    return true;
  }

  bool direction(const RVec& rp, const ConeVec& rd, double rg, const ConeVec& rc, double rc_tau, double eta,
                 Direction& d) const {
    const ConeVec d_rd = scale_op(scaled(eta, rd));
    const RVec r1 = eta * rp - apply_a(rc) + apply_a(d_rd);
    const double r2 = -eta * rg - dot(c_, rc) + dot(c_, d_rd) - rc_tau;
    const RVec p = schur_.solve(r1);
    const RVec q = schur_.solve(adc_ + b_);
    const RVec w = adc_ - b_;
    const double den = w.dot(q) - cdc_ - kappa_ / tau_;
    if (!std::isfinite(den) || den == 0.0) return false;
    d.dtau = (r2 - w.dot(p)) / den;
    d.dy = p + q * d.dtau;
    d.ds = axpy(d.dtau, c_, axpy(-1.0, apply_at(d.dy), scaled(eta, rd)));
    const ConeVec dds = scale_op(d.ds);
    d.dx = axpy(-1.0, dds, rc);
    d.dkappa = rc_tau - kappa_ / tau_ * d.dtau;
    return d.dy.allFinite() && std::isfinite(d.dtau);
  }

  double max_step(const Direction& d) const {
    double a = std::min(max_step_psd(x_.s, d.dx.s), max_step_psd(s_.s, d.ds.s));
    a = std::min(a, max_step_pos(x_.l, d.dx.l));
    a = std::min(a, max_step_pos(s_.l, d.ds.l));
    a = std::min(a, max_step_scalar(tau_, d.dtau));
    a = std::min(a, max_step_scalar(kappa_, d.dkappa));
    return a;
  }

  std::vector<ConeVec> rows_;
  RVec b_;
  ConeVec c_;
  int dim_;
  int nslack_;

  ConeVec x_, s_;
  RVec y_;
  double tau_ = 1.0, kappa_ = 1.0;

  RMat s_inv_;
  ConeVec dc_;
  RVec adc_;
  double cdc_ = 0.0;
  Eigen::LLT<RMat> schur_;
};

void check_hermitian(const CMat& m, const std::string& what, int n) {
  if (m.rows() != n || m.cols() != n) {
    throw ConfigError(what + " must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw ConfigError(what + " is not Hermitian");
}

}  // namespace

SdpResult solve_sdp(const SdpProblem& prob, const SdpOptions& opts) {
  const int n = prob.size();
  if (n < 1 || n > kSdpMaxSize) {
    throw ConfigError("SDP size " + std::to_string(n) + " outside [1, " + std::to_string(kSdpMaxSize) + "]");
  }
  check_hermitian(prob.A, "SDP objective", n);
  const int dim = 2 * n;
  int nslack = 0;
  for (std::size_t k = 0; k < prob.constraints.size(); ++k) {
    check_hermitian(prob.constraints[k].C, "SDP constraint " + std::to_string(k), n);
    if (prob.constraints[k].sense != Sense::kEqual) ++nslack;
  }

  // rows scaled to unit norm, objective scaled to unit norm
  const int m = static_cast<int>(prob.constraints.size());
  std::vector<ConeVec> rows;
  RVec b(m), row_scale(m);
  int slack_index = 0;
  std::vector<int> slack_of(m, -1);
  for (int k = 0; k < m; ++k) {
    const auto& con = prob.constraints[k];
    // the matrix part is scaled to unit norm; the slack is rescaled with it,
    // so it keeps a unit coefficient
    const RMat cr = 0.5 * real_embedding(con.C);
    const double nr = cr.norm();
    if (nr == 0.0) throw ConfigError("SDP constraint " + std::to_string(k) + " has an all-zero row");
    ConeVec r{cr / nr, RVec::Zero(nslack)};
    if (con.sense != Sense::kEqual) {
      slack_of[k] = slack_index;
      r.l[slack_index++] = con.sense == Sense::kGreaterEqual ? -1.0 : 1.0;
    }
    row_scale[k] = nr;
    rows.push_back(std::move(r));
    b[k] = con.b / nr;
  }
  ConeVec c{-0.5 * real_embedding(prob.A), RVec::Zero(nslack)};
  double obj_scale = norm(c);
  if (obj_scale == 0.0) obj_scale = 1.0;
  c = scaled(1.0 / obj_scale, c);

  ConicSolver solver(std::move(rows), b, c, dim, nslack);
  const auto out = solver.solve(opts.tol * 0.1, opts.max_iterations, opts.trace);

  SdpResult res;
  res.status = out.status;
  res.iterations = out.iterations;
  res.primal_residual = out.pres;
  res.dual_residual = out.dres;
  res.gap = out.gap * obj_scale;
  res.W = from_embedding(out.x.s);
  res.objective = (prob.A * res.W).trace().real();
  res.slack.resize(m);
  res.multiplier.resize(m);
  for (int k = 0; k < m; ++k) {
    res.slack[k] = (prob.constraints[k].C * res.W).trace().real() - prob.constraints[k].b;
    // y of the scaled minimization; flip to the maximization's Lagrangian
    // L = tr(AW) + sum_k mult_k (tr(C_k W) - b_k)
    res.multiplier[k] = -out.y[k] * obj_scale / row_scale[k];
  }
  return res;
}

}  // namespace fdris
