// SPDX-License-Identifier: Apache-2.0
//
// Log-barrier method for a linear objective over polyhedron ∩ ball.
// Works in the normalized coordinates u = (x - center) / radius with unit
// rows and a unit gradient, so the ball becomes ||u|| <= 1.

#include <cmath>
#include <limits>

#include "fdris/kernels.hpp"

namespace fdris {

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasibleRestore:
      return "infeasible_restore";
    case LpStatus::kMaxIterations:
      return "max_iterations";
  }
  return "unknown";
}

namespace {

constexpr int kNewtonCap = 800;

// Rows a_i^T u >= b_i with ||a_i|| = 1.
struct Rows {
  RMat a;
  RVec b;
};

struct Barrier {
  const Rows& rows;
  RVec c;   // objective direction (maximized)
  int extra = 0;  // 1 when the last variable is the phase-I margin s

  // value of the barrier objective  -t c^T z - sum log r_i - log(1 - ||u||^2); +inf outside
  double value(const RVec& z, double t) const {
    const auto n = rows.a.cols();
    const RVec u = z.head(n);
    const double q = 1.0 - u.squaredNorm();
    if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
    double f = -t * c.dot(z) - std::log(q);
    for (Eigen::Index i = 0; i < rows.a.rows(); ++i) {
      double r = rows.a.row(i).dot(u) - rows.b[i];
      if (extra) r -= z[n];
      if (!(r > 0.0)) return std::numeric_limits<double>::infinity();
      f -= std::log(r);
    }
    return f;
  }

  // Newton minimization at fixed t. Returns the number of steps.
  int center(RVec& z, double t, int budget) const {
    const auto n = rows.a.cols();
    const auto dim = z.size();
    int steps = 0;
    for (; steps < budget; ++steps) {
      const RVec u = z.head(n);
      const double q = 1.0 - u.squaredNorm();
      RVec grad = -t * c;
      RMat hess = RMat::Zero(dim, dim);
      grad.head(n) += 2.0 * u / q;
      hess.topLeftCorner(n, n) += 2.0 / q * RMat::Identity(n, n) + 4.0 / (q * q) * u * u.transpose();
      for (Eigen::Index i = 0; i < rows.a.rows(); ++i) {
        RVec ai = RVec::Zero(dim);
        ai.head(n) = rows.a.row(i).transpose();
        if (extra) ai[n] = -1.0;
        const double r = ai.dot(z) - rows.b[i];
        grad -= ai / r;
        hess += ai * ai.transpose() / (r * r);
      }
      Eigen::LDLT<RMat> ldlt(hess);
      const RVec dz = -ldlt.solve(grad);
      const double dec2 = -grad.dot(dz);
      if (!std::isfinite(dec2) || dec2 * 0.5 <= 1e-12) break;
      // damped Newton step for a self-concordant barrier: stays in the domain
      const double lam = std::sqrt(dec2);
      const double step = lam > 0.25 ? 1.0 / (1.0 + lam) : 1.0;
      RVec trial = z + step * dz;
      if (!std::isfinite(value(trial, t))) return steps + 1;
      z = trial;
    }
    return steps;
  }
};

}  // namespace

LpResult solve_tr_lp(const TrustRegionLp& prob, double tol) {
  const auto n = prob.center.size();
  if (!(prob.radius > 0.0)) throw ConfigError("trust-region radius must be positive");
  if (prob.c.size() != n) throw ConfigError("trust-region LP gradient size mismatch");
  if (prob.G.rows() != prob.h.size() || (prob.G.rows() > 0 && prob.G.cols() != n)) {
    throw ConfigError("trust-region LP row dimensions mismatch");
  }
  const double radius = prob.radius;
  const RVec& x0 = prob.center;

  // gather rows: a^T x >= h, then map to u
  std::vector<RVec> ga;
  std::vector<double> gh;
  for (Eigen::Index i = 0; i < prob.G.rows(); ++i) {
    ga.emplace_back(prob.G.row(i).transpose());
    gh.push_back(prob.h[i]);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (prob.lower.size() == n && std::isfinite(prob.lower[j])) {
      ga.emplace_back(RVec::Unit(n, j));
      gh.push_back(prob.lower[j]);
    }
    if (prob.upper.size() == n && std::isfinite(prob.upper[j])) {
      ga.emplace_back(-RVec::Unit(n, j));
      gh.push_back(-prob.upper[j]);
    }
  }

  LpResult res;
  res.x = x0;
  res.objective = prob.c.dot(x0);

  double worst_x0 = 0.0;  // largest violation at x0 in normalized units
  Rows rows;
  {
    std::vector<RVec> na;
    std::vector<double> nb;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double scale = radius * ga[i].norm();
      const double bi = gh[i] - ga[i].dot(x0);
      if (scale == 0.0) {
        if (bi > tol * (1.0 + std::abs(gh[i]))) worst_x0 = std::numeric_limits<double>::infinity();
        continue;
      }
      na.push_back(radius * ga[i] / scale);
      nb.push_back(bi / scale);
      worst_x0 = std::max(worst_x0, bi / scale);
    }
    rows.a.resize(static_cast<Eigen::Index>(na.size()), n);
    rows.b.resize(static_cast<Eigen::Index>(nb.size()));
    for (std::size_t i = 0; i < na.size(); ++i) {
      rows.a.row(static_cast<Eigen::Index>(i)) = na[i].transpose();
      rows.b[static_cast<Eigen::Index>(i)] = nb[i];
    }
  }
  const auto m = rows.a.rows();
  const bool x0_feasible = worst_x0 <= tol;
  if (!std::isfinite(worst_x0)) {
    res.status = LpStatus::kInfeasibleRestore;
    return res;
  }

  const double cnorm = prob.c.norm();
  const RVec cu = cnorm > 0.0 ? RVec(prob.c / cnorm) : RVec::Zero(n);
  if (cnorm == 0.0 && x0_feasible) return res;

  auto to_x = [&](const RVec& u) -> RVec { return x0 + radius * u; };

  // ball optimum when no row is active there
  if (cnorm > 0.0) {
    bool ok = true;
    for (Eigen::Index i = 0; i < m && ok; ++i) ok = rows.a.row(i).dot(cu) - rows.b[i] >= 0.0;
    if (ok) {
      res.x = to_x(cu);
      res.objective = prob.c.dot(res.x);
      return res;
    }
  }

  // phase I: maximize margin s with a_i^T u - s >= b_i
  RVec u = RVec::Zero(n);
  int steps = 0;
  if (m > 0) {
    const double margin0 = (rows.a * u - rows.b).minCoeff();
    if (!(margin0 > 1e-9)) {
      RVec z(n + 1);
      z.head(n) = u;
      z[n] = margin0 - 1.0;
      RVec cz = RVec::Zero(n + 1);
      cz[n] = 1.0;
      Barrier ph1{rows, cz, 1};
      bool found = false;
      for (double t = 1.0; steps < kNewtonCap; t *= 8.0) {
        steps += ph1.center(z, t, kNewtonCap - steps);
        if (z[n] > 1e-9) {
          found = true;
          break;
        }
        if ((m + 1.0) / t < 1e-12) break;
      }
      res.newton_steps = steps;
      if (!found) {
        res.status = x0_feasible ? LpStatus::kOptimal : LpStatus::kInfeasibleRestore;
        return res;
      }
      u = z.head(n);
    }
  }

  // phase II
  Barrier ph2{rows, cu, 0};
  const double target = tol / std::max(cnorm * radius, 1e-300);
  double t = (m + 1.0);
  bool done = false;
  while (steps < kNewtonCap) {
    steps += ph2.center(u, t, kNewtonCap - steps);
    if ((m + 1.0) / t <= std::max(target, 1e-14)) {
      done = true;
      break;
    }
    t *= 8.0;
  }
  res.newton_steps = steps;
  res.kkt_residual = (m + 1.0) / t * cnorm * radius;
  const RVec x = to_x(u);
  const double obj = prob.c.dot(x);
  if (obj >= res.objective || !x0_feasible) {
    res.x = x;
    res.objective = obj;
  }
  res.status = done ? LpStatus::kOptimal : LpStatus::kMaxIterations;
  return res;
}

}  // namespace fdris
