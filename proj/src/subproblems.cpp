// SPDX-License-Identifier: Apache-2.0
#include "fdris/subproblems.hpp"

#include <algorithm>
#include <array>
#include <complex>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>

#include "fdris/gradients.hpp"

namespace fdris {

namespace {

constexpr double kQosSlack = 1e-9;

double rate_scale(const SystemParams& sp) { return sp.duplex == Duplex::kHalf ? 0.5 : 1.0; }

bool full_duplex(const SystemParams& sp) { return sp.duplex == Duplex::kFull; }

// h_DL = h_d + h~ Phi H (1 x Mt)
CRow dl_effective(const ChannelSet& ch, const CVec& theta) {
  return ch.h_d + ch.h_ris_dl.cwiseProduct(theta.transpose()) * ch.H;
}

// v^H (F + G Phi H) (1 x Mt)
CRow si_effective(const ChannelSet& ch, const CVec& theta, const CVec& v) {
  return v.adjoint() * (ch.f_si + ch.G * theta.asDiagonal() * ch.H);
}

// h_u + G Phi g (Mr)
CVec ul_effective(const ChannelSet& ch, const CVec& theta) { return ch.h_u + ch.G * theta.asDiagonal() * ch.g; }

bool qos_holds(const RateReport& r, const SystemParams& sp) {
  return r.gamma_dl >= sp.gamma_min_dl * (1.0 - kQosSlack) && r.gamma_ul >= sp.gamma_min_ul * (1.0 - kQosSlack);
}

}  // namespace

// ---------------------------------------------------------------------------

FpAuxiliaries ldt_aux(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  const LinkTerms t = link_terms(ch, st, sp);
  FpAuxiliaries aux;
  aux.zeta_dl = t.gamma_dl();
  aux.zeta_ul = t.gamma_ul();
  return aux;
}

FpAuxiliaries qt_aux(const ChannelSet& ch, const OptState& st, const SystemParams& sp, FpAuxiliaries aux) {
  const LinkTerms t = link_terms(ch, st, sp);
  const double den_dl = std::norm(t.signal_dl) + std::norm(t.interference_dl) + t.noise_dl;
  const double den_ul = std::norm(t.signal_ul) + std::norm(t.interference_ul) + t.noise_ul;
  aux.beta_dl = den_dl > 0.0 ? std::sqrt(1.0 + aux.zeta_dl) * t.signal_dl / den_dl : cd(0.0, 0.0);
  aux.beta_ul = den_ul > 0.0 ? std::sqrt(1.0 + aux.zeta_ul) * t.signal_ul / den_ul : cd(0.0, 0.0);
  return aux;
}

namespace {

using ld = long double;

struct Powers {
  ld a, b;  // |signal|^2 and |interference|^2 + noise
  std::complex<ld> s;
};

std::array<Powers, 2> powers(const LinkTerms& t) {
  const auto mk = [](cd s, cd i, double n) {
    const std::complex<ld> sl(s.real(), s.imag()), il(i.real(), i.imag());
    return Powers{std::norm(sl), std::norm(il) + static_cast<ld>(n), sl};
  };
  return {mk(t.signal_dl, t.interference_dl, t.noise_dl), mk(t.signal_ul, t.interference_ul, t.noise_ul)};
}

}  // namespace

double ratio_sum(const ChannelSet& ch, const OptState& st, const SystemParams& sp, const FpAuxiliaries& aux) {
  const auto pw = powers(link_terms(ch, st, sp));
  const ld zeta[2] = {aux.zeta_dl, aux.zeta_ul};
  ld total = 0.0L;
  for (int k = 0; k < 2; ++k) {
    const ld den = pw[k].a + pw[k].b;
    if (den > 0.0L) total += (1.0L + zeta[k]) * pw[k].a / den;
  }
  return static_cast<double>(total);
}

double ldt_objective(const ChannelSet& ch, const OptState& st, const SystemParams& sp, const FpAuxiliaries& aux) {
  // log2(1+z) - z + (1+z) a/(a+b) rearranged as log2(1+z) + (a - z b)/(a+b)
  const auto pw = powers(link_terms(ch, st, sp));
  const ld zeta[2] = {aux.zeta_dl, aux.zeta_ul};
  ld total = 0.0L;
  for (int k = 0; k < 2; ++k) {
    const ld den = pw[k].a + pw[k].b;
    total += std::log2(1.0L + zeta[k]);
    total += den > 0.0L ? (pw[k].a - zeta[k] * pw[k].b) / den : -zeta[k];
  }
  return rate_scale(sp) * static_cast<double>(total);
}

double qt_objective(const ChannelSet& ch, const OptState& st, const SystemParams& sp, const FpAuxiliaries& aux) {
  const auto pw = powers(link_terms(ch, st, sp));
  const ld zeta[2] = {aux.zeta_dl, aux.zeta_ul};
  const std::complex<ld> beta[2] = {{aux.beta_dl.real(), aux.beta_dl.imag()}, {aux.beta_ul.real(), aux.beta_ul.imag()}};
  ld total = 0.0L;
  for (int k = 0; k < 2; ++k) {
    total += 2.0L * std::sqrt(1.0L + zeta[k]) * std::real(std::conj(beta[k]) * pw[k].s) -
             std::norm(beta[k]) * (pw[k].a + pw[k].b);
  }
  return static_cast<double>(total);
}

__float128 sqrt_quad(__float128 x) {
  if (!(x > 0)) return 0;
  __float128 y = std::sqrt(static_cast<double>(x));
  for (int i = 0; i < 3; ++i) y = (y + x / y) / 2;
  return y;
}

__float128 qt_objective_quad(const ChannelSet& ch, const OptState& st, const SystemParams& sp,
                             const FpAuxiliaries& aux) {
  using q = __float128;
  const LinkTerms t = link_terms(ch, st, sp);
  const cd s[2] = {t.signal_dl, t.signal_ul};
  const cd i[2] = {t.interference_dl, t.interference_ul};
  const double n[2] = {t.noise_dl, t.noise_ul};
  const double zeta[2] = {aux.zeta_dl, aux.zeta_ul};
  const cd beta[2] = {aux.beta_dl, aux.beta_ul};
  q total = 0;
  for (int k = 0; k < 2; ++k) {
    const q sr = s[k].real(), si = s[k].imag();
    const q ab = sr * sr + si * si + static_cast<q>(i[k].real()) * i[k].real() +
                 static_cast<q>(i[k].imag()) * i[k].imag() + n[k];
    const q br = beta[k].real(), bi = beta[k].imag();
    total += 2 * sqrt_quad(1 + static_cast<q>(zeta[k])) * (br * sr + bi * si) - (br * br + bi * bi) * ab;
  }
  return total;
}

// ---------------------------------------------------------------------------

SdrProblem build_sdr(const ChannelSet& ch, const OptState& st, const SystemParams& sp, const FpAuxiliaries& aux) {
  const auto m = st.omega.size();
  const CVec theta = st.reflection();
  const LinkTerms t = link_terms(ch, st, sp);
  const CRow h_dl = dl_effective(ch, theta);
  const CRow h_ul = full_duplex(sp) ? CRow(std::sqrt(sp.eta) * si_effective(ch, theta, st.v)) : CRow::Zero(m);
  const double b_dl_const = std::norm(t.interference_dl) + t.noise_dl;  // B_DL
  const double s_ul2 = std::norm(t.signal_ul);

  const CRow a = std::sqrt(1.0 + aux.zeta_dl) * std::conj(aux.beta_dl) * h_dl;
  const CMat B = std::norm(aux.beta_ul) * h_ul.adjoint() * h_ul + std::norm(aux.beta_dl) * h_dl.adjoint() * h_dl;

  SdrProblem out;
  CMat A = CMat::Zero(m + 1, m + 1);
  A.topLeftCorner(m, m) = -B;
  A.topRightCorner(m, 1) = a.adjoint();
  A.bottomLeftCorner(1, m) = a;
  out.sdp.A = 0.5 * (A + A.adjoint());
  out.constant = std::log2(1.0 + aux.zeta_dl) - aux.zeta_dl + std::log2(1.0 + aux.zeta_ul) - aux.zeta_ul -
                 std::norm(aux.beta_dl) * b_dl_const +
                 2.0 * std::sqrt(1.0 + aux.zeta_ul) * std::real(std::conj(aux.beta_ul) * t.signal_ul) -
                 std::norm(aux.beta_ul) * (s_ul2 + t.noise_ul);

  auto lifted = [&](const CMat& top) {
    CMat e = CMat::Zero(m + 1, m + 1);
    e.topLeftCorner(m, m) = 0.5 * (top + top.adjoint());
    return e;
  };

  // downlink QoS: |h_DL w|^2 >= gamma_min B_DL
  const double b_dl = sp.gamma_min_dl * b_dl_const;
  if (sp.gamma_min_dl > 0.0) {
    if (h_dl.squaredNorm() > 0.0) {
      out.sdp.constraints.push_back({lifted(h_dl.adjoint() * h_dl), Sense::kGreaterEqual, b_dl});
    } else if (b_dl > 0.0) {
      out.qos_impossible = true;
    }
  }
  // uplink QoS: -gamma_min |h_UL w|^2 >= gamma_min sigma_u^2 ||v||^2 - |s_UL|^2
  const double b_ul = sp.gamma_min_ul * t.noise_ul - s_ul2;
  if (sp.gamma_min_ul > 0.0 && h_ul.squaredNorm() > 0.0) {
    out.sdp.constraints.push_back({lifted(-sp.gamma_min_ul * h_ul.adjoint() * h_ul), Sense::kGreaterEqual, b_ul});
  } else if (b_ul > 0.0 && sp.gamma_min_ul > 0.0) {
    out.qos_impossible = true;
  }
  out.sdp.constraints.push_back({CMat::Identity(m + 1, m + 1), Sense::kLessEqual, sp.power_bs_max + 1.0});
  CMat last = CMat::Zero(m + 1, m + 1);
  last(m, m) = 1.0;
  out.sdp.constraints.push_back({last, Sense::kEqual, 1.0});
  return out;
}

double sdr_value(const SdrProblem& prob, const CVec& omega) {
  CVec w(omega.size() + 1);
  w << omega, cd(1.0, 0.0);
  return (w.adjoint() * prob.sdp.A * w)(0).real() + prob.constant;
}

CVec recover_beamformer(const CMat& W, double power_max) {
  const auto m = W.rows() - 1;
  const EigPair e = dominant_eigpair(W);
  const CVec wbar = std::sqrt(std::max(e.value, 0.0)) * e.vector;
  CVec omega = wbar.head(m);
  if (std::abs(wbar[m]) > 1e-12 * std::max(1.0, wbar.norm())) omega /= wbar[m];
  const double pw = omega.squaredNorm();
  if (pw > power_max) omega *= std::sqrt(power_max / pw);
  return omega;
}

SrocrResult run_srocr(const SdrProblem& prob, const SrocrOptions& opts) {
  SrocrResult res;
  const SdpResult relaxed = solve_sdp(prob.sdp, opts.sdp);
  res.relaxed_status = relaxed.status;
  if (relaxed.status != SdpStatus::kOptimal) return res;
  res.relaxed_bound = relaxed.objective + prob.constant;
  res.W = relaxed.W;

  const auto ratio = [](const CMat& w) {
    const double tr = w.trace().real();
    return tr > 0.0 ? dominant_eigpair(w).value / tr : 1.0;
  };
  res.rank_ratio = ratio(res.W);
  double delta = 0.5 * (1.0 - res.rank_ratio);
  res.m = std::min(1.0, res.rank_ratio + delta);
  const auto n = prob.sdp.size();

  while (res.rank_ratio < 1.0 - opts.epsilon && res.iterations < opts.max_iterations) {
    const CVec u = dominant_eigpair(res.W).vector;
    SdpProblem step = prob.sdp;
    step.constraints.push_back({u * u.adjoint() - res.m * CMat::Identity(n, n), Sense::kGreaterEqual, 0.0});
    const SdpResult r = solve_sdp(step, opts.sdp);
    ++res.iterations;
    if (r.status == SdpStatus::kOptimal) {
      res.W = r.W;
    } else {
      delta /= 3.0;
      ++res.infeasible_steps;
    }
    res.rank_ratio = ratio(res.W);
    res.m = std::min(1.0, res.rank_ratio + delta);
  }
  res.converged = res.rank_ratio >= 1.0 - opts.epsilon;
  return res;
}

OmegaUpdate update_omega(const ChannelSet& ch, const OptState& st, const SystemParams& sp, const OmegaOptions& opts) {
  OmegaUpdate out;
  out.omega = st.omega;
  OptState cur = st;
  RateReport cur_report = sum_rate(ch, cur, sp);
  for (int k = 0; k < opts.aux_refreshes; ++k) {
    const FpAuxiliaries aux = qt_aux(ch, cur, sp, ldt_aux(ch, cur, sp));
    const SdrProblem prob = build_sdr(ch, cur, sp, aux);
    if (prob.qos_impossible) {
      out.qos_infeasible = true;
      break;
    }
    const SrocrResult sr = run_srocr(prob, opts.srocr);
    out.srocr_iterations += sr.iterations;
    if (sr.relaxed_status != SdpStatus::kOptimal) {
      out.qos_infeasible = sr.relaxed_status == SdpStatus::kInfeasible;
      break;
    }
    out.rank_ratio = sr.rank_ratio;
    OptState cand = cur;
    cand.omega = recover_beamformer(sr.W, sp.power_bs_max);
    const RateReport cand_report = sum_rate(ch, cand, sp);
    const bool keeps_qos = qos_holds(cand_report, sp) || !qos_holds(cur_report, sp);
    if (!(cand_report.rate_sum > cur_report.rate_sum + opts.accept_tol) || !keeps_qos) break;
    cur = cand;
    cur_report = cand_report;
    out.omega = cand.omega;
    out.accepted = true;
  }
  return out;
}

// ---------------------------------------------------------------------------

CombinerUpdate update_v(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  const CVec theta = st.reflection();
  const CVec a = ul_effective(ch, theta);
  const auto mr = a.size();
  CMat S = CMat::Zero(mr, mr);
  if (full_duplex(sp)) {
    const CVec b = (ch.f_si + ch.G * theta.asDiagonal() * ch.H) * st.omega;
    S = sp.eta * b * b.adjoint();
  }
  CombinerUpdate out;
  out.v = whitened_mmse_direction(a, S, sp.noise_ul);
  OptState next = st;
  next.v = out.v;
  out.qos_ok = sinr_ul(ch, next, sp) >= sp.gamma_min_ul * (1.0 - kQosSlack);
  return out;
}

PowerUpdate update_p(const ChannelSet& ch, const OptState& st, const SystemParams& sp, double tol_rel) {
  // gamma_DL(p) = sd / (p id + nd),  gamma_UL(p) = p su / (iu + nu)
  OptState unit = st;
  unit.p = 1.0;
  const LinkTerms t = link_terms(ch, unit, sp);
  const double sd = std::norm(t.signal_dl);
  const double id = std::norm(t.interference_dl);
  const double nd = t.noise_dl;
  const double su = std::norm(t.signal_ul);
  const double iu = std::norm(t.interference_ul);
  const double nu = t.noise_ul;
  const double pmax = sp.power_ul_max;
  const double k = rate_scale(sp);

  const auto g_dl = [&](double p) { return sd / (p * id + nd); };
  const auto g_ul = [&](double p) { return p * su / (iu + nu); };
  const auto rate = [&](double p) { return k * (std::log2(1.0 + g_dl(p)) + std::log2(1.0 + g_ul(p))); };
  const auto slope = [&](double p) {
    const double a = p * id + nd;
    return -sd * id / (a * (a + sd)) + su / (iu + nu + p * su);
  };

  double lo = 0.0, hi = pmax;
  if (sp.gamma_min_ul > 0.0) lo = su > 0.0 ? sp.gamma_min_ul * (iu + nu) / su : std::numeric_limits<double>::infinity();
  if (sp.gamma_min_dl > 0.0) {
    if (id > 0.0) {
      hi = std::min(hi, (sd / sp.gamma_min_dl - nd) / id);
    } else if (sd / nd < sp.gamma_min_dl) {
      hi = -1.0;
    }
  }
  lo = std::max(lo, 0.0);

  PowerUpdate out;
  if (lo <= hi) {
    std::vector<double> cand = {lo, hi};
    double a = lo, b = hi;
    if (slope(a) > 0.0 && slope(b) < 0.0) {
      for (int i = 0; i < 200 && b - a > tol_rel * pmax; ++i) {
        const double mid = 0.5 * (a + b);
        (slope(mid) > 0.0 ? a : b) = mid;
      }
      cand.push_back(0.5 * (a + b));
    }
    double best = cand[0];
    for (double p : cand)
      if (rate(p) > rate(best)) best = p;
    out.p = best;
    // keep the current point on numerical ties
    if (st.p >= lo && st.p <= hi && rate(st.p) >= rate(best)) out.p = st.p;
    out.qos_feasible = true;
    return out;
  }

  // no QoS-feasible power: minimize the summed relative shortfall
  const auto violation = [&](double p) {
    double v = 0.0;
    if (sp.gamma_min_dl > 0.0) v += std::max(0.0, 1.0 - g_dl(p) / sp.gamma_min_dl);
    if (sp.gamma_min_ul > 0.0) v += std::max(0.0, 1.0 - g_ul(p) / sp.gamma_min_ul);
    return v;
  };
  constexpr int kGrid = 2000;
  double best = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double p = pmax * i / kGrid;
    if (violation(p) < violation(best)) best = p;
  }
  double a = std::max(0.0, best - pmax / kGrid), b = std::min(pmax, best + pmax / kGrid);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x1 = b - r * (b - a), x2 = a + r * (b - a);
    (violation(x1) <= violation(x2) ? b : a) = violation(x1) <= violation(x2) ? x2 : x1;
  }
  if (violation(0.5 * (a + b)) < violation(best)) best = 0.5 * (a + b);
  out.p = best;
  out.qos_feasible = false;
  return out;
}

// ---------------------------------------------------------------------------

TrustRegionState TrustRegionState::for_phases() {
  TrustRegionState s;
  s.radius = 0.25;
  s.max_radius = std::numbers::pi;
  return s;
}

TrustRegionState TrustRegionState::for_positions(double wavelength, double region_side) {
  TrustRegionState s;
  s.radius = 0.25 * wavelength;
  s.max_radius = region_side / 2.0;
  return s;
}

void TrustRegionState::clamp() { radius = std::clamp(radius, min_radius, max_radius); }

namespace {

// One trust-region SCA loop on a real vector x. `eval` returns the objective
// and SINRs at x (nullopt when x violates a hard constraint); `grad` returns
// gradients at x; `extra_rows` appends geometric rows for the current center.
struct ScaProblem {
  std::function<std::optional<RateReport>(const RVec&)> eval;
  std::function<BlockGradient(const RVec&)> grad;
  std::function<void(const RVec&, double, std::vector<RVec>&, std::vector<double>&)> extra_rows;
  RVec lower, upper;
  bool use_dl_qos = true;
  bool uplink_only = false;
};

double objective_of(const RateReport& r, bool uplink_only) { return uplink_only ? r.rate_ul : r.rate_sum; }

RVec run_sca(const ScaProblem& prob, RVec x, const SystemParams& sp, TrustRegionState& tr, const ScaOptions& opts,
             ScaReport* report) {
  ScaReport rep;
  tr.clamp();
  auto cur = prob.eval(x);
  if (!cur) {
    if (report) *report = rep;
    return x;
  }
  // curvature back-off of the linearized QoS rows, learned from rejected steps
  double kappa_dl = 0.0, kappa_ul = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    ++rep.iterations;
    const BlockGradient g = prob.grad(x);
    const RVec c = prob.uplink_only ? g.rate_ul : g.rate_sum();

    std::vector<RVec> rows;
    std::vector<double> rhs;
    const double thr_dl = std::min(sp.gamma_min_dl, cur->gamma_dl);
    const double thr_ul = std::min(sp.gamma_min_ul, cur->gamma_ul);
    const double r2 = tr.radius * tr.radius;
    if (prob.use_dl_qos && sp.gamma_min_dl > 0.0) {
      rows.push_back(g.gamma_dl);
      rhs.push_back(thr_dl - cur->gamma_dl + g.gamma_dl.dot(x) + kappa_dl * r2);
    }
    if (sp.gamma_min_ul > 0.0) {
      rows.push_back(g.gamma_ul);
      rhs.push_back(thr_ul - cur->gamma_ul + g.gamma_ul.dot(x) + kappa_ul * r2);
    }
    if (prob.extra_rows) prob.extra_rows(x, tr.radius, rows, rhs);

    TrustRegionLp lp;
    lp.c = c;
    lp.G.resize(static_cast<Eigen::Index>(rows.size()), x.size());
    lp.h.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      lp.G.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
      lp.h[static_cast<Eigen::Index>(i)] = rhs[i];
    }
    lp.lower = prob.lower;
    lp.upper = prob.upper;
    lp.center = x;
    lp.radius = tr.radius;
    const LpResult sol = solve_tr_lp(lp, opts.lp_tol);
    const double predicted = c.dot(sol.x - x);
    if (sol.status == LpStatus::kInfeasibleRestore || !(predicted > opts.min_predicted)) {
      if (sol.status != LpStatus::kInfeasibleRestore) break;  // stationary for the model
      ++rep.rejected;
      tr.radius *= tr.shrink;
      if (tr.radius < tr.min_radius) break;
      continue;
    }

    const auto next = prob.eval(sol.x);
    bool ok = next.has_value();
    bool qos_miss = false;
    double actual = 0.0;
    if (ok) {
      actual = objective_of(*next, prob.uplink_only) - objective_of(*cur, prob.uplink_only);
      const bool dl_ok = !prob.use_dl_qos || sp.gamma_min_dl <= 0.0 || next->gamma_dl >= thr_dl * (1.0 - 1e-12);
      const bool ul_ok = sp.gamma_min_ul <= 0.0 || next->gamma_ul >= thr_ul * (1.0 - 1e-12);
      const RVec d = sol.x - x;
      const double d2 = std::max(d.squaredNorm(), 1e-300);
      if (!dl_ok)
        kappa_dl = std::max(kappa_dl, 2.0 * (cur->gamma_dl + g.gamma_dl.dot(d) - next->gamma_dl) / d2);
      if (!ul_ok)
        kappa_ul = std::max(kappa_ul, 2.0 * (cur->gamma_ul + g.gamma_ul.dot(d) - next->gamma_ul) / d2);
      qos_miss = actual > 0.0 && !(dl_ok && ul_ok);
      ok = actual > 0.0 && dl_ok && ul_ok;
    }
    if (qos_miss) {
      ++rep.rejected;  // retry at the same radius with the larger back-off
      continue;
    }
    if (ok) {
      ++rep.accepted;
      x = sol.x;
      cur = next;
      const double rho = actual / predicted;
      if (rho > tr.good_ratio) tr.radius *= tr.grow;
      else if (rho < tr.poor_ratio) tr.radius *= tr.shrink;
    } else {
      ++rep.rejected;
      tr.radius *= tr.shrink;
    }
    if (tr.radius < tr.min_radius) {
      tr.clamp();
      break;
    }
    tr.clamp();
  }
  tr.clamp();
  rep.qos_ok = qos_holds(*cur, sp);
  if (report) *report = rep;
  return x;
}

}  // namespace

RVec update_phi(const ChannelSet& ch, const OptState& st, const SystemParams& sp, TrustRegionState& tr,
                const ScaOptions& opts, ScaReport* report) {
  OptState work = st;
  ScaProblem prob;
  prob.eval = [&](const RVec& x) -> std::optional<RateReport> {
    work.phases = x;
    if (opts.refit_combiner) work.v = update_v(ch, work, sp).v;
    return sum_rate(ch, work, sp);
  };
  prob.grad = [&](const RVec& x) {
    work.phases = x;
    if (opts.refit_combiner) work.v = update_v(ch, work, sp).v;
    return phase_gradient(ch, work, sp);
  };
  const RVec x = run_sca(prob, st.phases, sp, tr, opts, report);
  return wrap_phases(x);
}

PositionSet update_positions(const ScenarioRealization& real, const OptState& st, const SystemParams& sp,
                             Array which, TrustRegionState& tr, const ScaOptions& opts, ScaReport* report) {
  OptState work = st;
  PositionSet& target = which == Array::kTx ? work.tx : which == Array::kRx ? work.rx : work.ris;
  const PositionSet base = target;
  const auto count = base.size();

  const auto to_vec = [](const PositionSet& ps) {
    return RVec(Eigen::Map<const RVec>(ps.coords.data(), ps.coords.size()));
  };
  const auto set_vec = [&](const RVec& x) {
    target.coords = Eigen::Map<const Eigen::Matrix2Xd>(x.data(), 2, count);
  };

  ScaProblem prob;
  prob.uplink_only = which == Array::kRx;
  prob.use_dl_qos = which != Array::kRx;
  prob.eval = [&](const RVec& x) -> std::optional<RateReport> {
    set_vec(x);
    if (!target.in_region() || !target.separated()) return std::nullopt;
    const ChannelSet ch = build_channels(real, work.tx, work.rx, work.ris);
    if (opts.refit_combiner) work.v = update_v(ch, work, sp).v;
    return sum_rate(ch, work, sp);
  };
  prob.grad = [&](const RVec& x) {
    set_vec(x);
    if (opts.refit_combiner) work.v = update_v(build_channels(real, work.tx, work.rx, work.ris), work, sp).v;
    return position_gradient(real, work, sp, which);
  };
  prob.lower = RVec::Constant(2 * count, -base.half_side);
  prob.upper = RVec::Constant(2 * count, base.half_side);
  prob.extra_rows = [&](const RVec& x, double radius, std::vector<RVec>& rows, std::vector<double>& rhs) {
    // distance lower bound u^T (x_m - x_k) >= d0 about the current iterate,
    // for pairs that the trust region could bring closer than d0
    for (int m = 0; m < count; ++m) {
      for (int k = m + 1; k < count; ++k) {
        const Eigen::Vector2d d(x[2 * m] - x[2 * k], x[2 * m + 1] - x[2 * k + 1]);
        const double dist = d.norm();
        if (dist - std::sqrt(2.0) * radius >= base.min_separation || dist == 0.0) continue;
        const Eigen::Vector2d u = d / dist;
        RVec row = RVec::Zero(2 * count);
        row.segment<2>(2 * m) = u;
        row.segment<2>(2 * k) = -u;
        rows.push_back(row);
        rhs.push_back(base.min_separation);
      }
    }
  };

  const RVec x = run_sca(prob, to_vec(base), sp, tr, opts, report);
  PositionSet out = base;
  out.coords = Eigen::Map<const Eigen::Matrix2Xd>(x.data(), 2, count);
  return out;
}

}  // namespace fdris
