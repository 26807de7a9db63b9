// SPDX-License-Identifier: Apache-2.0
#include "fdris/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "fdris/format.hpp"

namespace fdris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// relative slack for flagging a constraint as satisfied
constexpr double kFeasTol = 1e-9;

double ratio(cd signal, cd interference, double noise) {
  const double den = std::norm(interference) + noise;
  if (den <= 0.0) return std::norm(signal) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::norm(signal) / den;
}

FeasibilityFlags feasibility(const OptState& st, const SystemParams& sp, double gamma_dl, double gamma_ul) {
  FeasibilityFlags f;
  f.bs_power = st.omega.squaredNorm() <= sp.power_bs_max * (1.0 + kFeasTol);
  f.ul_power = st.p >= 0.0 && st.p <= sp.power_ul_max * (1.0 + kFeasTol);
  f.qos_dl = gamma_dl >= sp.gamma_min_dl * (1.0 - kFeasTol);
  f.qos_ul = gamma_ul >= sp.gamma_min_ul * (1.0 - kFeasTol);
  f.unit_modulus = st.phases.allFinite() && (st.phases.size() == 0 ||
                                             (st.phases.minCoeff() >= 0.0 && st.phases.maxCoeff() <= kTwoPi));
  f.region_tx = st.tx.in_region();
  f.region_rx = st.rx.in_region();
  f.region_ris = st.ris.in_region();
  f.separation_tx = st.tx.separated();
  f.separation_rx = st.rx.separated();
  f.separation_ris = st.ris.separated();
  return f;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

CVec OptState::reflection() const {
  CVec theta(phases.size());
  for (Eigen::Index n = 0; n < phases.size(); ++n) theta[n] = std::polar(1.0, phases[n]);
  return theta;
}

RVec wrap_phases(const RVec& phases) {
  RVec out = phases;
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    double w = std::fmod(out[n], kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    out[n] = w;
  }
  return out;
}

double LinkTerms::gamma_dl() const { return ratio(signal_dl, interference_dl, noise_dl); }
double LinkTerms::gamma_ul() const { return ratio(signal_ul, interference_ul, noise_ul); }

LinkTerms link_terms(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  const CVec theta = st.reflection();
  const CVec h_omega = ch.H * st.omega;                                  // N
  const CRow ris_dl = ch.h_ris_dl.cwiseProduct(theta.transpose());      // h~ Phi
  const CRow vG = st.v.adjoint() * ch.G;                                 // v^H G
  const CRow vG_phi = vG.cwiseProduct(theta.transpose());                // v^H G Phi
  const bool full = sp.duplex == Duplex::kFull;
  const double sqrt_p = std::sqrt(std::max(st.p, 0.0));

  LinkTerms t;
  t.signal_dl = (ch.h_d * st.omega)(0) + (ris_dl * h_omega)(0);
  t.interference_dl = full ? sqrt_p * (ch.inter_user + (ris_dl * ch.g)(0)) : cd(0.0, 0.0);
  t.noise_dl = sp.noise_dl;
  t.signal_ul = sqrt_p * (st.v.dot(ch.h_u) + (vG_phi * ch.g)(0));
  t.interference_ul =
      full ? std::sqrt(sp.eta) * ((st.v.adjoint() * ch.f_si * st.omega)(0) + (vG_phi * h_omega)(0)) : cd(0.0, 0.0);
  t.noise_ul = sp.noise_ul * st.v.squaredNorm();
  return t;
}

double sinr_dl(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  return link_terms(ch, st, sp).gamma_dl();
}

double sinr_ul(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  if (st.v.size() == 0 || st.v.squaredNorm() == 0.0) throw ValidationError("uplink combiner v must be nonzero");
  return link_terms(ch, st, sp).gamma_ul();
}

double rate_of(double gamma, Duplex duplex) {
  const double r = std::log2(1.0 + gamma);
  return duplex == Duplex::kHalf ? 0.5 * r : r;
}

RateReport sum_rate(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  if (st.v.size() == 0 || st.v.squaredNorm() == 0.0) throw ValidationError("uplink combiner v must be nonzero");
  const LinkTerms t = link_terms(ch, st, sp);
  RateReport r;
  r.gamma_dl = t.gamma_dl();
  r.gamma_ul = t.gamma_ul();
  r.rate_dl = rate_of(r.gamma_dl, sp.duplex);
  r.rate_ul = rate_of(r.gamma_ul, sp.duplex);
  r.rate_sum = r.rate_dl + r.rate_ul;
  r.flags = feasibility(st, sp, r.gamma_dl, r.gamma_ul);
  return r;
}

RateReport half_duplex_rate(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  SystemParams hd = sp;
  hd.duplex = Duplex::kHalf;
  // QoS thresholds are stated per rate, so they tighten under time sharing
  hd.gamma_min_dl = (1.0 + sp.gamma_min_dl) * (1.0 + sp.gamma_min_dl) - 1.0;
  hd.gamma_min_ul = (1.0 + sp.gamma_min_ul) * (1.0 + sp.gamma_min_ul) - 1.0;
  if (sp.duplex == Duplex::kHalf) hd = sp;
  return sum_rate(ch, st, hd);
}

std::string rate_report_csv_header() {
  return "r_sum,r_dl,r_ul,gamma_dl,gamma_ul,bs_power_ok,ul_power_ok,qos_dl_ok,qos_ul_ok,unit_modulus_ok,"
         "region_ok,separation_ok,feasible";
}

std::string rate_report_csv_row(const RateReport& r) {
  const auto b = [](bool x) { return x ? "1" : "0"; };
  std::string s;
  s += format_number(r.rate_sum) + "," + format_number(r.rate_dl) + "," + format_number(r.rate_ul) + ",";
  s += format_number(r.gamma_dl) + "," + format_number(r.gamma_ul) + ",";
  s += std::string(b(r.flags.bs_power)) + "," + b(r.flags.ul_power) + "," + b(r.flags.qos_dl) + "," +
       b(r.flags.qos_ul) + "," + b(r.flags.unit_modulus) + "," + b(r.flags.regions()) + "," +
       b(r.flags.separations()) + "," + b(r.flags.all());
  return s;
}

}  // namespace fdris
