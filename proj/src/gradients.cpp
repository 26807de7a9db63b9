// SPDX-License-Identifier: Apache-2.0
#include "fdris/gradients.hpp"

#include <cmath>
#include <numbers>

namespace fdris {

namespace {

struct TermDerivative {
  cd s_dl{0.0, 0.0};
  cd i_dl{0.0, 0.0};
  cd s_ul{0.0, 0.0};
  cd i_ul{0.0, 0.0};
};

// Directional derivative of the signal/interference amplitudes along a
// channel perturbation dch and a reflection perturbation dtheta.
TermDerivative directional(const ChannelSet& ch, const ChannelSet& dch, const CVec& theta, const CVec& dtheta,
                           const OptState& st, const SystemParams& sp) {
  const bool full = sp.duplex == Duplex::kFull;
  const double sqrt_p = std::sqrt(std::max(st.p, 0.0));
  const double sqrt_eta = std::sqrt(sp.eta);
  const CVec h_w = ch.H * st.omega;
  const CVec dh_w = dch.H * st.omega;
  const CRow vG = st.v.adjoint() * ch.G;
  const CRow vdG = st.v.adjoint() * dch.G;

  const CRow rd_theta = ch.h_ris_dl.cwiseProduct(theta.transpose());
  const CRow drd_theta = dch.h_ris_dl.cwiseProduct(theta.transpose());
  const CRow rd_dtheta = ch.h_ris_dl.cwiseProduct(dtheta.transpose());
  const CRow vG_theta = vG.cwiseProduct(theta.transpose());
  const CRow vdG_theta = vdG.cwiseProduct(theta.transpose());
  const CRow vG_dtheta = vG.cwiseProduct(dtheta.transpose());

  TermDerivative d;
  d.s_dl = (dch.h_d * st.omega)(0) + (drd_theta * h_w)(0) + (rd_dtheta * h_w)(0) + (rd_theta * dh_w)(0);
  d.s_ul = sqrt_p * (st.v.dot(dch.h_u) + (vdG_theta * ch.g)(0) + (vG_dtheta * ch.g)(0) + (vG_theta * dch.g)(0));
  if (full) {
    d.i_dl = sqrt_p * ((drd_theta * ch.g)(0) + (rd_dtheta * ch.g)(0) + (rd_theta * dch.g)(0));
    d.i_ul = sqrt_eta * ((st.v.adjoint() * dch.f_si * st.omega)(0) + (vdG_theta * h_w)(0) +
                         (vG_dtheta * h_w)(0) + (vG_theta * dh_w)(0));
  }
  return d;
}

// Keep only element `m` of `array` in a stacked derivative.
ChannelSet mask_element(const ChannelSet& stacked, Array array, int m) {
  ChannelSet out = ChannelSet::zeros_like(stacked);
  switch (array) {
    case Array::kTx:  // transmit end of br, bd, si
      out.H.col(m) = stacked.H.col(m);
      out.h_d[m] = stacked.h_d[m];
      out.f_si.col(m) = stacked.f_si.col(m);
      break;
    case Array::kRx:  // receive end of rb, bu, si
      out.G.row(m) = stacked.G.row(m);
      out.h_u[m] = stacked.h_u[m];
      out.f_si.row(m) = stacked.f_si.row(m);
      break;
    case Array::kRis:  // receive end of br, ru; transmit end of rb, rd
      out.H.row(m) = stacked.H.row(m);
      out.g[m] = stacked.g[m];
      out.G.col(m) = stacked.G.col(m);
      out.h_ris_dl[m] = stacked.h_ris_dl[m];
      break;
  }
  return out;
}

BlockGradient allocate(Eigen::Index n) {
  BlockGradient g;
  g.gamma_dl = RVec::Zero(n);
  g.gamma_ul = RVec::Zero(n);
  g.rate_dl = RVec::Zero(n);
  g.rate_ul = RVec::Zero(n);
  return g;
}

void accumulate(BlockGradient& g, Eigen::Index k, const LinkTerms& t, const TermDerivative& d,
                const SystemParams& sp) {
  const double scale = (sp.duplex == Duplex::kHalf ? 0.5 : 1.0) / std::numbers::ln2;
  g.gamma_dl[k] = gamma_derivative(t.signal_dl, d.s_dl, t.interference_dl, d.i_dl, t.noise_dl);
  g.gamma_ul[k] = gamma_derivative(t.signal_ul, d.s_ul, t.interference_ul, d.i_ul, t.noise_ul);
  g.rate_dl[k] = scale * g.gamma_dl[k] / (1.0 + t.gamma_dl());
  g.rate_ul[k] = scale * g.gamma_ul[k] / (1.0 + t.gamma_ul());
}

}  // namespace

double gamma_derivative(cd s, cd ds, cd i, cd di, double n) {
  const double den = std::norm(i) + n;
  if (!(den > 0.0)) return 0.0;
  const double num = 2.0 * std::real(std::conj(s) * ds) * den - 2.0 * std::norm(s) * std::real(std::conj(i) * di);
  return num / (den * den);
}

BlockGradient phase_gradient(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  const auto n = st.phases.size();
  const LinkTerms t = link_terms(ch, st, sp);
  const CVec theta = st.reflection();
  const ChannelSet zero = ChannelSet::zeros_like(ch);
  BlockGradient g = allocate(n);
  CVec dtheta = CVec::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    dtheta[k] = cd(0.0, 1.0) * theta[k];
    accumulate(g, k, t, directional(ch, zero, theta, dtheta, st, sp), sp);
    dtheta[k] = 0.0;
  }
  return g;
}

BlockGradient position_gradient(const ScenarioRealization& real, const OptState& st, const SystemParams& sp,
                                Array array) {
  const ChannelSet ch = build_channels(real, st.tx, st.rx, st.ris);
  const LinkTerms t = link_terms(ch, st, sp);
  const CVec theta = st.reflection();
  const CVec no_dtheta = CVec::Zero(theta.size());
  const PositionSet& ps = array == Array::kTx ? st.tx : array == Array::kRx ? st.rx : st.ris;
  BlockGradient g = allocate(2 * ps.size());
  for (Axis axis : {Axis::kX, Axis::kY}) {
    const ChannelSet stacked = stacked_position_derivative(real, st.tx, st.rx, st.ris, array, axis);
    for (int m = 0; m < ps.size(); ++m) {
      const Eigen::Index k = 2 * m + (axis == Axis::kY ? 1 : 0);
      accumulate(g, k, t, directional(ch, mask_element(stacked, array, m), theta, no_dtheta, st, sp), sp);
    }
  }
  return g;
}

}  // namespace fdris
