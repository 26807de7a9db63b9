// SPDX-License-Identifier: Apache-2.0
#include "fdris/audit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "fdris/format.hpp"
#include "fdris/gradients.hpp"
#include "fdris/subproblems.hpp"

namespace fdris {

namespace {

CVec random_complex(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVec x(n);
  for (int i = 0; i < n; ++i) x[i] = cd(g(rng), g(rng));
  return x;
}

PositionSet layout(int count, const ScenarioConfig& cfg) {
  const double side = cfg.region_side_m();
  const double d0 = cfg.min_separation_m();
  const double pitch = grid_capacity(side, 1.25 * d0) >= count ? 1.25 * d0 : d0;
  PositionSet ps = grid_positions(count, side, pitch);
  ps.min_separation = d0;
  return ps;
}

struct Values {
  double gdl, gul, rdl, rul;
};

Values evaluate(const ScenarioRealization& real, const OptState& st, const SystemParams& sp) {
  const RateReport r = sum_rate(build_channels(real, st.tx, st.rx, st.ris), st, sp);
  return {r.gamma_dl, r.gamma_ul, r.rate_dl, r.rate_ul};
}

double block_error(const BlockGradient& g, const std::vector<Values>& plus, const std::vector<Values>& minus,
                   double h) {
  const RVec* an[4] = {&g.gamma_dl, &g.gamma_ul, &g.rate_dl, &g.rate_ul};
  double worst = 0.0;
  for (int q = 0; q < 4; ++q) {
    const double scale = an[q]->cwiseAbs().maxCoeff();
    for (std::size_t k = 0; k < plus.size(); ++k) {
      const double p[4] = {plus[k].gdl, plus[k].gul, plus[k].rdl, plus[k].rul};
      const double m[4] = {minus[k].gdl, minus[k].gul, minus[k].rdl, minus[k].rul};
      const double fd = (p[q] - m[q]) / (2.0 * h);
      const double a = (*an[q])[static_cast<Eigen::Index>(k)];
      const double den = std::max({std::abs(a), std::abs(fd), scale});
      if (den > 0.0) worst = std::max(worst, std::abs(a - fd) / den);
    }
  }
  return worst;
}

// QoS-feasible uplink power interval from the two SINRs sampled at p = 0 and
// p = P_u_max: gamma_ul is linear in p and 1 / gamma_dl is affine in p.
std::pair<double, double> power_interval(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  OptState a = st, b = st;
  a.p = 0.0;
  b.p = sp.power_ul_max;
  const RateReport r0 = sum_rate(ch, a, sp), r1 = sum_rate(ch, b, sp);
  double lo = 0.0, hi = sp.power_ul_max;
  if (sp.gamma_min_ul > 0.0) lo = r1.gamma_ul > 0.0 ? sp.gamma_min_ul / r1.gamma_ul * sp.power_ul_max : 2.0 * hi;
  if (sp.gamma_min_dl > 0.0) {
    const double inv0 = 1.0 / r0.gamma_dl, slope = (1.0 / r1.gamma_dl - inv0) / sp.power_ul_max;
    const double limit = 1.0 / sp.gamma_min_dl;
    if (inv0 > limit) hi = -1.0;
    else if (slope > 0.0) hi = std::min(hi, (limit - inv0) / slope);
  }
  return {std::max(lo, 0.0), hi};
}

}  // namespace

OptState random_state(const ScenarioConfig& cfg, std::uint64_t seed) {
  const SystemParams sp = system_params(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  OptState st;
  st.tx = layout(cfg.antennas_tx, cfg);
  st.rx = layout(cfg.antennas_rx, cfg);
  st.ris = layout(cfg.ris_elements, cfg);
  st.phases = RVec(cfg.ris_elements);
  for (int k = 0; k < cfg.ris_elements; ++k) st.phases[k] = 2.0 * M_PI * u(rng);
  st.omega = random_complex(rng, cfg.antennas_tx);
  st.omega *= std::sqrt(sp.power_bs_max) * u(rng) / st.omega.norm();
  st.v = random_complex(rng, cfg.antennas_rx).normalized();
  st.p = sp.power_ul_max * u(rng);
  return st;
}

double GradientAudit::worst() const { return std::max({phase, tx, rx, ris}); }

std::string GradientAudit::to_csv() const {
  return "block,probes,max_relative_error\nphase," + std::to_string(probes) + "," + format_number(phase) + "\ntx," +
         std::to_string(probes) + "," + format_number(tx) + "\nrx," + std::to_string(probes) + "," +
         format_number(rx) + "\nris," + std::to_string(probes) + "," + format_number(ris) + "\n";
}

GradientAudit gradient_audit(const ScenarioConfig& cfg, int probes, std::uint64_t seed) {
  GradientAudit out;
  out.probes = probes;
  const SystemParams sp = system_params(cfg);
  const double hp = 1e-6;
  const double hx = 1e-6 * cfg.wavelength_m;
  for (int n = 0; n < probes; ++n) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(n);
    const ScenarioRealization real = sample_realization(cfg, s);
    const OptState st = random_state(cfg, s ^ 0x5bd1e995ULL);
    const ChannelSet ch = build_channels(real, st.tx, st.rx, st.ris);

    std::vector<Values> plus, minus;
    for (Eigen::Index k = 0; k < st.phases.size(); ++k) {
      OptState a = st, b = st;
      a.phases[k] += hp;
      b.phases[k] -= hp;
      plus.push_back(evaluate(real, a, sp));
      minus.push_back(evaluate(real, b, sp));
    }
    out.phase = std::max(out.phase, block_error(phase_gradient(ch, st, sp), plus, minus, hp));

    for (Array which : {Array::kTx, Array::kRx, Array::kRis}) {
      plus.clear();
      minus.clear();
      const auto member = [&](OptState& x) -> PositionSet& {
        return which == Array::kTx ? x.tx : which == Array::kRx ? x.rx : x.ris;
      };
      OptState base = st;
      for (int c = 0; c < member(base).size(); ++c) {
        for (int d = 0; d < 2; ++d) {
          OptState a = st, b = st;
          member(a).coords(d, c) += hx;
          member(b).coords(d, c) -= hx;
          plus.push_back(evaluate(real, a, sp));
          minus.push_back(evaluate(real, b, sp));
        }
      }
      const double e = block_error(position_gradient(real, st, sp, which), plus, minus, hx);
      double& slot = which == Array::kTx ? out.tx : which == Array::kRx ? out.rx : out.ris;
      slot = std::max(slot, e);
    }
  }
  return out;
}

std::string OracleAudit::to_csv() const {
  return "check,instances,value\ntransform_error," + std::to_string(instances) + "," +
         format_number(transform_error) + "\ncombiner_shortfall," + std::to_string(instances) + "," +
         format_number(combiner_shortfall) + "\npower_gap," + std::to_string(instances) + "," +
         format_number(power_gap) + "\npower_rate_shortfall," + std::to_string(instances) + "," +
         format_number(power_rate_shortfall) + "\n";
}

OracleAudit oracle_audit(const ScenarioConfig& cfg, int instances, int random_combiners, int power_grid,
                         std::uint64_t seed) {
  OracleAudit out;
  out.instances = instances;
  const SystemParams sp = system_params(cfg);
  for (int n = 0; n < instances; ++n) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(n);
    const ScenarioRealization real = sample_realization(cfg, s);
    OptState st = random_state(cfg, s ^ 0x5bd1e995ULL);
    const ChannelSet ch = build_channels(real, st.tx, st.rx, st.ris);

    const RateReport rep = sum_rate(ch, st, sp);
    const FpAuxiliaries z = ldt_aux(ch, st, sp);
    const FpAuxiliaries b = qt_aux(ch, st, sp, z);
    out.transform_error = std::max(out.transform_error, std::abs(ldt_objective(ch, st, sp, z) - rep.rate_sum));
    out.transform_error =
        std::max(out.transform_error, std::abs(qt_objective(ch, st, sp, b) - ratio_sum(ch, st, sp, b)));

    const CombinerUpdate cu = update_v(ch, st, sp);
    OptState probe = st;
    probe.v = cu.v;
    const double best = sinr_ul(ch, probe, sp);
    std::mt19937_64 rng(s);
    for (int k = 0; k < random_combiners; ++k) {
      probe.v = random_complex(rng, cfg.antennas_rx).normalized();
      const double g = sinr_ul(ch, probe, sp);
      if (best > 0.0) out.combiner_shortfall = std::max(out.combiner_shortfall, (g - best) / best);
    }

    const PowerUpdate pu = update_p(ch, st, sp);
    const auto [lo, hi] = power_interval(ch, st, sp);
    if (lo > hi) continue;
    double grid_rate = -1.0, grid_p = 0.0;
    probe = st;
    for (int i = 0; i <= power_grid; ++i) {
      probe.p = i == power_grid ? hi : lo + (hi - lo) * i / power_grid;
      const double r = sum_rate(ch, probe, sp).rate_sum;
      if (r > grid_rate) {
        grid_rate = r;
        grid_p = probe.p;
      }
    }
    probe.p = pu.p;
    const double got = sum_rate(ch, probe, sp).rate_sum;
    out.power_rate_shortfall = std::max(out.power_rate_shortfall, grid_rate - got);
    out.power_gap = std::max(out.power_gap, std::abs(pu.p - grid_p) / sp.power_ul_max);
  }
  return out;
}

}  // namespace fdris
