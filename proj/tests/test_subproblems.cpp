// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fdris/subproblems.hpp"
#include "test_util.hpp"

using namespace fdris;
using fdris::testing::random_instance;
using fdris::testing::random_unit;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// An instance whose initial state satisfies both QoS constraints: matched
// beamformer and combiner at full power.
fdris::testing::Instance feasible_instance(std::uint64_t seed) {
  auto in = random_instance(seed);
  const CVec theta = in.st.reflection();
  const CRow h = in.ch.h_d + in.ch.h_ris_dl.cwiseProduct(theta.transpose()) * in.ch.H;
  in.st.omega = std::sqrt(in.sp.power_bs_max) * h.adjoint() / h.norm();
  const CVec a = in.ch.h_u + in.ch.G * theta.asDiagonal() * in.ch.g;
  in.st.v = a / a.norm();
  in.st.p = in.sp.power_ul_max;
  return in;
}

}  // namespace

TEST_CASE("log-dual transform is value-exact at zeta = gamma") {
  for (Duplex d : {Duplex::kFull, Duplex::kHalf}) {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      auto in = random_instance(seed);
      in.sp.duplex = d;
      const FpAuxiliaries aux = ldt_aux(in.ch, in.st, in.sp);
      CHECK(std::abs(ldt_objective(in.ch, in.st, in.sp, aux) - sum_rate(in.ch, in.st, in.sp).rate_sum) <= 1e-10);
    }
  }
}

TEST_CASE("quadratic transform equals the ratio sum at the closed-form beta and bounds it elsewhere") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto in = random_instance(seed);
    const FpAuxiliaries aux = qt_aux(in.ch, in.st, in.sp, ldt_aux(in.ch, in.st, in.sp));
    const double target = ratio_sum(in.ch, in.st, in.sp, aux);
    CHECK(std::abs(qt_objective(in.ch, in.st, in.sp, aux) - target) <= 1e-10);
    for (int k = 0; k < 50; ++k) {
      FpAuxiliaries other = aux;
      other.beta_dl *= cd(1.0 + 0.3 * n(rng), 0.3 * n(rng));
      other.beta_ul *= cd(1.0 + 0.3 * n(rng), 0.3 * n(rng));
      CHECK(qt_objective(in.ch, in.st, in.sp, other) <= target * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("binary128 quadratic transform agrees with the double form and resolves large SINR") {
  for (double x : {0.0, 1e-30, 2.0, 1e12, 3.7e250}) {
    const __float128 r = sqrt_quad(x);
    const __float128 err = r * r - x;
    CHECK(static_cast<double>(err < 0 ? -err : err) <= 1e-30 * std::max(x, 1.0));
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto in = random_instance(seed);
    const FpAuxiliaries aux = qt_aux(in.ch, in.st, in.sp, ldt_aux(in.ch, in.st, in.sp));
    const double d = qt_objective(in.ch, in.st, in.sp, aux);
    const double q = static_cast<double>(qt_objective_quad(in.ch, in.st, in.sp, aux));
    CHECK(std::abs(d - q) <= 1e-15 * std::max(1.0, std::abs(q)));
  }
}

TEST_CASE("lifted beamformer problem reproduces the surrogate and the QoS margins at rank one") {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto in = random_instance(seed);
    const FpAuxiliaries aux = qt_aux(in.ch, in.st, in.sp, ldt_aux(in.ch, in.st, in.sp));
    const SdrProblem prob = build_sdr(in.ch, in.st, in.sp, aux);
    REQUIRE_FALSE(prob.qos_impossible);
    for (int trial = 0; trial < 5; ++trial) {
      OptState st = in.st;
      if (trial > 0) st.omega = std::sqrt(in.sp.power_bs_max) * random_unit(rng, 4);
      const double logs = std::log2(1.0 + aux.zeta_dl) - aux.zeta_dl + std::log2(1.0 + aux.zeta_ul) - aux.zeta_ul;
      const double surrogate = logs + qt_objective(in.ch, st, in.sp, aux);
      // the terms of both sides are of order 1 + zeta
      CHECK(std::abs(sdr_value(prob, st.omega) - surrogate) <= 1e-12 * (2.0 + aux.zeta_dl + aux.zeta_ul));

      CVec w(5);
      w << st.omega, 1.0;
      const CMat W = w * w.adjoint();
      const RateReport r = sum_rate(in.ch, st, in.sp);
      // constraint order: DL QoS, UL QoS, power, last entry
      REQUIRE(prob.sdp.constraints.size() == 4);
      const auto lhs = [&](int k) { return (prob.sdp.constraints[k].C * W).trace().real(); };
      CHECK((lhs(0) >= prob.sdp.constraints[0].b) == (r.gamma_dl >= in.sp.gamma_min_dl));
      CHECK((lhs(1) >= prob.sdp.constraints[1].b) == (r.gamma_ul >= in.sp.gamma_min_ul));
      CHECK(lhs(2) == doctest::Approx(st.omega.squaredNorm() + 1.0));
      CHECK(lhs(3) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("half duplex drops the uplink QoS row when it cannot bind") {
  auto in = feasible_instance(4);
  in.sp.duplex = Duplex::kHalf;
  const FpAuxiliaries aux = qt_aux(in.ch, in.st, in.sp, ldt_aux(in.ch, in.st, in.sp));
  const SdrProblem prob = build_sdr(in.ch, in.st, in.sp, aux);
  CHECK_FALSE(prob.qos_impossible);
  CHECK(prob.sdp.constraints.size() == 3);
}

TEST_CASE("rank-one recovery reaches the eigen-ratio target and stays near the relaxed bound") {
  int converged = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto in = feasible_instance(seed);
    const FpAuxiliaries aux = qt_aux(in.ch, in.st, in.sp, ldt_aux(in.ch, in.st, in.sp));
    const SdrProblem prob = build_sdr(in.ch, in.st, in.sp, aux);
    const SrocrResult r = run_srocr(prob);
    REQUIRE(r.relaxed_status == SdpStatus::kOptimal);
    converged += r.converged;
    CHECK(r.rank_ratio >= 0.999);
    const CVec omega = recover_beamformer(r.W, in.sp.power_bs_max);
    CHECK(omega.squaredNorm() <= in.sp.power_bs_max * (1.0 + 1e-12));
    const double value = sdr_value(prob, omega);
    CHECK(value <= r.relaxed_bound + 1e-6 * std::abs(r.relaxed_bound));
    CHECK((r.relaxed_bound - value) / std::abs(r.relaxed_bound) <= 0.05);
  }
  CHECK(converged == 10);
}

TEST_CASE("recover_beamformer scales by the last entry and clips power") {
  CVec w(3);
  w << cd(1.0, 1.0), cd(0.5, 0.0), cd(0.0, 2.0);
  const CMat W = w * w.adjoint();
  const CVec omega = recover_beamformer(W, 100.0);
  CHECK((omega - w.head(2) / w[2]).norm() < 1e-12);
  const CVec clipped = recover_beamformer(W, 0.1);
  CHECK(clipped.squaredNorm() == doctest::Approx(0.1));
}

TEST_CASE("beamformer block never lowers the sum rate") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto in = feasible_instance(seed);
    const double before = sum_rate(in.ch, in.st, in.sp).rate_sum;
    const OmegaUpdate up = update_omega(in.ch, in.st, in.sp);
    OptState next = in.st;
    next.omega = up.omega;
    const RateReport r = sum_rate(in.ch, next, in.sp);
    CHECK(r.rate_sum >= before);
    CHECK(up.omega.squaredNorm() <= in.sp.power_bs_max * (1.0 + 1e-12));
    CHECK(r.flags.qos());
  }
}

TEST_CASE("combiner attains the closed-form uplink SINR maximum") {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto in = random_instance(seed);
    const CombinerUpdate up = update_v(in.ch, in.st, in.sp);
    OptState st = in.st;
    st.v = up.v;
    const double best = sinr_ul(in.ch, st, in.sp);
    // p a^H (sigma^2 I + eta b b^H)^{-1} a
    const CVec theta = in.st.reflection();
    const CVec a = in.ch.h_u + in.ch.G * theta.asDiagonal() * in.ch.g;
    const CVec b = (in.ch.f_si + in.ch.G * theta.asDiagonal() * in.ch.H) * in.st.omega;
    const CMat S = in.sp.noise_ul * CMat::Identity(2, 2) + in.sp.eta * b * b.adjoint();
    const double closed = in.st.p * (a.adjoint() * S.inverse() * a)(0).real();
    CHECK(rel(best, closed) < 1e-9);
    for (int k = 0; k < 200; ++k) {
      st.v = random_unit(rng, 2);
      CHECK(sinr_ul(in.ch, st, in.sp) <= best * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("uplink power matches a dense grid search over the feasible interval") {
  for (Duplex d : {Duplex::kFull, Duplex::kHalf}) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      auto in = random_instance(seed);
      in.sp.duplex = d;
      // vary the thresholds so that both constraints bind on some draws
      in.sp.gamma_min_dl = (seed % 3) * 0.5;
      in.sp.gamma_min_ul = (seed % 4) * 0.5;
      const PowerUpdate up = update_p(in.ch, in.st, in.sp);
      REQUIRE(up.p >= 0.0);
      REQUIRE(up.p <= in.sp.power_ul_max);
      OptState st = in.st;
      double grid_best = -1.0;
      bool any_feasible = false;
      constexpr int kGrid = 100000;
      for (int i = 0; i <= kGrid; ++i) {
        st.p = in.sp.power_ul_max * i / kGrid;
        const RateReport r = sum_rate(in.ch, st, in.sp);
        if (!r.flags.qos()) continue;
        any_feasible = true;
        grid_best = std::max(grid_best, r.rate_sum);
      }
      st.p = up.p;
      const RateReport got = sum_rate(in.ch, st, in.sp);
      if (any_feasible) {
        CHECK(up.qos_feasible);
        CHECK(got.rate_sum >= grid_best - 1e-9);
        CHECK(got.gamma_dl >= in.sp.gamma_min_dl * (1.0 - 1e-8));
        CHECK(got.gamma_ul >= in.sp.gamma_min_ul * (1.0 - 1e-8));
      }
    }
  }
}

TEST_CASE("uplink power falls back to the least QoS violation") {
  auto in = random_instance(2);
  in.sp.gamma_min_dl = 1e9;
  in.sp.gamma_min_ul = 1e12;
  const PowerUpdate up = update_p(in.ch, in.st, in.sp);
  CHECK_FALSE(up.qos_feasible);
  CHECK(up.p >= 0.0);
  CHECK(up.p <= in.sp.power_ul_max);
}

TEST_CASE("phase SCA is monotone, keeps QoS and wraps the phases") {
  for (bool refit : {false, true}) {
    for (Duplex d : {Duplex::kFull, Duplex::kHalf}) {
      for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        auto in = feasible_instance(seed);
        in.sp.duplex = d;
        const RateReport before = sum_rate(in.ch, in.st, in.sp);
        TrustRegionState tr = TrustRegionState::for_phases();
        ScaOptions opts;
        opts.refit_combiner = refit;
        ScaReport rep;
        const RVec phases = update_phi(in.ch, in.st, in.sp, tr, opts, &rep);
        OptState st = in.st;
        st.phases = phases;
        if (refit) st.v = update_v(in.ch, st, in.sp).v;
        const RateReport after = sum_rate(in.ch, st, in.sp);
        CHECK(after.rate_sum >= before.rate_sum);
        if (before.flags.qos()) CHECK(after.flags.qos());
        CHECK(phases.minCoeff() >= 0.0);
        CHECK(phases.maxCoeff() < 2.0 * M_PI);
        CHECK(rep.iterations <= 10);
        CHECK(tr.radius >= tr.min_radius);
        CHECK(tr.radius <= tr.max_radius);
      }
    }
  }
}

TEST_CASE("position SCA is monotone and keeps every geometric constraint") {
  for (bool refit : {false, true}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto in = feasible_instance(seed);
      ScaOptions opts;
      opts.refit_combiner = refit;
      for (Array a : {Array::kTx, Array::kRx, Array::kRis}) {
        const RateReport before = sum_rate(in.ch, in.st, in.sp);
        TrustRegionState tr = TrustRegionState::for_positions(in.real.wavelength_m, in.cfg.region_side_m());
        ScaReport rep;
        const PositionSet ps = update_positions(in.real, in.st, in.sp, a, tr, opts, &rep);
        CHECK_NOTHROW(ps.validate("moved"));
        OptState st = in.st;
        (a == Array::kTx ? st.tx : a == Array::kRx ? st.rx : st.ris) = ps;
        const ChannelSet ch = build_channels(in.real, st.tx, st.rx, st.ris);
        if (refit) st.v = update_v(ch, st, in.sp).v;
        const RateReport after = sum_rate(ch, st, in.sp);
        if (a == Array::kRx) {
          CHECK(after.rate_ul >= before.rate_ul);
          CHECK(after.rate_dl == doctest::Approx(before.rate_dl).epsilon(1e-12));
        } else {
          CHECK(after.rate_sum >= before.rate_sum);
        }
        if (before.flags.qos()) CHECK(after.flags.qos());
        in.st = st;
        in.ch = ch;
      }
    }
  }
}

TEST_CASE("trust-region factories") {
  const TrustRegionState ph = TrustRegionState::for_phases();
  CHECK(ph.radius == 0.25);
  CHECK(ph.max_radius == doctest::Approx(M_PI));
  const TrustRegionState pos = TrustRegionState::for_positions(0.1, 0.4);
  CHECK(pos.radius == doctest::Approx(0.025));
  CHECK(pos.max_radius == doctest::Approx(0.2));
  TrustRegionState t = pos;
  t.radius = 1.0;
  t.clamp();
  CHECK(t.radius == doctest::Approx(0.2));
}
