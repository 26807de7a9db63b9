// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fdris/metrics.hpp"
#include "test_util.hpp"

using namespace fdris;
using namespace fdris::testing;

namespace {

// Direct sums, no matrix products.
double dl_oracle(const ChannelSet& ch, const OptState& st, const SystemParams& sp) {
  cd s = 0.0;
  for (Eigen::Index m = 0; m < st.omega.size(); ++m) {
    cd col = ch.h_d[m];
    for (Eigen::Index n = 0; n < st.phases.size(); ++n)
      col += ch.h_ris_dl[n] * std::polar(1.0, st.phases[n]) * ch.H(n, m);
    s += col * st.omega[m];
  }
  cd i = ch.inter_user;
  for (Eigen::Index n = 0; n < st.phases.size(); ++n) i += ch.h_ris_dl[n] * std::polar(1.0, st.phases[n]) * ch.g[n];
  return std::norm(s) / (st.p * std::norm(i) + sp.noise_dl);
}

}  // namespace

TEST_CASE("sinr_dl: reductions and expansion oracle") {
  auto in = random_instance(1, 2, 2, 2, 3);
  CHECK(sinr_dl(in.ch, in.st, in.sp) == doctest::Approx(dl_oracle(in.ch, in.st, in.sp)).epsilon(1e-12));

  auto st = in.st;
  st.omega.setZero();
  CHECK(sinr_dl(in.ch, st, in.sp) == 0.0);

  auto ch = in.ch;
  ch.h_ris_dl.setZero();
  st = in.st;
  st.p = 0.0;
  const cd s = (ch.h_d * st.omega)(0);
  CHECK(sinr_dl(ch, st, in.sp) == doctest::Approx(std::norm(s) / in.sp.noise_dl).epsilon(1e-12));
}

TEST_CASE("sinr_ul: matched filter, zero power, scale invariance, zero v") {
  auto in = random_instance(2);
  auto sp = in.sp;
  sp.eta = 0.0;
  auto st = in.st;
  const CVec a = in.ch.h_u + in.ch.G * st.reflection().asDiagonal() * in.ch.g;
  st.v = a;
  CHECK(sinr_ul(in.ch, st, sp) == doctest::Approx(st.p * a.squaredNorm() / sp.noise_ul).epsilon(1e-12));

  st.p = 0.0;
  CHECK(sinr_ul(in.ch, st, sp) == 0.0);

  st = in.st;
  const double g0 = sinr_ul(in.ch, st, in.sp);
  st.v *= cd(-3.7, 0.25);
  CHECK(std::abs(sinr_ul(in.ch, st, in.sp) - g0) <= 1e-12 * g0);

  st.v.setZero();
  CHECK_THROWS_AS(sinr_ul(in.ch, st, in.sp), ValidationError);
}

TEST_CASE("sum_rate and half-duplex") {
  auto in = random_instance(3);
  const auto r = sum_rate(in.ch, in.st, in.sp);
  CHECK(r.rate_sum == doctest::Approx(std::log2(1 + sinr_dl(in.ch, in.st, in.sp)) +
                                      std::log2(1 + sinr_ul(in.ch, in.st, in.sp)))
                          .epsilon(1e-14));
  CHECK(rate_of(1.0, Duplex::kFull) + rate_of(3.0, Duplex::kFull) == 3.0);
  CHECK(rate_of(0.0, Duplex::kFull) == 0.0);

  // HD: no interference, half the time
  auto sp0 = in.sp;
  sp0.eta = 0.0;
  auto st0 = in.st;
  const auto hd = half_duplex_rate(in.ch, in.st, in.sp);
  auto big = in.sp;
  big.eta = 1.0;
  CHECK(half_duplex_rate(in.ch, in.st, big).rate_ul == hd.rate_ul);
  st0.p = 0.0;
  const double gdl_free = sinr_dl(in.ch, st0, sp0);
  const double gul_free = sinr_ul(in.ch, in.st, sp0);
  CHECK(hd.rate_sum == doctest::Approx(0.5 * (std::log2(1 + gdl_free) + std::log2(1 + gul_free))).epsilon(1e-14));
  CHECK(hd.rate_sum <= std::log2(1 + gdl_free) + std::log2(1 + gul_free));
}

TEST_CASE("monotonicity properties") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto in = random_instance(100 + s);
    auto sp0 = in.sp;
    sp0.eta = 0.0;
    CHECK(sinr_ul(in.ch, in.st, sp0) >= sinr_ul(in.ch, in.st, in.sp));
    auto st0 = in.st;
    st0.p = 0.0;
    CHECK(sinr_dl(in.ch, st0, in.sp) >= sinr_dl(in.ch, in.st, in.sp));
  }
}

TEST_CASE("feasibility flags agree with direct evaluation") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    auto in = random_instance(1000 + t % 20);
    auto st = in.st;
    st.omega *= 2.0 * u(rng);
    st.p = 1.5 * in.sp.power_ul_max * u(rng);
    if (t % 7 == 0) st.phases[0] = 7.0;
    if (t % 11 == 0) st.ris.coords(0, 0) = st.ris.half_side * 1.5;
    if (t % 13 == 0) st.tx.coords.col(1) = st.tx.coords.col(0) + Eigen::Vector2d(0.01, 0.0);
    const auto ch = build_channels(in.real, in.st.tx, in.st.rx, in.st.ris);
    const auto r = sum_rate(ch, st, in.sp);
    CHECK(r.flags.bs_power == (st.omega.squaredNorm() <= in.sp.power_bs_max * (1 + 1e-9)));
    CHECK(r.flags.ul_power == (st.p <= in.sp.power_ul_max * (1 + 1e-9)));
    CHECK(r.flags.qos_dl == (r.gamma_dl >= in.sp.gamma_min_dl * (1 - 1e-9)));
    CHECK(r.flags.qos_ul == (r.gamma_ul >= in.sp.gamma_min_ul * (1 - 1e-9)));
    CHECK(r.flags.unit_modulus == (st.phases.maxCoeff() <= 2 * M_PI && st.phases.minCoeff() >= 0));
    CHECK(r.flags.region_ris == (st.ris.coords.cwiseAbs().maxCoeff() <= st.ris.half_side * (1 + 1e-12)));
    CHECK(r.flags.separation_tx == (st.tx.min_pairwise_distance() >= st.tx.min_separation * (1 - 1e-12)));
  }
}

TEST_CASE("csv row matches the header") {
  auto in = random_instance(5);
  const auto row = rate_report_csv_row(sum_rate(in.ch, in.st, in.sp));
  const auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  CHECK(count(row) == count(rate_report_csv_header()));
}
