// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fdris/gradients.hpp"
#include "test_util.hpp"

using namespace fdris;
using fdris::testing::random_instance;

namespace {

struct Values {
  double gdl, gul, rdl, rul;
};

Values eval(const ScenarioRealization& real, const OptState& st, const SystemParams& sp) {
  const ChannelSet ch = build_channels(real, st.tx, st.rx, st.ris);
  const RateReport r = sum_rate(ch, st, sp);
  return {r.gamma_dl, r.gamma_ul, r.rate_dl, r.rate_ul};
}

double rel_err(double a, double b, double floor) {
  const double den = std::max({std::abs(a), std::abs(b), floor});
  return den > 0.0 ? std::abs(a - b) / den : 0.0;
}

void check_block(const BlockGradient& g, Eigen::Index k, const Values& plus, const Values& minus, double h,
                 const Values& scale) {
  const double fd_gdl = (plus.gdl - minus.gdl) / (2 * h);
  const double fd_gul = (plus.gul - minus.gul) / (2 * h);
  const double fd_rdl = (plus.rdl - minus.rdl) / (2 * h);
  const double fd_rul = (plus.rul - minus.rul) / (2 * h);
  CHECK(rel_err(g.gamma_dl[k], fd_gdl, scale.gdl) < 1e-5);
  CHECK(rel_err(g.gamma_ul[k], fd_gul, scale.gul) < 1e-5);
  CHECK(rel_err(g.rate_dl[k], fd_rdl, scale.rdl) < 1e-5);
  CHECK(rel_err(g.rate_ul[k], fd_rul, scale.rul) < 1e-5);
}

Values grad_scale(const BlockGradient& g) {
  return {g.gamma_dl.cwiseAbs().maxCoeff(), g.gamma_ul.cwiseAbs().maxCoeff(), g.rate_dl.cwiseAbs().maxCoeff(),
          g.rate_ul.cwiseAbs().maxCoeff()};
}

}  // namespace

TEST_CASE("gamma_derivative matches a finite difference of the SINR quotient") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const cd s(n(rng), n(rng)), ds(n(rng), n(rng)), i(n(rng), n(rng)), di(n(rng), n(rng));
    const double noise = std::abs(n(rng)) + 0.1;
    const auto gamma = [&](double t) { return std::norm(s + t * ds) / (std::norm(i + t * di) + noise); };
    const double h = 1e-6;
    const double fd = (gamma(h) - gamma(-h)) / (2 * h);
    CHECK(gamma_derivative(s, ds, i, di, noise) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("gamma_derivative without interference reduces to the signal term") {
  const cd s(1.5, -0.5), ds(0.2, 0.7);
  CHECK(gamma_derivative(s, ds, 0.0, 0.0, 2.0) == doctest::Approx(2.0 * std::real(std::conj(s) * ds) / 2.0));
  CHECK(gamma_derivative(s, ds, 0.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("phase gradient matches central differences") {
  for (Duplex d : {Duplex::kFull, Duplex::kHalf}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      auto in = random_instance(seed);
      in.sp.duplex = d;
      const BlockGradient g = phase_gradient(in.ch, in.st, in.sp);
      const Values scale = grad_scale(g);
      const double h = 1e-6;
      for (Eigen::Index k = 0; k < in.st.phases.size(); ++k) {
        OptState p = in.st, m = in.st;
        p.phases[k] += h;
        m.phases[k] -= h;
        check_block(g, k, eval(in.real, p, in.sp), eval(in.real, m, in.sp), h, scale);
      }
    }
  }
}

TEST_CASE("position gradients match central differences for every array") {
  for (Duplex d : {Duplex::kFull, Duplex::kHalf}) {
    for (std::uint64_t seed : {11u, 12u}) {
      auto in = random_instance(seed);
      in.sp.duplex = d;
      const double h = 1e-7 * in.real.wavelength_m;
      for (Array a : {Array::kTx, Array::kRx, Array::kRis}) {
        const BlockGradient g = position_gradient(in.real, in.st, in.sp, a);
        const Values scale = grad_scale(g);
        const auto count = (a == Array::kTx ? in.st.tx : a == Array::kRx ? in.st.rx : in.st.ris).size();
        REQUIRE(g.gamma_dl.size() == 2 * count);
        for (int m = 0; m < count; ++m) {
          for (int axis = 0; axis < 2; ++axis) {
            OptState p = in.st, q = in.st;
            auto& pp = a == Array::kTx ? p.tx : a == Array::kRx ? p.rx : p.ris;
            auto& qq = a == Array::kTx ? q.tx : a == Array::kRx ? q.rx : q.ris;
            pp.coords(axis, m) += h;
            qq.coords(axis, m) -= h;
            check_block(g, 2 * m + axis, eval(in.real, p, in.sp), eval(in.real, q, in.sp), h, scale);
          }
        }
      }
    }
  }
}

TEST_CASE("receive positions leave the downlink untouched") {
  auto in = random_instance(21);
  const BlockGradient g = position_gradient(in.real, in.st, in.sp, Array::kRx);
  CHECK(g.gamma_dl.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.rate_dl.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.rate_sum().isApprox(g.rate_ul));
}
