// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fdris/ao.hpp"
#include "test_util.hpp"

using namespace fdris;

namespace {

ScenarioConfig toy_config() {
  ScenarioConfig cfg = profile_config("desk");
  cfg.antennas_tx = 2;
  cfg.antennas_rx = 2;
  cfg.ris_elements = 4;
  for (Link l : kAllLinks) cfg.paths[static_cast<int>(l)] = 2;
  return cfg;
}

void check_monotone(const AoTrace& t) {
  for (std::size_t k = 2; k < t.records.size(); ++k)
    CHECK(t.records[k].report.rate_sum >= t.records[k - 1].report.rate_sum - 1e-6);
}

}  // namespace

TEST_CASE("initial state sits on the grid with matched beamformer and combiner") {
  const ScenarioConfig cfg = profile_config("desk");
  const ScenarioRealization real = sample_realization(cfg, 4);
  const OptState st = initialize(cfg, real, 9);
  CHECK_NOTHROW(st.tx.validate("tx"));
  CHECK_NOTHROW(st.rx.validate("rx"));
  CHECK_NOTHROW(st.ris.validate("ris"));
  CHECK(st.tx.min_separation == doctest::Approx(cfg.min_separation_m()));
  CHECK(st.omega.squaredNorm() == doctest::Approx(system_params(cfg).power_bs_max));
  CHECK(st.v.norm() == doctest::Approx(1.0));
  CHECK(st.p == doctest::Approx(system_params(cfg).power_ul_max));
  CHECK(st.phases.minCoeff() >= 0.0);
  CHECK(st.phases.maxCoeff() < 2 * M_PI);
  const OptState again = initialize(cfg, real, 9);
  CHECK(again.phases == st.phases);
  CHECK(again.omega == st.omega);
}

TEST_CASE("paper-scale transmit array packs on the grid; overfull arrays are rejected") {
  ScenarioConfig cfg = profile_config("paper");
  CHECK(grid_positions(8, cfg.region_side_m(), cfg.min_separation_m()).size() == 8);
  cfg.antennas_tx = grid_capacity(cfg.region_side_m(), cfg.min_separation_m()) + 1;
  const ScenarioRealization real = sample_realization(profile_config("paper"), 1);
  CHECK_THROWS_AS(initialize(cfg, real, 1), ConfigError);
}

TEST_CASE("power-only mask reduces to one power update") {
  const ScenarioConfig cfg = profile_config("desk");
  const ScenarioRealization real = sample_realization(cfg, 2);
  const AoResult r = run_ao(cfg, real, VariantMask::power_only(), 3);
  const OptState init = initialize(cfg, real, 3);
  const ChannelSet ch = build_channels(real, init.tx, init.rx, init.ris);
  const PowerUpdate up = update_p(ch, init, system_params(cfg));
  CHECK(r.trace.converged);
  CHECK(r.trace.iterations() <= 2);
  CHECK(r.state.p == doctest::Approx(up.p).epsilon(1e-12));
  CHECK(r.state.omega == init.omega);
  CHECK(r.state.phases == init.phases);
}

TEST_CASE("toy instance: monotone trace within the iteration cap") {
  const ScenarioConfig cfg = toy_config();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ScenarioRealization real = sample_realization(cfg, seed);
    const AoResult r = run_ao(cfg, real, VariantMask{}, seed);
    check_monotone(r.trace);
    CHECK(r.trace.iterations() <= 50);
    CHECK(r.trace.final_report().rate_sum > r.trace.records.front().report.rate_sum);
    MESSAGE("toy seed " << seed << " converged=" << r.trace.converged << " iterations=" << r.trace.iterations());
    if (r.trace.final_report().flags.all()) {
      const ChannelSet ch = build_channels(real, r.state.tx, r.state.rx, r.state.ris);
      CHECK(sum_rate(ch, r.state, system_params(cfg)).flags.all());
    }
  }
}

TEST_CASE("fixed arrays stay on their initial layout") {
  const ScenarioConfig cfg = toy_config();
  const ScenarioRealization real = sample_realization(cfg, 5);
  const OptState init = initialize(cfg, real, 5);
  const AoResult r = run_ao(cfg, real, variant_by_name("fa_fe").mask, 5);
  CHECK(r.state.tx.coords == init.tx.coords);
  CHECK(r.state.rx.coords == init.rx.coords);
  CHECK(r.state.ris.coords == init.ris.coords);
  const AoResult m = run_ao(cfg, real, variant_by_name("ma_fe").mask, 5);
  CHECK(m.state.ris.coords == init.ris.coords);
}

TEST_CASE("identical inputs give identical traces") {
  const ScenarioConfig cfg = toy_config();
  const ScenarioRealization real = sample_realization(cfg, 8);
  const AoResult a = run_ao(cfg, real, VariantMask{}, 8);
  const AoResult b = run_ao(cfg, real, VariantMask{}, 8);
  CHECK(a.trace.to_csv() == b.trace.to_csv());
  CHECK(a.trace.to_csv().find("seconds") == std::string::npos);
  CHECK(a.trace.timing_csv().find("seconds_omega") != std::string::npos);
}

TEST_CASE("half-duplex variant runs with squared thresholds") {
  ScenarioConfig cfg = toy_config();
  cfg.duplex = variant_by_name("hd_ma_me").duplex;
  const ScenarioRealization real = sample_realization(cfg, 6);
  const AoResult r = run_ao(cfg, real, variant_by_name("hd_ma_me").mask, 6);
  check_monotone(r.trace);
  const RateReport& rep = r.trace.final_report();
  CHECK(rep.rate_sum == doctest::Approx(0.5 * (std::log2(1 + rep.gamma_dl) + std::log2(1 + rep.gamma_ul))));
}

TEST_CASE("variant lookup lists valid names on error") {
  CHECK(all_variants().size() == 6);
  try {
    variant_by_name("nope");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("ma_me, fa_me, ma_fe, fa_fe, hd_ma_me, hd_fa_fe") != std::string::npos);
  }
}

TEST_CASE("state snapshot round trip") {
  const ScenarioConfig cfg = toy_config();
  const ScenarioRealization real = sample_realization(cfg, 1);
  const OptState st = initialize(cfg, real, 1);
  const OptState back = state_from_json(nlohmann::json::parse(state_to_json(st).dump()));
  CHECK(back.omega == st.omega);
  CHECK(back.v == st.v);
  CHECK(back.p == st.p);
  CHECK(back.phases == st.phases);
  CHECK(back.ris.coords == st.ris.coords);
  nlohmann::json bad = state_to_json(st);
  bad["omega"].push_back({1.0, 0.0});
  CHECK_THROWS_AS(state_from_json(bad), ValidationError);
  bad = state_to_json(st);
  bad.erase("v");
  CHECK_THROWS_AS(state_from_json(bad), ValidationError);
}

TEST_CASE("desk-scale run: monotone trace") {
  const ScenarioConfig cfg = profile_config("desk");
  const ScenarioRealization real = sample_realization(cfg, 1);
  const AoResult r = run_ao(cfg, real, VariantMask{}, 1);
  check_monotone(r.trace);
  MESSAGE("desk iterations " << r.trace.iterations() << " R " << r.trace.final_report().rate_sum << " from "
                             << r.trace.records.front().report.rate_sum);
}
