// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>

#include "fdris/harness.hpp"

using namespace fdris;

namespace {

SweepSpec toy_sweep() {
  SweepSpec s;
  s.base = profile_config("desk");
  s.base.antennas_tx = 2;
  s.base.antennas_rx = 2;
  s.base.ris_elements = 4;
  for (Link l : kAllLinks) s.base.paths[static_cast<int>(l)] = 2;
  s.parameter = SweepParameter::kRisElements;
  s.values = {4};
  s.variants = {"ma_me"};
  s.realizations = 2;
  s.seed_base = 17;
  s.ao.max_iterations = 3;
  s.threads = 2;
  return s;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("one value, one variant, two seeds gives two rows") {
  const ResultTable t = run_sweep(toy_sweep());
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].index == 0);
  CHECK(t.rows[1].index == 1);
  CHECK(t.rows[0].seed != t.rows[1].seed);
  for (const auto& r : t.rows) {
    CHECK(r.error.empty());
    CHECK(r.r_sum > 0.0);
    CHECK(r.r_sum == doctest::Approx(r.r_dl + r.r_ul));
  }
}

TEST_CASE("sweep output is independent of thread count") {
  SweepSpec s = toy_sweep();
  s.variants = {"ma_me", "fa_fe"};
  s.values = {2, 4};
  s.threads = 1;
  const std::string a = run_sweep(s).to_csv();
  s.threads = 4;
  const std::string b = run_sweep(s).to_csv();
  CHECK(a == b);
}

TEST_CASE("seeds are shared across variants and swept values") {
  SweepSpec s = toy_sweep();
  s.realizations = 3;
  CHECK(realization_seed(s.seed_base, 2) == mix_seed(s.seed_base, 2));
  CHECK(realization_seed(s.seed_base, 0) != realization_seed(s.seed_base, 1));
  CHECK(realization_seed(s.seed_base, 0) != realization_seed(s.seed_base + 1, 0));
}

TEST_CASE("cell configuration applies the swept value and the variant duplex") {
  SweepSpec s = toy_sweep();
  s.parameter = SweepParameter::kEta;
  CHECK(cell_config(s, variant_by_name("ma_me"), 1e-6).si_eta == 1e-6);
  CHECK(cell_config(s, variant_by_name("ma_me"), 1e-6).duplex == Duplex::kFull);
  CHECK(cell_config(s, variant_by_name("hd_fa_fe"), 1e-6).duplex == Duplex::kHalf);
  s.parameter = SweepParameter::kPowerBsMax;
  CHECK(cell_config(s, variant_by_name("fa_me"), 20.0).power_bs_max_dbm == 20.0);
  s.parameter = SweepParameter::kDuplex;
  CHECK(cell_config(s, variant_by_name("ma_me"), 1.0).duplex == Duplex::kHalf);
  s.parameter = SweepParameter::kRisElements;
  CHECK(cell_config(s, variant_by_name("ma_me"), 9.0).ris_elements == 9);
}

TEST_CASE("CSV round trip preserves aggregates exactly") {
  ResultTable t;
  t.parameter = SweepParameter::kEta;
  const double vals[] = {1e-9, 3.3e-7};
  int k = 0;
  for (const char* v : {"ma_me", "fa_fe"})
    for (double x : vals)
      for (int i = 0; i < 3; ++i) {
        ResultRow r;
        r.variant = v;
        r.value = x;
        r.index = i;
        r.seed = mix_seed(5, static_cast<std::uint64_t>(i));
        r.r_dl = 1.0 / 3.0 + 0.1 * k;
        r.r_ul = std::sqrt(2.0) * (k + 1);
        r.r_sum = r.r_dl + r.r_ul;
        r.gamma_dl = 1.2345678901234567e10;
        r.gamma_ul = 0.1 + k;
        r.iterations = k;
        r.converged = k % 2;
        r.feasible = true;
        ++k;
        t.rows.push_back(r);
      }
  t.rows[4].error = "boom, with comma";
  const ResultTable back = ResultTable::from_csv(t.to_csv());
  REQUIRE(back.rows.size() == t.rows.size());
  CHECK(back.parameter == t.parameter);
  CHECK(back.to_csv() == t.to_csv());
  CHECK(aggregate_csv(aggregate(back)) == aggregate_csv(aggregate(t)));
  const auto agg = aggregate(back);
  REQUIRE(agg.size() == 4);
  CHECK(agg[1].failures == 1);
  CHECK(agg[1].count == 2);
}

TEST_CASE("aggregate mean and standard error") {
  ResultTable t;
  for (int i = 0; i < 4; ++i) {
    ResultRow r;
    r.variant = "ma_me";
    r.value = 8;
    r.index = i;
    r.r_sum = 1.0 + i;  // 1,2,3,4
    t.rows.push_back(r);
  }
  const auto a = aggregate(t);
  REQUIRE(a.size() == 1);
  CHECK(a[0].mean_sum == doctest::Approx(2.5));
  // sample sd sqrt(5/3), se = sd / 2
  CHECK(a[0].se_sum == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("malformed CSV and sweep specifications are rejected") {
  CHECK_THROWS_AS(ResultTable::from_csv("a,b\n"), ConfigError);
  CHECK_THROWS_AS(sweep_from_json(nlohmann::json::parse(R"({"parameter":"nope","values":[1],"variants":["ma_me"]})")),
                  ConfigError);
  CHECK_THROWS_AS(sweep_from_json(nlohmann::json::parse(R"({"parameter":"si_eta","values":[1],"variants":["xx"]})")),
                  ConfigError);
  CHECK_THROWS_AS(sweep_from_json(nlohmann::json::parse(R"({"parameter":"si_eta","values":[],"variants":["ma_me"]})")),
                  ConfigError);
  const SweepSpec d = sweep_from_json(
      nlohmann::json::parse(R"({"parameter":"duplex","values":["full","half"],"variants":["ma_me"],"realizations":2})"));
  CHECK(d.values == std::vector<double>{0.0, 1.0});
  CHECK(d.realizations == 2);
}

TEST_CASE("empty or unknown variant selection names the valid variants") {
  ResultTable t;
  ResultRow r;
  r.variant = "ma_me";
  t.rows.push_back(r);
  const auto dir = std::filesystem::temp_directory_path() / "fdris_harness_sel";
  const std::vector<std::string> none;
  try {
    emit_outputs(t, dir.string(), &none);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& v : all_variants()) CHECK(msg.find(v.name) != std::string::npos);
  }
  const std::vector<std::string> bad{"zz"};
  try {
    emit_outputs(t, dir.string(), &bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("fa_fe") != std::string::npos);
  }
}

TEST_CASE("plot has one series per variant") {
  ResultTable t;
  t.parameter = SweepParameter::kEta;
  for (const char* v : {"ma_me", "fa_me", "ma_fe", "fa_fe"})
    for (double x : {1e-9, 1e-8, 1e-7}) {
      ResultRow r;
      r.variant = v;
      r.value = x;
      r.r_sum = 3.0 + x * 1e8;
      t.rows.push_back(r);
    }
  const std::string svg = render_svg(aggregate(t), t.parameter, "sweep");
  CHECK(count(svg, "<g class=\"series\"") == 4);
  CHECK(count(svg, "<polyline") == 4);
  for (const char* v : {"ma_me", "fa_me", "ma_fe", "fa_fe"}) CHECK(svg.find(v) != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "fdris_harness_out";
  std::filesystem::remove_all(dir);
  emit_outputs(t, dir.string());
  CHECK(std::filesystem::exists(dir / "results.csv"));
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK(count(read_text((dir / "sum_rate.svg").string()), "<polyline") == 4);
  const std::vector<std::string> two{"ma_me", "fa_fe"};
  emit_outputs(t, dir.string(), &two);
  CHECK(count(read_text((dir / "sum_rate.svg").string()), "<polyline") == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("unwritable output path raises IoError naming the path") {
  const auto dir = std::filesystem::temp_directory_path() / "fdris_harness_blocker";
  std::filesystem::remove_all(dir);
  write_text(dir.string(), "x");  // a file where a directory is expected
  const std::string target = (dir / "sub" / "results.csv").string();
  try {
    write_text(target, "y");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(target) != std::string::npos);
  }
  CHECK_THROWS_AS(read_text((dir / "missing").string()), IoError);
  std::filesystem::remove_all(dir);
}
