// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fdris/ao.hpp"
#include "fdris/audit.hpp"
#include "fdris/format.hpp"
#include "fdris/harness.hpp"

using namespace fdris;

namespace {

constexpr const char* kOutDirEnv = "FDRIS_OUT_DIR";

struct Common {
  std::string config;
  std::string profile = "desk";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> variants;
  std::string out_dir;
};

void add_common(CLI::App* app, Common& c, bool variant_flag) {
  app->add_option("--config", c.config, "JSON file (scenario, or sweep specification for `sweep`)");
  app->add_option("--profile", c.profile, "base scenario profile")->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--out-dir", c.out_dir, std::string("output directory (default ") + kOutDirEnv + " or ./out)");
  if (variant_flag) app->add_option("--variant", c.variants, "variant name; repeat to select several");
}

std::string out_dir(const Common& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "out";
}

ScenarioConfig scenario(const Common& c) {
  const ScenarioConfig base = profile_config(c.profile);
  return c.config.empty() ? base : load_config(c.config, base);
}

int cmd_run(const Common& c, int max_iterations) {
  const Variant& var = variant_by_name(c.variants.empty() ? "ma_me" : c.variants.front());
  ScenarioConfig cfg = scenario(c);
  if (var.duplex == Duplex::kHalf) cfg.duplex = Duplex::kHalf;
  cfg.validate();
  const std::uint64_t seed = c.seed.value_or(1);
  const ScenarioRealization real = sample_realization(cfg, seed);
  AoOptions opts;
  if (max_iterations > 0) opts.max_iterations = max_iterations;
  const AoResult res = run_ao(cfg, real, var.mask, seed, opts);

  const std::string dir = out_dir(c);
  write_text(dir + "/trace.csv", res.trace.to_csv());
  write_text(dir + "/timing.csv", res.trace.timing_csv());
  write_text(dir + "/state.json", state_to_json(res.state).dump(2) + "\n");
  write_text(dir + "/realization.json", realization_to_json(real).dump(2) + "\n");
  write_text(dir + "/scenario.json", config_to_json(cfg).dump(2) + "\n");
  const RateReport& r = res.trace.final_report();
  std::printf("variant %s seed %llu: R_sum %s (DL %s, UL %s) after %d iterations, converged %s, feasible %s\n",
              var.name.c_str(), static_cast<unsigned long long>(seed), format_number(r.rate_sum).c_str(),
              format_number(r.rate_dl).c_str(), format_number(r.rate_ul).c_str(), res.trace.iterations(),
              res.trace.converged ? "yes" : "no", r.flags.all() ? "yes" : "no");
  std::printf("wrote %s/{trace.csv,timing.csv,state.json,realization.json,scenario.json}\n", dir.c_str());
  return 0;
}

int cmd_sweep(const Common& c, int threads, int max_iterations) {
  if (c.config.empty()) throw ConfigError("sweep needs --config <sweep.json>");
  SweepSpec spec = load_sweep(c.config, profile_config(c.profile));
  if (c.seed) spec.seed_base = *c.seed;
  if (!c.variants.empty()) spec.variants = c.variants;
  if (threads > 0) spec.threads = threads;
  if (max_iterations > 0) spec.ao.max_iterations = max_iterations;
  spec.validate();
  const ResultTable table = run_sweep(spec);
  const std::string dir = out_dir(c);
  emit_outputs(table, dir);
  int failures = 0;
  for (const ResultRow& r : table.rows) failures += !r.error.empty();
  std::printf("%zu runs (%d failed); wrote %s/{results.csv,summary.csv,sum_rate.svg}\n", table.rows.size(),
              failures, dir.c_str());
  std::fputs(aggregate_csv(aggregate(table)).c_str(), stdout);
  return 0;
}

int cmd_gradcheck(const Common& c, int probes, double tolerance) {
  const ScenarioConfig cfg = scenario(c);
  const GradientAudit a = gradient_audit(cfg, probes, c.seed.value_or(1));
  const std::string dir = out_dir(c);
  write_text(dir + "/gradcheck.csv", a.to_csv());
  std::fputs(a.to_csv().c_str(), stdout);
  const bool ok = a.worst() < tolerance;
  std::printf("%s: worst relative error %s (tolerance %s)\n", ok ? "PASS" : "FAIL", format_number(a.worst()).c_str(),
              format_number(tolerance).c_str());
  return ok ? 0 : 1;
}

int cmd_oracle(const Common& c, int instances, int combiners, int grid) {
  const ScenarioConfig cfg = scenario(c);
  const OracleAudit a = oracle_audit(cfg, instances, combiners, grid, c.seed.value_or(1));
  const std::string dir = out_dir(c);
  write_text(dir + "/oracle.csv", a.to_csv());
  std::fputs(a.to_csv().c_str(), stdout);
  return 0;
}

int cmd_plot(const Common& c, const std::string& input) {
  const ResultTable table = ResultTable::from_csv(read_text(input));
  const std::string dir = out_dir(c);
  emit_outputs(table, dir, c.variants.empty() ? nullptr : &c.variants);
  std::printf("wrote %s/{results.csv,summary.csv,sum_rate.svg}\n", dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex movable-antenna RIS optimizer"};
  app.require_subcommand(1);

  Common run_c, sweep_c, grad_c, oracle_c, plot_c;
  int run_iters = 0, sweep_iters = 0, threads = 0, probes = 20, instances = 20, combiners = 10000,
      grid = 100000;
  double grad_tol = 1e-5;
  std::string input;

  auto* run = app.add_subcommand("run", "single alternating-optimization run with trace");
  add_common(run, run_c, true);
  run->add_option("--max-iterations", run_iters, "iteration cap (default 50)");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep from a sweep specification");
  add_common(sweep, sweep_c, true);
  sweep->add_option("--threads", threads, "worker threads (default: hardware)");
  sweep->add_option("--max-iterations", sweep_iters, "iteration cap per run");

  auto* grad = app.add_subcommand("gradcheck", "analytic gradients against central differences");
  add_common(grad, grad_c, false);
  grad->add_option("--probes", probes, "random states")->check(CLI::PositiveNumber);
  grad->add_option("--tolerance", grad_tol, "maximum relative error");

  auto* oracle = app.add_subcommand("oracle", "brute-force checks of the closed-form blocks");
  add_common(oracle, oracle_c, false);
  oracle->add_option("--instances", instances, "random states")->check(CLI::PositiveNumber);
  oracle->add_option("--combiners", combiners, "random combiners per state")->check(CLI::NonNegativeNumber);
  oracle->add_option("--grid", grid, "power grid points")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "re-render summary and plot from a results CSV");
  add_common(plot, plot_c, true);
  plot->add_option("--input", input, "results.csv from a sweep")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_c, run_iters);
    if (sweep->parsed()) return cmd_sweep(sweep_c, threads, sweep_iters);
    if (grad->parsed()) return cmd_gradcheck(grad_c, probes, grad_tol);
    if (oracle->parsed()) return cmd_oracle(oracle_c, instances, combiners, grid);
    if (plot->parsed()) return cmd_plot(plot_c, input);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
