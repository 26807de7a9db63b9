// SPDX-License-Identifier: Apache-2.0
#include "fdris/ao.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "fdris/format.hpp"

namespace fdris {

VariantMask VariantMask::power_only() {
  VariantMask m;
  m.optimize_beamformer = m.optimize_combiner = m.optimize_phases = false;
  m.move_tx_antennas = m.move_rx_antennas = m.move_ris_elements = false;
  return m;
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> variants = [] {
    VariantMask ma_me;
    VariantMask fa_me = ma_me;
    fa_me.move_tx_antennas = fa_me.move_rx_antennas = false;
    VariantMask ma_fe = ma_me;
    ma_fe.move_ris_elements = false;
    VariantMask fa_fe = fa_me;
    fa_fe.move_ris_elements = false;
    return std::vector<Variant>{
        {"ma_me", ma_me, Duplex::kFull},    {"fa_me", fa_me, Duplex::kFull},
        {"ma_fe", ma_fe, Duplex::kFull},    {"fa_fe", fa_fe, Duplex::kFull},
        {"hd_ma_me", ma_me, Duplex::kHalf}, {"hd_fa_fe", fa_fe, Duplex::kHalf},
    };
  }();
  return variants;
}

std::string variant_names_joined() {
  std::string s;
  for (const Variant& v : all_variants()) s += (s.empty() ? "" : ", ") + v.name;
  return s;
}

const Variant& variant_by_name(const std::string& name) {
  for (const Variant& v : all_variants())
    if (v.name == name) return v;
  throw ConfigError("unknown variant '" + name + "'; valid variants: " + variant_names_joined());
}

std::string_view block_name(Block b) {
  static constexpr std::array<std::string_view, kNumBlocks> names = {"omega", "v", "p", "phi", "tx", "rx", "ris"};
  return names[static_cast<int>(b)];
}

// ---------------------------------------------------------------------------

std::string AoTrace::to_csv() const {
  std::string s = "iteration," + rate_report_csv_header() +
                  ",radius_phases,radius_tx,radius_rx,radius_ris,srocr_iterations";
  for (int b = 0; b < kNumBlocks; ++b) s += ",accepted_" + std::string(block_name(static_cast<Block>(b)));
  s += ",errors\n";
  for (const AoIterationRecord& r : records) {
    s += std::to_string(r.iteration) + "," + rate_report_csv_row(r.report) + ",";
    s += format_number(r.radius_phases) + "," + format_number(r.radius_tx) + "," + format_number(r.radius_rx) + "," +
         format_number(r.radius_ris) + "," + std::to_string(r.srocr_iterations);
    for (bool a : r.block_accepted) s += a ? ",1" : ",0";
    s += "," + r.errors + "\n";
  }
  return s;
}

std::string AoTrace::timing_csv() const {
  std::string s = "iteration";
  for (int b = 0; b < kNumBlocks; ++b) s += ",seconds_" + std::string(block_name(static_cast<Block>(b)));
  s += "\n";
  for (const AoIterationRecord& r : records) {
    s += std::to_string(r.iteration);
    for (double t : r.block_seconds) s += "," + format_number(t);
    s += "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------

OptState initialize(const ScenarioConfig& cfg, const ScenarioRealization& real, std::uint64_t seed) {
  cfg.validate();
  const SystemParams sp = system_params(cfg);
  const double side = cfg.region_side_m();
  const double pitch = cfg.min_separation_m();
  OptState st;
  st.tx = grid_positions(cfg.antennas_tx, side, pitch);
  st.rx = grid_positions(cfg.antennas_rx, side, pitch);
  st.ris = grid_positions(cfg.ris_elements, side, pitch);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  st.phases.resize(cfg.ris_elements);
  for (auto& x : st.phases) x = phase(rng);

  const ChannelSet ch = build_channels(real, st.tx, st.rx, st.ris);
  const CVec theta = st.reflection();
  const CRow h_dl = ch.h_d + ch.h_ris_dl.cwiseProduct(theta.transpose()) * ch.H;
  st.omega = h_dl.norm() > 0.0 ? CVec(h_dl.adjoint() / h_dl.norm()) : CVec(CVec::Unit(cfg.antennas_tx, 0));
  st.omega *= std::sqrt(sp.power_bs_max);
  const CVec a = ch.h_u + ch.G * theta.asDiagonal() * ch.g;
  st.v = a.norm() > 0.0 ? CVec(a / a.norm()) : CVec(CVec::Unit(cfg.antennas_rx, 0));
  st.p = sp.power_ul_max;
  return st;
}

namespace {

bool qos_of(const RateReport& r) { return r.flags.qos(); }

class Runner {
 public:
  Runner(const ScenarioConfig& cfg, const ScenarioRealization& real, const AoOptions& opts)
      : real_(real),
        sp_(system_params(cfg)),
        opts_(opts),
        tr_phi_(TrustRegionState::for_phases()),
        tr_tx_(TrustRegionState::for_positions(cfg.wavelength_m, cfg.region_side_m())),
        tr_rx_(tr_tx_),
        tr_ris_(tr_tx_) {}

  void set_state(OptState st) {
    st_ = std::move(st);
    ch_ = build_channels(real_, st_.tx, st_.rx, st_.ris);
    report_ = sum_rate(ch_, st_, sp_);
  }

  const OptState& state() const { return st_; }
  const RateReport& report() const { return report_; }

  // Replace the state when the true sum rate does not drop and QoS is not lost.
  // `restore_qos` additionally admits a QoS-restoring move from an infeasible point.
  bool offer(OptState cand, bool rebuild, bool restore_qos = false) {
    const ChannelSet ch = rebuild ? build_channels(real_, cand.tx, cand.rx, cand.ris) : ch_;
    const RateReport r = sum_rate(ch, cand, sp_);
    bool ok = r.rate_sum >= report_.rate_sum && (qos_of(r) || !qos_of(report_));
    if (!ok && restore_qos && !qos_of(report_) && qos_of(r)) ok = true;
    if (!ok) return false;
    st_ = std::move(cand);
    ch_ = ch;
    report_ = r;
    return true;
  }

  void iterate(const VariantMask& mask, AoIterationRecord& rec) {
    ScaOptions sca = opts_.sca;
    sca.refit_combiner = sca.refit_combiner && mask.optimize_combiner;
    const auto timed = [&](Block b, bool enabled, auto&& fn) {
      if (!enabled) return;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        rec.block_accepted[static_cast<int>(b)] = fn();
      } catch (const std::exception& e) {
        rec.errors += (rec.errors.empty() ? "" : ";") + std::string(block_name(b)) + ": " + sanitize(e.what());
      }
      rec.block_seconds[static_cast<int>(b)] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    timed(Block::kOmega, mask.optimize_beamformer, [&] {
      const OmegaUpdate up = update_omega(ch_, st_, sp_, opts_.omega);
      rec.srocr_iterations = up.srocr_iterations;
      if (up.qos_infeasible) note(rec, "omega: qos infeasible");
      if (!up.accepted) return false;
      OptState cand = st_;
      cand.omega = up.omega;
      return offer(std::move(cand), false);
    });
    timed(Block::kV, mask.optimize_combiner, [&] {
      OptState cand = st_;
      cand.v = update_v(ch_, st_, sp_).v;
      return offer(std::move(cand), false);
    });
    timed(Block::kP, mask.optimize_power, [&] {
      const PowerUpdate up = update_p(ch_, st_, sp_);
      if (!up.qos_feasible) note(rec, "p: qos infeasible");
      OptState cand = st_;
      cand.p = up.p;
      return offer(std::move(cand), false, true);
    });
    timed(Block::kPhi, mask.optimize_phases, [&] {
      OptState cand = st_;
      cand.phases = update_phi(ch_, st_, sp_, tr_phi_, sca);
      if (sca.refit_combiner) cand.v = update_v(ch_, cand, sp_).v;
      return offer(std::move(cand), false);
    });
    const auto move = [&](Array a, TrustRegionState& tr) {
      OptState cand = st_;
      PositionSet ps = update_positions(real_, st_, sp_, a, tr, sca);
      (a == Array::kTx ? cand.tx : a == Array::kRx ? cand.rx : cand.ris) = std::move(ps);
      if (sca.refit_combiner) cand.v = update_v(build_channels(real_, cand.tx, cand.rx, cand.ris), cand, sp_).v;
      return offer(std::move(cand), true);
    };
    timed(Block::kTx, mask.move_tx_antennas, [&] { return move(Array::kTx, tr_tx_); });
    timed(Block::kRx, mask.move_rx_antennas, [&] { return move(Array::kRx, tr_rx_); });
    timed(Block::kRis, mask.move_ris_elements, [&] { return move(Array::kRis, tr_ris_); });

    rec.report = report_;
    fill_radii(rec);
  }

  void fill_radii(AoIterationRecord& rec) const {
    rec.radius_phases = tr_phi_.radius;
    rec.radius_tx = tr_tx_.radius;
    rec.radius_rx = tr_rx_.radius;
    rec.radius_ris = tr_ris_.radius;
  }

 private:
  static std::string sanitize(std::string s) {
    for (char& c : s)
      if (c == ',' || c == '\n' || c == ';') c = ' ';
    return s;
  }
  static void note(AoIterationRecord& rec, const char* what) {
    rec.errors += (rec.errors.empty() ? "" : ";") + std::string(what);
  }

  const ScenarioRealization& real_;
  SystemParams sp_;
  AoOptions opts_;
  OptState st_;
  ChannelSet ch_;
  RateReport report_;
  TrustRegionState tr_phi_, tr_tx_, tr_rx_, tr_ris_;
};

}  // namespace

AoResult run_ao(const ScenarioConfig& cfg, const ScenarioRealization& real, const VariantMask& mask,
                std::uint64_t seed, const AoOptions& opts) {
  Runner runner(cfg, real, opts);
  runner.set_state(initialize(cfg, real, seed));

  AoResult out;
  AoIterationRecord init;
  init.report = runner.report();
  runner.fill_radii(init);
  out.trace.records.push_back(init);

  for (int n = 1; n <= opts.max_iterations; ++n) {
    const double previous = runner.report().rate_sum;
    AoIterationRecord rec;
    rec.iteration = n;
    runner.iterate(mask, rec);
    out.trace.records.push_back(rec);
    if (rec.report.rate_sum - previous <= opts.epsilon) {
      out.trace.converged = true;
      break;
    }
  }
  out.state = runner.state();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json cvec_json(const CVec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const cd& x : v) a.push_back({x.real(), x.imag()});
  return a;
}

CVec cvec_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string("state field '") + what + "' must be an array");
  CVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != 2) throw ValidationError(std::string("bad complex entry in ") + what);
    v[static_cast<Eigen::Index>(i)] = cd(j[i][0].get<double>(), j[i][1].get<double>());
  }
  return v;
}

nlohmann::json positions_json(const PositionSet& ps) {
  nlohmann::json c = nlohmann::json::array();
  for (int k = 0; k < ps.size(); ++k) c.push_back({ps.coords(0, k), ps.coords(1, k)});
  return {{"coords_m", c}, {"half_side_m", ps.half_side}, {"min_separation_m", ps.min_separation}};
}

PositionSet positions_from(const nlohmann::json& j, const char* what) {
  PositionSet ps;
  const auto& c = j.at("coords_m");
  ps.coords.resize(2, static_cast<Eigen::Index>(c.size()));
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!c[k].is_array() || c[k].size() != 2) throw ValidationError(std::string("bad coordinate in ") + what);
    ps.coords(0, static_cast<Eigen::Index>(k)) = c[k][0].get<double>();
    ps.coords(1, static_cast<Eigen::Index>(k)) = c[k][1].get<double>();
  }
  ps.half_side = j.at("half_side_m").get<double>();
  ps.min_separation = j.at("min_separation_m").get<double>();
  ps.validate(what);
  return ps;
}

}  // namespace

nlohmann::json state_to_json(const OptState& st) {
  return {{"version", 1},
          {"omega", cvec_json(st.omega)},
          {"v", cvec_json(st.v)},
          {"p_w", st.p},
          {"phases_rad", std::vector<double>(st.phases.data(), st.phases.data() + st.phases.size())},
          {"tx", positions_json(st.tx)},
          {"rx", positions_json(st.rx)},
          {"ris", positions_json(st.ris)}};
}

OptState state_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw ValidationError("unsupported state version");
    OptState st;
    st.omega = cvec_from(j.at("omega"), "omega");
    st.v = cvec_from(j.at("v"), "v");
    st.p = j.at("p_w").get<double>();
    const auto ph = j.at("phases_rad").get<std::vector<double>>();
    st.phases = Eigen::Map<const RVec>(ph.data(), static_cast<Eigen::Index>(ph.size()));
    st.tx = positions_from(j.at("tx"), "tx");
    st.rx = positions_from(j.at("rx"), "rx");
    st.ris = positions_from(j.at("ris"), "ris");
    if (st.omega.size() != st.tx.size()) throw ValidationError("omega length differs from the transmit array");
    if (st.v.size() != st.rx.size()) throw ValidationError("v length differs from the receive array");
    if (st.phases.size() != st.ris.size()) throw ValidationError("phase count differs from the RIS size");
    return st;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed state snapshot: ") + e.what());
  }
}

}  // namespace fdris
