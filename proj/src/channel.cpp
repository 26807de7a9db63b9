// SPDX-License-Identifier: Apache-2.0
#include "fdris/channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace fdris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kRealizationFormatVersion = 1;

// Which array each end of a link sits on. kNone marks a fixed single-antenna user.
enum class End { kNone, kTx, kRx, kRis };

struct LinkEnds {
  End tx;
  End rx;
};

constexpr LinkEnds link_ends(Link link) {
  switch (link) {
    case Link::kBR:
      return {End::kTx, End::kRis};
    case Link::kRB:
      return {End::kRis, End::kRx};
    case Link::kBd:
      return {End::kTx, End::kNone};
    case Link::kBu:
      return {End::kNone, End::kRx};
    case Link::kRd:
      return {End::kRis, End::kNone};
    case Link::kRu:
      return {End::kNone, End::kRis};
    case Link::kSI:
      return {End::kTx, End::kRx};
  }
  return {End::kNone, End::kNone};
}

cd complex_normal(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const double s = std::sqrt(variance / 2.0);
  const double re = n01(rng);
  const double im = n01(rng);
  return {s * re, s * im};
}

const PositionSet& positions_for(End end, const PositionSet& tx, const PositionSet& rx, const PositionSet& ris) {
  switch (end) {
    case End::kTx:
      return tx;
    case End::kRx:
      return rx;
    default:
      return ris;
  }
}

// FRM of one end of a link; a fixed user end is a single antenna at the origin.
CMat end_frm(End end, const RVec& el, const RVec& az, double wavelength, const PositionSet& tx,
             const PositionSet& rx, const PositionSet& ris) {
  if (end == End::kNone) return CMat::Ones(el.size(), 1);
  return frm(positions_for(end, tx, rx, ris).coords, el, az, wavelength);
}

CMat link_channel(const ScenarioRealization& real, Link link, const PositionSet& tx, const PositionSet& rx,
                  const PositionSet& ris) {
  const PathSet& ps = real.link(link);
  const LinkEnds ends = link_ends(link);
  const CMat e = end_frm(ends.tx, ps.elevation_tx, ps.azimuth_tx, real.wavelength_m, tx, rx, ris);
  const CMat f = end_frm(ends.rx, ps.elevation_rx, ps.azimuth_rx, real.wavelength_m, tx, rx, ris);
  return assemble_channel(f, ps.gain, e);
}

End array_end(Array a) {
  switch (a) {
    case Array::kTx:
      return End::kTx;
    case Array::kRx:
      return End::kRx;
    case Array::kRis:
      return End::kRis;
  }
  return End::kNone;
}

// Stacked derivative of one link for the `axis` coordinate of every element on
// array `end`: column m (tx side) or row m (rx side) holds the derivative of
// that column/row with respect to element m's own coordinate. Zero when the
// link does not touch the array.
CMat link_stacked_derivative(const ScenarioRealization& real, Link link, const PositionSet& tx, const PositionSet& rx,
                             const PositionSet& ris, End end, Axis axis) {
  const PathSet& ps = real.link(link);
  const LinkEnds ends = link_ends(link);
  const double k = kTwoPi / real.wavelength_m;
  const CMat e = end_frm(ends.tx, ps.elevation_tx, ps.azimuth_tx, real.wavelength_m, tx, rx, ris);
  const CMat f = end_frm(ends.rx, ps.elevation_rx, ps.azimuth_rx, real.wavelength_m, tx, rx, ris);
  CMat out = CMat::Zero(f.cols(), e.cols());

  const auto direction = [&](const RVec& el, const RVec& az) -> CVec {
    if (axis == Axis::kX) return (el.array().cos() * az.array().sin()).matrix().cast<cd>() * cd(0.0, k);
    return el.array().sin().matrix().cast<cd>() * cd(0.0, k);
  };

  if (ends.tx == end) {
    // dE(:, m)/dq_m = j k diag(kappa) e_m
    const CVec jk = direction(ps.elevation_tx, ps.azimuth_tx);
    out = f.adjoint() * ps.gain.asDiagonal() * (jk.asDiagonal() * e);
  } else if (ends.rx == end) {
    const CVec jk = direction(ps.elevation_rx, ps.azimuth_rx);
    out = (jk.asDiagonal() * f).adjoint() * ps.gain.asDiagonal() * e;
  }
  return out;
}

// Keeps only the part of a stacked derivative that belongs to element `index`.
CMat select_element(const CMat& stacked, Link link, End end, int index) {
  const LinkEnds ends = link_ends(link);
  CMat out = CMat::Zero(stacked.rows(), stacked.cols());
  if (ends.tx == end) {
    out.col(index) = stacked.col(index);
  } else if (ends.rx == end) {
    out.row(index) = stacked.row(index);
  }
  return out;
}

const PositionSet& array_positions(Array a, const PositionSet& tx, const PositionSet& rx, const PositionSet& ris) {
  return a == Array::kTx ? tx : a == Array::kRx ? rx : ris;
}

}  // namespace

void PathSet::validate() const {
  const auto n = gain.size();
  if (elevation_tx.size() != n || azimuth_tx.size() != n || elevation_rx.size() != n || azimuth_rx.size() != n) {
    throw ValidationError("path set arrays must all have length " + std::to_string(n));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(gain[i].real()) || !std::isfinite(gain[i].imag())) {
      throw ValidationError("path gain " + std::to_string(i) + " is not finite");
    }
  }
}

ScenarioRealization sample_realization(const ScenarioConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  ScenarioRealization real;
  real.wavelength_m = cfg.wavelength_m;
  for (Link link : kAllLinks) {
    const int paths = cfg.paths[static_cast<int>(link)];
    const double variance = path_gain_variance(cfg, link);
    PathSet ps;
    ps.elevation_tx.resize(paths);
    ps.azimuth_tx.resize(paths);
    ps.elevation_rx.resize(paths);
    ps.azimuth_rx.resize(paths);
    ps.gain.resize(paths);
    for (int l = 0; l < paths; ++l) {
      ps.elevation_tx[l] = angle(rng);
      ps.azimuth_tx[l] = angle(rng);
      ps.elevation_rx[l] = angle(rng);
      ps.azimuth_rx[l] = angle(rng);
      ps.gain[l] = complex_normal(rng, variance);
    }
    real.links[static_cast<int>(link)] = std::move(ps);
  }
  const double var_ud =
      db_to_linear(cfg.beta0_db) * std::pow(inter_user_distance(cfg), -cfg.pathloss_exponent_ud);
  real.inter_user = complex_normal(rng, var_ud);
  return real;
}

nlohmann::json realization_to_json(const ScenarioRealization& real) {
  const auto to_vec = [](const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j;
  j["format"] = "fdris.realization";
  j["version"] = kRealizationFormatVersion;
  j["wavelength_m"] = real.wavelength_m;
  nlohmann::json links = nlohmann::json::object();
  for (Link link : kAllLinks) {
    const PathSet& ps = real.link(link);
    nlohmann::json lj;
    lj["elevation_tx"] = to_vec(ps.elevation_tx);
    lj["azimuth_tx"] = to_vec(ps.azimuth_tx);
    lj["elevation_rx"] = to_vec(ps.elevation_rx);
    lj["azimuth_rx"] = to_vec(ps.azimuth_rx);
    lj["gain_re"] = to_vec(ps.gain.real());
    lj["gain_im"] = to_vec(ps.gain.imag());
    links[std::string(link_name(link))] = lj;
  }
  j["links"] = links;
  j["inter_user"] = {real.inter_user.real(), real.inter_user.imag()};
  return j;
}

ScenarioRealization realization_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "fdris.realization") {
      throw ConfigError("not an fdris.realization document");
    }
    const int version = j.at("version").get<int>();
    if (version != kRealizationFormatVersion) {
      throw ConfigError("unsupported realization format version " + std::to_string(version));
    }
    const auto to_rvec = [](const nlohmann::json& a) {
      const auto v = a.get<std::vector<double>>();
      return RVec(Eigen::Map<const RVec>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    ScenarioRealization real;
    real.wavelength_m = j.at("wavelength_m").get<double>();
    for (Link link : kAllLinks) {
      const auto& lj = j.at("links").at(std::string(link_name(link)));
      PathSet ps;
      ps.elevation_tx = to_rvec(lj.at("elevation_tx"));
      ps.azimuth_tx = to_rvec(lj.at("azimuth_tx"));
      ps.elevation_rx = to_rvec(lj.at("elevation_rx"));
      ps.azimuth_rx = to_rvec(lj.at("azimuth_rx"));
      const RVec re = to_rvec(lj.at("gain_re"));
      const RVec im = to_rvec(lj.at("gain_im"));
      if (re.size() != im.size()) throw ConfigError("gain_re/gain_im length mismatch");
      ps.gain.resize(re.size());
      for (Eigen::Index i = 0; i < re.size(); ++i) ps.gain[i] = cd(re[i], im[i]);
      ps.validate();
      real.links[static_cast<int>(link)] = std::move(ps);
    }
    const auto iu = j.at("inter_user").get<std::vector<double>>();
    if (iu.size() != 2) throw ConfigError("inter_user must be [re, im]");
    real.inter_user = cd(iu[0], iu[1]);
    return real;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed realization: ") + e.what());
  }
}

double PositionSet::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < size(); ++a) {
    for (int b = a + 1; b < size(); ++b) best = std::min(best, (coords.col(a) - coords.col(b)).norm());
  }
  return best;
}

bool PositionSet::in_region() const {
  return coords.size() == 0 || coords.cwiseAbs().maxCoeff() <= half_side * (1.0 + 1e-12);
}

bool PositionSet::separated() const {
  return size() < 2 || min_pairwise_distance() >= min_separation * (1.0 - 1e-12);
}

void PositionSet::validate(const char* what) const {
  for (int k = 0; k < size(); ++k) {
    if (!coords.col(k).allFinite()) {
      throw ValidationError(std::string(what) + ": position " + std::to_string(k) + " is not finite");
    }
    if (coords.col(k).cwiseAbs().maxCoeff() > half_side * (1.0 + 1e-12)) {
      throw ValidationError(std::string(what) + ": position " + std::to_string(k) +
                            " lies outside the movement region (half side " + std::to_string(half_side) + " m)");
    }
  }
  for (int a = 0; a < size(); ++a) {
    for (int b = a + 1; b < size(); ++b) {
      const double d = (coords.col(a) - coords.col(b)).norm();
      if (d < min_separation * (1.0 - 1e-12)) {
        throw ValidationError(std::string(what) + ": positions " + std::to_string(a) + " and " +
                              std::to_string(b) + " are " + std::to_string(d) +
                              " m apart, below the minimum separation " + std::to_string(min_separation) + " m");
      }
    }
  }
}

PositionSet grid_positions(int count, double region_side, double pitch) {
  const int capacity = grid_capacity(region_side, pitch);
  if (count > capacity) {
    throw ConfigError("cannot place " + std::to_string(count) + " elements: region grid capacity is " +
                      std::to_string(capacity));
  }
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  const int rows = (count + cols - 1) / cols;
  PositionSet ps;
  ps.half_side = region_side / 2.0;
  ps.min_separation = pitch;
  ps.coords.resize(2, count);
  for (int k = 0; k < count; ++k) {
    const int r = k / cols;
    const int c = k % cols;
    ps.coords(0, k) = (c - 0.5 * (cols - 1)) * pitch;
    ps.coords(1, k) = (r - 0.5 * (rows - 1)) * pitch;
  }
  return ps;
}

ChannelSet ChannelSet::zeros_like(const ChannelSet& o) {
  ChannelSet z;
  z.H = CMat::Zero(o.H.rows(), o.H.cols());
  z.G = CMat::Zero(o.G.rows(), o.G.cols());
  z.h_d = CRow::Zero(o.h_d.size());
  z.h_u = CVec::Zero(o.h_u.size());
  z.h_ris_dl = CRow::Zero(o.h_ris_dl.size());
  z.g = CVec::Zero(o.g.size());
  z.f_si = CMat::Zero(o.f_si.rows(), o.f_si.cols());
  z.inter_user = cd(0.0, 0.0);
  return z;
}

CVec frv(const Eigen::Vector2d& p, const RVec& elevation, const RVec& azimuth, double wavelength) {
  const double k = kTwoPi / wavelength;
  CVec out(elevation.size());
  for (Eigen::Index l = 0; l < elevation.size(); ++l) {
    const double rho = p.x() * std::cos(elevation[l]) * std::sin(azimuth[l]) + p.y() * std::sin(elevation[l]);
    out[l] = std::polar(1.0, k * rho);
  }
  return out;
}

CMat frm(const Eigen::Matrix2Xd& positions, const RVec& elevation, const RVec& azimuth, double wavelength) {
  CMat out(elevation.size(), positions.cols());
  for (Eigen::Index m = 0; m < positions.cols(); ++m) out.col(m) = frv(positions.col(m), elevation, azimuth, wavelength);
  return out;
}

CMat assemble_channel(const CMat& recv_frm, const CVec& gain, const CMat& tx_frm) {
  if (recv_frm.rows() != gain.size() || tx_frm.rows() != gain.size()) {
    throw ConfigError("assemble_channel: path counts disagree (recv " + std::to_string(recv_frm.rows()) +
                      ", gains " + std::to_string(gain.size()) + ", tx " + std::to_string(tx_frm.rows()) + ")");
  }
  return recv_frm.adjoint() * gain.asDiagonal() * tx_frm;
}

ChannelSet build_channels(const ScenarioRealization& real, const PositionSet& tx, const PositionSet& rx,
                          const PositionSet& ris) {
  tx.validate("transmit antennas");
  rx.validate("receive antennas");
  ris.validate("RIS elements");
  ChannelSet ch;
  ch.H = link_channel(real, Link::kBR, tx, rx, ris);
  ch.G = link_channel(real, Link::kRB, tx, rx, ris);
  ch.h_d = link_channel(real, Link::kBd, tx, rx, ris);
  ch.h_u = link_channel(real, Link::kBu, tx, rx, ris);
  ch.h_ris_dl = link_channel(real, Link::kRd, tx, rx, ris);
  ch.g = link_channel(real, Link::kRu, tx, rx, ris);
  ch.f_si = link_channel(real, Link::kSI, tx, rx, ris);
  ch.inter_user = real.inter_user;
  return ch;
}

ChannelSet stacked_position_derivative(const ScenarioRealization& real, const PositionSet& tx,
                                      const PositionSet& rx, const PositionSet& ris, Array array, Axis axis) {
  const End end = array_end(array);
  const auto d = [&](Link link) { return link_stacked_derivative(real, link, tx, rx, ris, end, axis); };
  ChannelSet out;
  out.H = d(Link::kBR);
  out.G = d(Link::kRB);
  out.h_d = d(Link::kBd);
  out.h_u = d(Link::kBu);
  out.h_ris_dl = d(Link::kRd);
  out.g = d(Link::kRu);
  out.f_si = d(Link::kSI);
  out.inter_user = cd(0.0, 0.0);
  return out;
}

ChannelSet d_channel_d_position(const ScenarioRealization& real, const PositionSet& tx, const PositionSet& rx,
                                const PositionSet& ris, const CoordinateId& which) {
  const PositionSet& arr = array_positions(which.array, tx, rx, ris);
  if (which.index < 0 || which.index >= arr.size()) {
    throw std::out_of_range("coordinate index " + std::to_string(which.index) + " outside array of size " +
                            std::to_string(arr.size()));
  }
  const End end = array_end(which.array);
  const ChannelSet st = stacked_position_derivative(real, tx, rx, ris, which.array, which.axis);
  ChannelSet out;
  out.H = select_element(st.H, Link::kBR, end, which.index);
  out.G = select_element(st.G, Link::kRB, end, which.index);
  out.h_d = select_element(st.h_d, Link::kBd, end, which.index);
  out.h_u = select_element(st.h_u, Link::kBu, end, which.index);
  out.h_ris_dl = select_element(st.h_ris_dl, Link::kRd, end, which.index);
  out.g = select_element(st.g, Link::kRu, end, which.index);
  out.f_si = select_element(st.f_si, Link::kSI, end, which.index);
  out.inter_user = cd(0.0, 0.0);
  return out;
}

}  // namespace fdris
