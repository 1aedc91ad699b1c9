#include "cfisac/channel.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "cfisac/rng.hpp"

namespace cfisac {

CVec uca_steering(double azimuth, double elevation, int antennas, double wavelength) {
  if (antennas < 1) throw std::invalid_argument("steering vector needs M >= 1");
  CVec a(antennas);
  if (antennas == 1) {
    a(0) = 1.0;
    return a;
  }
  const double radius = wavelength / (4.0 * std::sin(kPi / antennas));
  const double k = 2.0 * kPi * radius / wavelength * std::cos(elevation);
  for (int m = 0; m < antennas; ++m) {
    const double phase = k * std::cos(azimuth - 2.0 * kPi * m / antennas);
    a(m) = std::polar(1.0, phase);
  }
  return a;
}

int ChannelSet::slot_of(int ap) const {
  auto it = std::find(tx_aps.begin(), tx_aps.end(), ap);
  return it == tx_aps.end() ? -1 : static_cast<int>(it - tx_aps.begin());
}

cx SensingPath::phase(int q, int k, const OfdmConfig& ofdm) const {
  const double f_sc = ofdm.subcarrier_spacing_hz();
  return std::polar(1.0, -2.0 * kPi * delay_s * q * f_sc) *
         std::polar(1.0, 2.0 * kPi * doppler_hz * k * ofdm.symbol_period_s());
}

double pathloss_linear(double distance_m, double carrier_ghz, double ref_distance_m) {
  auto db = [carrier_ghz](double d) {
    return -(32.4 + 21.0 * std::log10(d) + 20.0 * std::log10(carrier_ghz));
  };
  return from_db(db(distance_m) - db(ref_distance_m));
}

ChannelSet gen_comm_channels(const Geometry& g, const ScenarioConfig& config) {
  const int M = config.antennas_per_ap;
  const double K = config.rician_k_factor;
  const double los = std::sqrt(K / (K + 1.0));
  const double nlos = std::sqrt(1.0 / (K + 1.0));
  const double ref = config.pathloss_ref_distance_m.value_or(config.ap_circle_radius_m);
  const double fc = config.carrier_ghz();

  ChannelSet ch;
  ch.tx_aps = g.tx_set;
  for (int ap : g.tx_set) {
    CMat H(g.ue_count(), M);
    std::vector<double> gains(g.ue_count());
    for (int u = 0; u < g.ue_count(); ++u) {
      const double d = g.ue_distance_3d(ap, u);
      if (!(d > 0.0)) {
        throw NumericalError("UE " + std::to_string(u) + " coincides with AP " +
                             std::to_string(ap) + ": path loss undefined");
      }
      const double pl = pathloss_linear(d, fc, ref);
      gains[u] = pl;
      const CVec a = uca_steering(g.ue_azimuth[ap][u], g.ue_elevation[ap][u], M,
                                  config.carrier_wavelength_m);
      Substream s(config.seed, "comm_channel", static_cast<std::uint64_t>(ap),
                  static_cast<std::uint64_t>(u));
      CVec h(M);
      for (int m = 0; m < M; ++m) h(m) = los * a(m) + nlos * s.complex_normal();
      h *= std::sqrt(pl);
      H.row(u) = h.adjoint();
    }
    ch.H.push_back(std::move(H));
    ch.path_gain.push_back(std::move(gains));
  }
  return ch;
}

std::vector<SensingPath> sensing_paths(const Geometry& g, const ScenarioConfig& config) {
  const int M = config.antennas_per_ap;
  std::vector<SensingPath> paths;
  for (int rx : g.rx_set) {
    for (int tx : g.tx_set) {
      SensingPath p;
      p.tx_ap = tx;
      p.rx_ap = rx;
      p.gain_var = config.rcs_var;
      Substream s(config.seed, "target_gain", static_cast<std::uint64_t>(tx),
                  static_cast<std::uint64_t>(rx));
      p.gain = s.complex_normal(p.gain_var);
      p.delay_s = (g.target_distance_3d(tx) + g.target_distance_3d(rx)) / kSpeedOfLight;
      p.doppler_hz = 0.0;  // static target
      p.tx_steering = uca_steering(g.target_azimuth[tx], g.target_elevation[tx], M,
                                   config.carrier_wavelength_m);
      p.rx_steering = uca_steering(g.target_azimuth[rx], g.target_elevation[rx], M,
                                   config.carrier_wavelength_m);
      paths.push_back(std::move(p));
    }
  }
  return paths;
}

double channel_metric(const CMat& H) {
  if (H.size() == 0 || H.cwiseAbs().maxCoeff() == 0.0) {
    throw NumericalError("channel metric of an all-zero matrix is undefined");
  }
  // Squared singular values are the eigenvalues of the smaller Gram matrix.
  const CMat gram = H.rows() <= H.cols() ? CMat(H * H.adjoint()) : CMat(H.adjoint() * H);
  Eigen::SelfAdjointEigenSolver<CMat> eig(gram, Eigen::EigenvaluesOnly);
  const RVec& ev = eig.eigenvalues();  // ascending
  const double lmax = ev(ev.size() - 1);
  const double lmin = std::max(ev(0), 0.0);
  const double ratio = std::sqrt(lmin / lmax);
  // Gram eigenvalues carry absolute error ~eps * lmax, so ratios below
  // ~sqrt(eps) are indistinguishable from a rank drop.
  const double floor = 10.0 * std::sqrt(std::numeric_limits<double>::epsilon());
  return ratio < floor ? 0.0 : std::min(ratio, 1.0);
}

std::vector<CVec> target_steering(const ChannelSet& channels,
                                  const std::vector<SensingPath>& paths) {
  std::vector<CVec> out(channels.tx_count());
  for (const auto& p : paths) {
    const int k = channels.slot_of(p.tx_ap);
    if (k >= 0 && out[k].size() == 0) out[k] = p.tx_steering;
  }
  for (int k = 0; k < channels.tx_count(); ++k) {
    if (out[k].size() == 0) {
      throw std::invalid_argument("no sensing path for Tx AP " +
                                  std::to_string(channels.tx_aps[k]));
    }
  }
  return out;
}

std::vector<double> target_gain_var(const ChannelSet& channels,
                                    const std::vector<SensingPath>& paths) {
  std::vector<double> out(channels.tx_count(), -1.0);
  for (const auto& p : paths) {
    const int k = channels.slot_of(p.tx_ap);
    if (k >= 0 && out[k] < 0.0) out[k] = p.gain_var;
  }
  for (double v : out) {
    if (v < 0.0) throw std::invalid_argument("missing sensing path for a Tx AP");
  }
  return out;
}

void write_channels_csv(const ChannelSet& channels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "ap,ue,antenna,re,im\n";
  char buf[128];
  for (int k = 0; k < channels.tx_count(); ++k) {
    for (int u = 0; u < channels.ue_count(); ++u) {
      const CVec h = channels.h(k, u);
      for (int m = 0; m < h.size(); ++m) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g\n", channels.tx_aps[k], u, m,
                      h(m).real(), h(m).imag());
        out << buf;
      }
    }
  }
}

ChannelSet read_channels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "ap,ue,antenna,re,im") throw std::runtime_error("unexpected channel CSV header");
  std::map<int, std::map<std::pair<int, int>, cx>> entries;
  int max_ue = -1;
  int max_m = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int ap, ue, m;
    double re, im;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf", &ap, &ue, &m, &re, &im) != 5) {
      throw std::runtime_error("malformed channel CSV row: " + line);
    }
    entries[ap][{ue, m}] = {re, im};
    max_ue = std::max(max_ue, ue);
    max_m = std::max(max_m, m);
  }
  ChannelSet ch;
  for (const auto& [ap, vals] : entries) {
    if (static_cast<int>(vals.size()) != (max_ue + 1) * (max_m + 1)) {
      throw std::runtime_error("channel CSV is missing entries for AP " + std::to_string(ap));
    }
    CMat H(max_ue + 1, max_m + 1);
    std::vector<double> gains(max_ue + 1);
    for (const auto& [key, v] : vals) H(key.first, key.second) = std::conj(v);
    for (int u = 0; u <= max_ue; ++u) gains[u] = H.row(u).squaredNorm() / (max_m + 1);
    ch.tx_aps.push_back(ap);
    ch.H.push_back(std::move(H));
    ch.path_gain.push_back(std::move(gains));
  }
  return ch;
}

}  // namespace cfisac
