#include "cfisac/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "cfisac/rng.hpp"

namespace cfisac {

double LinkMetrics::min_sinr() const {
  return sinr.empty() ? 0.0 : *std::min_element(sinr.begin(), sinr.end());
}

double LinkMetrics::mean_sinr() const {
  return sinr.empty() ? 0.0 : std::accumulate(sinr.begin(), sinr.end(), 0.0) / sinr.size();
}

double LinkMetrics::mean_sinr_db() const {
  if (sinr.empty()) return 0.0;
  double acc = 0.0;
  for (double s : sinr) acc += to_db(s);
  return acc / sinr.size();
}

double LinkMetrics::sensing_snr_db() const {
  return sensing_snr.empty() ? 0.0 : to_db(sensing_snr.front());
}

UePower comm_power(int u, const std::vector<CMat>& H, const std::vector<CMat>& W,
                   double noise_var) {
  const CMat C = effective_coupling(H, W);
  const Eigen::Index n_ue = C.rows();
  UePower p;
  p.noise = noise_var;
  for (Eigen::Index i = 0; i < C.cols(); ++i) {
    const double g = std::norm(C(u, i));
    if (i == u) {
      p.cds = g;
    } else if (i < n_ue) {
      p.mui += g;
    } else {
      p.s2ci += g;
    }
  }
  return p;
}

double comm_sinr(int u, const std::vector<CMat>& H, const std::vector<CMat>& W, double noise_var) {
  return comm_power(u, H, W, noise_var).sinr();
}

double sensing_snr(int rx_ap, const std::vector<int>& tx_aps, const std::vector<CMat>& W,
                   const std::vector<SensingPath>& paths, double noise_var, int antennas) {
  double acc = 0.0;
  for (const auto& p : paths) {
    if (p.rx_ap != rx_ap) continue;
    auto it = std::find(tx_aps.begin(), tx_aps.end(), p.tx_ap);
    if (it == tx_aps.end()) continue;
    const CMat& Wt = W[it - tx_aps.begin()];
    acc += p.gain_var * (p.tx_steering.adjoint() * Wt).squaredNorm();
  }
  return antennas / noise_var * acc;
}

LinkMetrics evaluate_link(const ChannelSet& channels, const BeamformerSet& bf,
                          const std::vector<SensingPath>& paths, double noise_var,
                          double sensing_noise_var) {
  LinkMetrics m;
  const CMat C = effective_coupling(channels.H, bf.W);
  const int n_ue = channels.ue_count();
  for (int u = 0; u < n_ue; ++u) {
    UePower p;
    p.noise = noise_var;
    for (Eigen::Index i = 0; i < C.cols(); ++i) {
      const double g = std::norm(C(u, i));
      if (i == u) {
        p.cds = g;
      } else if (i < n_ue) {
        p.mui += g;
      } else {
        p.s2ci += g;
      }
    }
    m.ue.push_back(p);
    m.sinr.push_back(p.sinr());
  }
  for (const auto& p : paths) {
    if (std::find(m.rx_aps.begin(), m.rx_aps.end(), p.rx_ap) == m.rx_aps.end()) {
      m.rx_aps.push_back(p.rx_ap);
    }
  }
  for (int rx : m.rx_aps) {
    m.sensing_snr.push_back(
        sensing_snr(rx, channels.tx_aps, bf.W, paths, sensing_noise_var, channels.antennas()));
  }
  return m;
}

OracleEstimate mc_link_oracle(const std::vector<CMat>& H, const std::vector<CMat>& W,
                              int ue_count, double noise_var, int symbols, std::uint64_t seed) {
  if (symbols < 1000) throw std::invalid_argument("Monte-Carlo oracle needs K_mc >= 1000");
  const Eigen::Index streams = W.front().cols();
  Substream sym(seed, "mc_symbols");
  Substream noise(seed, "mc_noise");

  // Per-AP stream-to-UE gains; propagation itself happens per symbol below.
  std::vector<CMat> gains;
  for (std::size_t a = 0; a < H.size(); ++a) gains.push_back(H[a] * W[a]);

  std::vector<UePower> acc(ue_count);
  CVec s(streams);
  CVec y_cds(ue_count), y_mui(ue_count), y_s2ci(ue_count);
  for (int k = 0; k < symbols; ++k) {
    for (Eigen::Index i = 0; i < streams; ++i) s(i) = sym.complex_normal();
    y_cds.setZero();
    y_mui.setZero();
    y_s2ci.setZero();
    // Each AP radiates x_a = W_a s; each component is propagated separately
    // so the received powers can be split by origin.
    for (const CMat& G : gains) {
      for (int u = 0; u < ue_count; ++u) {
        for (Eigen::Index i = 0; i < streams; ++i) {
          const cx c = G(u, i) * s(i);
          if (i == u) {
            y_cds(u) += c;
          } else if (i < ue_count) {
            y_mui(u) += c;
          } else {
            y_s2ci(u) += c;
          }
        }
      }
    }
    for (int u = 0; u < ue_count; ++u) {
      const cx z = noise.complex_normal(noise_var);
      acc[u].cds += std::norm(y_cds(u));
      acc[u].mui += std::norm(y_mui(u));
      acc[u].s2ci += std::norm(y_s2ci(u));
      acc[u].noise += std::norm(z);
    }
  }
  OracleEstimate out;
  for (auto& p : acc) {
    p.cds /= symbols;
    p.mui /= symbols;
    p.s2ci /= symbols;
    p.noise /= symbols;
    out.sinr.push_back(p.sinr());
  }
  out.ue = std::move(acc);
  return out;
}

}  // namespace cfisac
