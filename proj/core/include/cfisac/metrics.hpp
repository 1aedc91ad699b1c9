#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfisac/beamforming.hpp"
#include "cfisac/channel.hpp"

namespace cfisac {

struct UePower {
  double cds = 0.0;
  double mui = 0.0;
  double s2ci = 0.0;
  double noise = 0.0;

  double sinr() const { return cds / (mui + s2ci + noise); }
};

struct LinkMetrics {
  std::vector<UePower> ue;
  std::vector<double> sinr;            // linear, per UE
  std::vector<int> rx_aps;
  std::vector<double> sensing_snr;     // linear, per Rx AP

  double min_sinr() const;
  double mean_sinr() const;
  double min_sinr_db() const { return to_db(min_sinr()); }
  /// Mean SINR in dB (arithmetic mean of the per-UE dB values).
  double mean_sinr_db() const;
  double sensing_snr_db() const;  // first Rx AP
};

/// CDS/MUI/S2CI/noise decomposition for UE u; inner sums over APs are taken
/// before squaring.
UePower comm_power(int u, const std::vector<CMat>& H, const std::vector<CMat>& W,
                   double noise_var);

double comm_sinr(int u, const std::vector<CMat>& H, const std::vector<CMat>& W, double noise_var);

/// Matched-filter sensing SNR at `rx_ap`: (M / noise) sum_t zeta^2 ||a_t^H W_t||^2.
/// `W` is indexed by ChannelSet slot; `tx_aps` maps slots to AP indices.
double sensing_snr(int rx_ap, const std::vector<int>& tx_aps, const std::vector<CMat>& W,
                   const std::vector<SensingPath>& paths, double noise_var, int antennas);

/// Full exact evaluation for a beamformer set.
LinkMetrics evaluate_link(const ChannelSet& channels, const BeamformerSet& bf,
                          const std::vector<SensingPath>& paths, double noise_var,
                          double sensing_noise_var);

struct OracleEstimate {
  std::vector<UePower> ue;
  std::vector<double> sinr;
};

/// Symbol-level Monte-Carlo: transmits K_mc CN(0,1) symbol vectors through
/// every AP's precoder and channel, adds CN(0, noise) and averages the
/// received CDS / MUI / S2CI / noise powers.
OracleEstimate mc_link_oracle(const std::vector<CMat>& H, const std::vector<CMat>& W,
                              int ue_count, double noise_var, int symbols, std::uint64_t seed);

}  // namespace cfisac
