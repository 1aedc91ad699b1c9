#pragma once

#include <filesystem>
#include <vector>

#include "cfisac/scenario.hpp"
#include "cfisac/types.hpp"

namespace cfisac {

/// Uniform-circular-array steering vector. Element m sits at angle 2*pi*m/M on
/// a circle of radius lambda / (4 sin(pi/M)), i.e. half-wavelength spacing
/// between neighbours; M = 1 collapses to the origin.
CVec uca_steering(double azimuth, double elevation, int antennas, double wavelength);

/// Downlink channels of the transmit APs. `H[k]` belongs to AP `tx_aps[k]`;
/// its row u is h_{au}^H.
struct ChannelSet {
  std::vector<int> tx_aps;
  std::vector<CMat> H;
  std::vector<std::vector<double>> path_gain;  // [k][u], linear, normalized

  int tx_count() const { return static_cast<int>(H.size()); }
  int ue_count() const { return H.empty() ? 0 : static_cast<int>(H.front().rows()); }
  int antennas() const { return H.empty() ? 0 : static_cast<int>(H.front().cols()); }
  CVec h(int k, int u) const { return H[k].row(u).adjoint(); }
  int slot_of(int ap) const;  // index k of a Tx AP, -1 if not a Tx AP
};

/// One bistatic Tx-AP -> target -> Rx-AP path (Swerling-I: one gain per RB).
struct SensingPath {
  int tx_ap = 0;
  int rx_ap = 0;
  double gain_var = 0.0;  // zeta^2
  cx gain;                // beta ~ CN(0, zeta^2)
  double delay_s = 0.0;
  double doppler_hz = 0.0;
  CVec tx_steering;
  CVec rx_steering;

  double gain_std() const { return std::sqrt(gain_var); }
  /// Unit-modulus delay/Doppler phase on subcarrier q, symbol k. Carried for
  /// completeness; SNR evaluation does not need it.
  cx phase(int q, int k, const OfdmConfig& ofdm) const;
};

/// UMi LoS path loss in linear scale, normalized to 1 at `ref_distance_m`.
double pathloss_linear(double distance_m, double carrier_ghz, double ref_distance_m);

ChannelSet gen_comm_channels(const Geometry& geometry, const ScenarioConfig& config);

std::vector<SensingPath> sensing_paths(const Geometry& geometry, const ScenarioConfig& config);

/// Inverse 2-norm condition number sigma_min / sigma_max; 0 when rank deficient.
double channel_metric(const CMat& H);

/// Steering vector from each Tx AP toward the target, in ChannelSet slot order.
std::vector<CVec> target_steering(const ChannelSet& channels,
                                  const std::vector<SensingPath>& paths);

/// Per-Tx-AP zeta^2 toward the (first) Rx AP, in ChannelSet slot order.
std::vector<double> target_gain_var(const ChannelSet& channels,
                                    const std::vector<SensingPath>& paths);

// CSV dump: header `ap,ue,antenna,re,im`, one row per entry of h_{au}.
void write_channels_csv(const ChannelSet& channels, const std::filesystem::path& path);
ChannelSet read_channels_csv(const std::filesystem::path& path);

}  // namespace cfisac
