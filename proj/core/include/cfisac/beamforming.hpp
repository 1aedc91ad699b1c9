#pragma once

#include <vector>

#include "cfisac/types.hpp"

namespace cfisac {

/// Per-Tx-AP precoders W_a = [W_a^(c) | W_a^(s)], M x (N_ue + N_s), in
/// ChannelSet slot order.
struct BeamformerSet {
  std::vector<CMat> W;
  int ue_count = 0;

  int tx_count() const { return static_cast<int>(W.size()); }
  int stream_count() const { return W.empty() ? 0 : static_cast<int>(W.front().cols()); }
  int sensing_count() const { return stream_count() - ue_count; }
  auto comm(int k) const { return W[k].leftCols(ue_count); }
  auto sensing(int k) const { return W[k].rightCols(sensing_count()); }
  double power(int k) const { return W[k].squaredNorm(); }
};

/// alpha_a = M(a) / sum M(a'). Throws when every metric is zero.
std::vector<double> compute_weights(const std::vector<double>& metrics);

/// Default regularizers, scaled to the channel so they are unit-free.
double default_rzf_reg(const CMat& H, double scale = 1e-6);
double default_projection_reg(const CMat& H, double scale = 1e-8);

/// Regularized zero-forcing toward a local target: (H^H H + reg I)^{-1} H^H C_a.
/// Evaluated through the smaller of the two equivalent Gram systems, so
/// reg = 0 is allowed whenever that system is nonsingular.
CMat lm_rzf(const CMat& H, const CMat& target, double reg);

/// sqrt(budget) * W / ||W||_F.
CMat normalize_power(const CMat& W, double budget);

/// I - H^H (H H^H + reg I)^{-1} H. An empty H gives the identity.
CMat null_projection(const CMat& H, double reg, int antennas);

/// Unnormalized null-space conjugate beams: `streams` copies of P a.
CMat nsc_raw(const CMat& projector, const CVec& steering, int streams);

/// NS-C sensing precoder normalized to `budget`.
CMat nsc_beamformer(const CMat& projector, const CVec& steering, int streams, double budget);

/// C = sum_a H_a W_a.
CMat effective_coupling(const std::vector<CMat>& H, const std::vector<CMat>& W);

/// The ideal coupling [I_{N_ue} | 0].
CMat ideal_coupling(int ue_count, int sensing_streams);

}  // namespace cfisac
