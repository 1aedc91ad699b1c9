#pragma once

#include <vector>

#include "cfisac/beamforming.hpp"
#include "cfisac/channel.hpp"
#include "cfisac/fronthaul.hpp"
#include "cfisac/kernel.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

struct ScaRound {
  int round = 0;
  double objective = 0.0;  // lambda gamma + (1-lambda) sum zeta^2 ||a^H W||^2 - xi sum s
  double gamma = 0.0;
  double min_sinr_db = 0.0;
  double sensing_snr_db = 0.0;
  int solver_iterations = 0;
  SolveStatus status = SolveStatus::kOptimal;
};

struct CentralizedResult {
  BeamformerSet beamformers;
  double gamma = 0.0;
  LinkMetrics metrics;
  FronthaulLedger ledger;
  std::vector<ScaRound> rounds;
  bool converged = false;
  bool solver_inaccurate = false;
  bool used_slack = false;  // some round needed the slack-augmented retry
};

/// The SCA subproblem around (anchor, gamma_anchor): per-UE rows
///   ||v_u(W)||^2 - 2Re{S~_u^* S_u(W)}/g~ + |S~_u|^2 gamma/g~^2 - s_u <= 0,
/// with v_u the cross-stream leakage plus sigma and S_u the desired signal.
SubproblemSpec build_centralized_spec(const ChannelSet& channels, const std::vector<CMat>& anchor,
                                      double gamma_anchor, const std::vector<CVec>& steering,
                                      const std::vector<double>& gain_var, double tradeoff,
                                      double noise_var, double p_max, double slack_penalty);

/// Global-CSI baseline: every Tx AP uploads its channel and target steering,
/// the CS runs SCA on the joint problem and sends each W_a back.
CentralizedResult solve_centralized(const ScenarioConfig& config, const ChannelSet& channels,
                                    const std::vector<SensingPath>& paths);

}  // namespace cfisac
