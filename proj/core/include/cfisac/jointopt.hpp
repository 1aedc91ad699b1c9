#pragma once

#include <vector>

#include "cfisac/beamforming.hpp"
#include "cfisac/channel.hpp"
#include "cfisac/fronthaul.hpp"
#include "cfisac/kernel.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

/// coef^T x + constant, x the real embedding of a vector or matrix.
struct AffineForm {
  RVec coef;
  double constant = 0.0;

  double operator()(const RVec& x) const { return coef.dot(x) + constant; }
};

/// First-order expansion of g(w) = |h^H w|^2 at `anchor`:
///   2 Re{(h^H anchor)^* h^H w} - |h^H anchor|^2.
AffineForm linearize_g(const CVec& h, const CVec& anchor);

/// First-order expansion of f(W) = ||a^H W||^2 at `anchor`:
///   2 Re{(a^H anchor) W^H a} - ||a^H anchor||^2.
AffineForm surrogate_f(const CVec& a, const CMat& anchor);

/// psi_au = (sum_{i != u} |h_au^H w_ai|^2)^{1/2}, sensing columns included.
double compute_interference_share(const CMat& H, const CMat& W, int u);

/// eta_au for every Tx slot k and UE u.
std::vector<std::vector<double>> responsibility_weights(const ChannelSet& channels,
                                                        EtaPolicy policy, int ap_count);

/// Everything one AP needs for its subproblem at iteration t.
struct LocalInput {
  CMat H;                    // N_ue x M, rows h^H
  CVec steering;             // a_a
  double gain_var = 1.0;     // zeta_a^2
  CMat anchor;               // W_a^[t-1]
  double gamma_prev = 0.0;   // gamma^[t-1]
  std::vector<double> psi;   // psi^[t-1]
  double nu = 0.0;           // nu_a^[t-1]
  double slack_penalty = 10.0;
  std::vector<double> eta;   // eta_au
  double tradeoff = 0.6;
  double admm_penalty = 10.0;
  bool zeta_in_objective = true;
  double p_max = 1.0;
  double noise_std = 0.1;    // sigma_z
};

struct LocalResult {
  CMat W;
  double gamma = 0.0;
  std::vector<double> slack;
  std::vector<double> psi;
  SolveStatus status = SolveStatus::kInaccurate;
  int iterations = 0;
  double objective = 0.0;
};

SubproblemSpec build_local_spec(const LocalInput& in);

/// Assembles and solves the AP's QCQP, then reports its fresh psi_au.
LocalResult local_step(const LocalInput& in, const KernelParams& kp = {});

struct ApReport {
  int ap = 0;
  double gamma = 0.0;
  std::vector<double> psi;
};

struct GlobalUpdate {
  double gamma = 0.0;
  std::vector<double> psi;
};

/// gamma = (1/divisor) sum_a (gamma_a + nu_a), psi_u = sum_a psi_au, both
/// accumulated in `expected_aps` order. `nu` is indexed like `expected_aps`.
/// Throws std::invalid_argument naming the first AP without a report.
GlobalUpdate global_step(const std::vector<int>& expected_aps, const std::vector<ApReport>& reports,
                         const std::vector<double>& nu, double divisor);

struct DualUpdate {
  std::vector<double> nu;
  double slack_penalty = 0.0;
};

/// nu_a += gamma_a - gamma; xi = min(xi_max, xi + step * t).
DualUpdate dual_and_penalty_update(const std::vector<double>& nu,
                                   const std::vector<double>& gamma_a, double gamma,
                                   double slack_penalty, double step, double slack_max, int t);

/// W^[0]: column u = sqrt(P/D) h_u/||h_u||, sensing columns sqrt(P/D) a/sqrt(M).
CMat initial_beamformer(const CMat& H, const CVec& steering, int sensing_streams, double p_max);

/// lambda * min SINR + (1 - lambda) sum_a zeta_a^2 ||a_a^H W_a||^2.
double joint_objective(const LinkMetrics& metrics, const BeamformerSet& bf,
                       const std::vector<CVec>& steering, const std::vector<double>& gain_var,
                       double tradeoff);

struct AdmmTraceRow {
  int t = 0;
  double gamma = 0.0;
  double residual = 0.0;  // max_a |gamma_a - gamma|
  double min_sinr_db = 0.0;
  double sensing_snr_db = 0.0;
  double slack_penalty = 0.0;
  double objective = 0.0;
  std::vector<int> solver_iterations;
};

struct AdmmState {
  int t = 0;
  double gamma = 0.0;
  std::vector<double> gamma_a;
  std::vector<double> nu;
  std::vector<std::vector<double>> psi_au;  // [slot][u]
  std::vector<double> psi;
  double slack_penalty = 0.0;
  std::vector<CMat> W;
  std::vector<std::vector<double>> slack;  // [slot][u]
};

struct JointOptResult {
  BeamformerSet beamformers;
  LinkMetrics metrics;
  FronthaulLedger ledger;
  std::vector<AdmmTraceRow> trace;
  AdmmState state;
  int iterations = 0;
  bool converged = false;
  bool solver_inaccurate = false;  // some local solve ended "inaccurate"
  double objective = 0.0;
};

JointOptResult run_jointopt(const ScenarioConfig& config, const ChannelSet& channels,
                            const std::vector<SensingPath>& paths);

}  // namespace cfisac
