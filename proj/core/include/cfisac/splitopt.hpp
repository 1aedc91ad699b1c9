#pragma once

#include <vector>

#include "cfisac/beamforming.hpp"
#include "cfisac/channel.hpp"
#include "cfisac/fronthaul.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

struct UtilityReport {
  int ap = 0;
  double alpha_tilde = 0.0;  // alpha_a / ||W~_a^(c)||_F
  double delta_tilde = 0.0;  // zeta_a^2 (||a^H W^_c||^2 - ||a^H W^_s||^2)
};

/// Throws NumericalError when either raw beamformer has zero norm.
UtilityReport compute_report(const CMat& comm_raw, const CMat& sensing_raw, double alpha,
                             const CVec& steering, double gain_var, int ap = 0);

struct PowerSplit {
  std::vector<double> rho;
  double slack = 0.0;
  double gamma = 0.0;  // utility units: SINR * noise / P_max
  double penalty = 0.0;
};

struct PgaResult {
  PowerSplit split;
  std::vector<double> trace;  // objective after each accepted step, starting point first
  int iterations = 0;
  bool converged = false;
};

/// Delta~^T rho - xi * eps.
double split_objective(const std::vector<double>& delta_tilde, const std::vector<double>& rho,
                       double slack, double penalty);

/// Euclidean projection of (y, e) onto
///   { (rho, eps) : floor <= rho <= 1, eps >= 0, alpha~^T sqrt(rho) + eps >= sqrt(gamma) }.
void project_split(const std::vector<double>& alpha_tilde, double sqrt_gamma, double floor,
                   const std::vector<double>& y, double e, std::vector<double>& rho,
                   double& slack);

/// max Delta~^T rho - xi eps  s.t.  alpha~^T sqrt(rho) + eps >= sqrt(gamma),
/// 0 <= rho <= 1, eps >= 0. Projected gradient ascent in (rho, eps).
PgaResult solve_pa(const std::vector<double>& alpha_tilde, const std::vector<double>& delta_tilde,
                   double gamma, double penalty, const PgaParams& params = {});

/// SINR target (dB) to the utility-domain level used by the PSR problem.
double sinr_to_utility(double gamma_db, double noise_var, double p_max);

struct SplitOptResult {
  BeamformerSet beamformers;
  PowerSplit split;
  LinkMetrics metrics;
  FronthaulLedger ledger;
  std::vector<double> channel_metrics;  // M(a), slot order
  std::vector<double> weights;          // alpha_a, slot order
  std::vector<UtilityReport> reports;
  std::vector<double> trace;
  bool pga_converged = true;
};

/// Runs the distributed design over a fresh fronthaul bus. With
/// config.solver.fixed_psr set, the CS assigns that ratio to every AP
/// instead of solving the PSR problem.
SplitOptResult run_splitopt(const ScenarioConfig& config, const ChannelSet& channels,
                            const std::vector<SensingPath>& paths, double gamma_db);

}  // namespace cfisac
