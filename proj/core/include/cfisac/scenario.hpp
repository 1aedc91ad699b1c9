#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfisac/types.hpp"

namespace cfisac {

/// OFDM numerology of the joint communication-and-sensing resource block.
/// Subcarrier spacing and symbol period are derived, never stored.
struct OfdmConfig {
  double bandwidth_hz = 30.72e6;
  int subcarrier_count = 1024;
  double cp_duration_s = 2.34e-6;
  int rb_subcarriers = 12;
  int rb_symbols = 14;

  double subcarrier_spacing_hz() const { return bandwidth_hz / subcarrier_count; }
  double useful_symbol_s() const { return 1.0 / subcarrier_spacing_hz(); }
  double symbol_period_s() const { return useful_symbol_s() + cp_duration_s; }
};

struct PgaParams {
  double initial_rho = 0.5;
  double initial_step = 0.1;
  double shrink = 0.5;
  int max_iterations = 500;
  double tolerance = 1e-8;
  double rho_floor = 1e-9;
};

enum class EtaPolicy { kEqual, kChannelGain };

struct SolverParams {
  // SplitOpt
  double rzf_reg_scale = 1e-6;         // varsigma = scale * tr(H^H H) / M
  double projection_reg_scale = 1e-8;  // eps_reg = scale * tr(H H^H) / N_ue
  double split_penalty = 1e3;
  PgaParams pga;
  double gamma_db = 15.0;
  std::optional<double> fixed_psr;

  // JointOpt
  double tradeoff = 0.6;  // lambda
  double admm_penalty = 10.0;
  EtaPolicy eta_policy = EtaPolicy::kChannelGain;
  double slack_penalty_init = 10.0;
  double slack_penalty_step = 10.0;
  double slack_penalty_max = 1e3;
  double consensus_tol = 1e-3;
  int max_admm_iterations = 50;
  bool zeta_in_local_objective = true;
  bool divide_by_tx_count = true;

  // Centralized SCA
  int sca_max_rounds = 30;
  double sca_tolerance = 1e-5;
};

struct ScenarioConfig {
  int ap_count = 4;
  int antennas_per_ap = 10;
  int ue_count = 6;
  int sensing_streams = 1;
  double p_max_watts = 1.0;
  double noise_var = 0.01;  // P_max / noise = 20 dB
  std::optional<double> sensing_noise_var;
  double rcs_var = 0.5;
  double rician_k_factor = 10.0;  // linear (10 dB)
  double carrier_wavelength_m = kSpeedOfLight / 3.5e9;
  double ap_circle_radius_m = 650.0;
  double placement_radius_m = 1000.0;
  double ap_height_m = 10.0;
  double ue_height_m = 1.5;
  std::optional<double> pathloss_ref_distance_m;  // defaults to the AP circle radius
  OfdmConfig ofdm;
  std::uint64_t seed = 1;
  SolverParams solver;

  double sensing_noise() const { return sensing_noise_var.value_or(noise_var); }
  double carrier_ghz() const { return kSpeedOfLight / carrier_wavelength_m / 1e9; }
};

/// One violated invariant: which field, which rule.
struct ConfigViolation {
  std::string field;
  std::string rule;
};

std::vector<ConfigViolation> validate_config(const ScenarioConfig& config);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double planar_distance(Point2 a, Point2 b);

struct Geometry {
  std::vector<Point2> ap_positions;
  std::vector<Point2> ue_positions;
  Point2 target_position;
  double ap_height_m = 10.0;
  double ue_height_m = 1.5;
  std::vector<int> tx_set;
  std::vector<int> rx_set;
  // [ap][ue] azimuth/elevation seen from the AP.
  std::vector<std::vector<double>> ue_azimuth;
  std::vector<std::vector<double>> ue_elevation;
  // [ap] angles toward the target (AoD for Tx APs, AoA for Rx APs).
  std::vector<double> target_azimuth;
  std::vector<double> target_elevation;

  int ap_count() const { return static_cast<int>(ap_positions.size()); }
  int ue_count() const { return static_cast<int>(ue_positions.size()); }
  double ue_distance_3d(int ap, int ue) const;
  double target_distance_3d(int ap) const;
  bool is_tx(int ap) const;
};

/// Places APs on the circle (seeded rotation), UEs and target in the disk,
/// then assigns the Rx AP nearest to the target. Throws std::invalid_argument
/// on an invalid config.
Geometry build_scenario(const ScenarioConfig& config);

/// Role assignment and angle computation for caller-supplied positions.
Geometry make_geometry(const ScenarioConfig& config, std::vector<Point2> aps,
                       std::vector<Point2> ues, Point2 target);

}  // namespace cfisac
