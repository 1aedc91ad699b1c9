#include "cfisac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cfisac/rng.hpp"

namespace cfisac {

std::vector<ConfigViolation> validate_config(const ScenarioConfig& c) {
  std::vector<ConfigViolation> out;
  auto fail = [&out](std::string field, std::string rule) {
    out.push_back({std::move(field), std::move(rule)});
  };
  if (c.ap_count < 2) fail("ap_count", "N_ap >= 2 required");
  if (c.antennas_per_ap < 1) fail("antennas_per_ap", "M >= 1 required");
  if (c.ue_count < 0) fail("ue_count", "N_ue >= 0 required");
  if (c.sensing_streams < 1) fail("sensing_streams", "N_s >= 1 required");
  if (!(c.p_max_watts > 0.0)) fail("p_max_watts", "P_max > 0 required");
  if (!(c.noise_var > 0.0)) fail("noise_var", "noise variance > 0 required");
  if (c.sensing_noise_var && !(*c.sensing_noise_var > 0.0)) {
    fail("sensing_noise_var", "sensing noise variance > 0 required");
  }
  if (!(c.rcs_var > 0.0)) fail("rcs_var", "zeta^2 > 0 required");
  if (!(c.rician_k_factor >= 0.0)) fail("rician_k_factor", "K_r >= 0 required");
  if (!(c.carrier_wavelength_m > 0.0)) fail("carrier_wavelength_m", "wavelength > 0 required");
  if (!(c.ap_circle_radius_m > 0.0)) fail("ap_circle_radius_m", "radius > 0 required");
  if (!(c.placement_radius_m > 0.0)) fail("placement_radius_m", "radius > 0 required");
  if (c.pathloss_ref_distance_m && !(*c.pathloss_ref_distance_m > 0.0)) {
    fail("pathloss_ref_distance_m", "reference distance > 0 required");
  }

  const auto& o = c.ofdm;
  if (!(o.bandwidth_hz > 0.0)) fail("ofdm.bandwidth_hz", "B > 0 required");
  if (o.subcarrier_count < 1) fail("ofdm.subcarrier_count", "N_sc >= 1 required");
  if (!(o.cp_duration_s >= 0.0)) fail("ofdm.cp_duration_s", "T_cp >= 0 required");
  if (o.rb_subcarriers < 1 || o.rb_subcarriers > o.subcarrier_count) {
    fail("ofdm.rb_subcarriers", "1 <= Q <= N_sc required");
  }
  if (o.rb_symbols < 1) fail("ofdm.rb_symbols", "K >= 1 required");

  const auto& s = c.solver;
  if (s.tradeoff < 0.0 || s.tradeoff > 1.0) fail("lambda_tradeoff", "lambda_tradeoff not in [0,1]");
  if (!(s.admm_penalty > 0.0)) fail("admm_penalty", "rho_admm > 0 required");
  if (s.rzf_reg_scale < 0.0) fail("rzf_reg_scale", "varsigma >= 0 required");
  if (s.projection_reg_scale < 0.0) fail("projection_reg_scale", "eps_reg >= 0 required");
  if (!(s.split_penalty > 0.0)) fail("split_penalty", "xi_split > 0 required");
  if (s.fixed_psr && (*s.fixed_psr < 0.0 || *s.fixed_psr > 1.0)) {
    fail("fixed_psr", "fixed PSR not in [0,1]");
  }
  if (s.slack_penalty_init < 0.0 || s.slack_penalty_step < 0.0 ||
      s.slack_penalty_max < s.slack_penalty_init) {
    fail("slack_penalty", "0 <= xi0 <= xi_max and Psi >= 0 required");
  }
  if (!(s.consensus_tol > 0.0)) fail("consensus_tol", "eps_conv > 0 required");
  if (s.max_admm_iterations < 1) fail("max_admm_iterations", "T_max >= 1 required");
  if (s.sca_max_rounds < 1) fail("sca_max_rounds", "at least one SCA round required");
  if (s.pga.max_iterations < 1 || !(s.pga.initial_step > 0.0) ||
      !(s.pga.shrink > 0.0 && s.pga.shrink < 1.0)) {
    fail("pga", "max_iterations >= 1, step > 0, 0 < shrink < 1 required");
  }
  return out;
}

double planar_distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Geometry::ue_distance_3d(int ap, int ue) const {
  const double d = planar_distance(ap_positions[ap], ue_positions[ue]);
  return std::hypot(d, ap_height_m - ue_height_m);
}

double Geometry::target_distance_3d(int ap) const {
  const double d = planar_distance(ap_positions[ap], target_position);
  return std::hypot(d, ap_height_m - ue_height_m);
}

bool Geometry::is_tx(int ap) const {
  return std::find(tx_set.begin(), tx_set.end(), ap) != tx_set.end();
}

Geometry make_geometry(const ScenarioConfig& config, std::vector<Point2> aps,
                       std::vector<Point2> ues, Point2 target) {
  if (aps.size() < 2) {
    throw std::invalid_argument("N_ap >= 2 required to split Tx and Rx APs");
  }
  Geometry g;
  g.ap_positions = std::move(aps);
  g.ue_positions = std::move(ues);
  g.target_position = target;
  g.ap_height_m = config.ap_height_m;
  g.ue_height_m = config.ue_height_m;

  const int n_ap = g.ap_count();
  int rx = 0;
  double best = planar_distance(g.ap_positions[0], target);
  for (int a = 1; a < n_ap; ++a) {
    const double d = planar_distance(g.ap_positions[a], target);
    if (d < best) {  // strict: ties keep the lowest index
      best = d;
      rx = a;
    }
  }
  g.rx_set = {rx};
  for (int a = 0; a < n_ap; ++a) {
    if (a != rx) g.tx_set.push_back(a);
  }

  const double dh = config.ue_height_m - config.ap_height_m;
  auto angles = [dh](Point2 from, Point2 to) {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    return std::pair{std::atan2(dy, dx), std::atan2(dh, std::hypot(dx, dy))};
  };
  g.ue_azimuth.assign(n_ap, std::vector<double>(g.ue_count()));
  g.ue_elevation.assign(n_ap, std::vector<double>(g.ue_count()));
  g.target_azimuth.resize(n_ap);
  g.target_elevation.resize(n_ap);
  for (int a = 0; a < n_ap; ++a) {
    for (int u = 0; u < g.ue_count(); ++u) {
      auto [az, el] = angles(g.ap_positions[a], g.ue_positions[u]);
      g.ue_azimuth[a][u] = az;
      g.ue_elevation[a][u] = el;
    }
    auto [az, el] = angles(g.ap_positions[a], target);
    g.target_azimuth[a] = az;
    g.target_elevation[a] = el;
  }
  return g;
}

namespace {

Point2 uniform_in_disk(Substream& s, double radius) {
  const double r = radius * std::sqrt(s.uniform());
  const double phi = 2.0 * kPi * s.uniform();
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace

Geometry build_scenario(const ScenarioConfig& config) {
  const auto violations = validate_config(config);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid scenario config:";
    for (const auto& v : violations) msg << " [" << v.field << ": " << v.rule << "]";
    throw std::invalid_argument(msg.str());
  }

  const int n_ap = config.ap_count;
  Substream rot(config.seed, "ap_rotation");
  const double spacing = 2.0 * kPi / n_ap;
  const double offset = spacing * rot.uniform();

  std::vector<Point2> aps(n_ap);
  for (int a = 0; a < n_ap; ++a) {
    const double phi = offset + spacing * a;
    aps[a] = {config.ap_circle_radius_m * std::cos(phi),
              config.ap_circle_radius_m * std::sin(phi)};
  }
  std::vector<Point2> ues(config.ue_count);
  for (int u = 0; u < config.ue_count; ++u) {
    Substream s(config.seed, "ue_position", static_cast<std::uint64_t>(u));
    ues[u] = uniform_in_disk(s, config.placement_radius_m);
  }
  Substream ts(config.seed, "target_position");
  const Point2 target = uniform_in_disk(ts, config.placement_radius_m);
  return make_geometry(config, std::move(aps), std::move(ues), target);
}

}  // namespace cfisac
