#include "cfisac/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cfisac/rng.hpp"

namespace cfisac {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json to_ordered(const ScenarioConfig& c) {
  ordered_json j;
  j["ap_count"] = c.ap_count;
  j["antennas_per_ap"] = c.antennas_per_ap;
  j["ue_count"] = c.ue_count;
  j["sensing_streams"] = c.sensing_streams;
  j["p_max_watts"] = c.p_max_watts;
  j["noise_var"] = c.noise_var;
  j["sensing_noise_var"] = c.sensing_noise_var ? json(*c.sensing_noise_var) : json(nullptr);
  j["rcs_var"] = c.rcs_var;
  j["rician_k_factor"] = c.rician_k_factor;
  j["carrier_wavelength_m"] = c.carrier_wavelength_m;
  j["ap_circle_radius_m"] = c.ap_circle_radius_m;
  j["placement_radius_m"] = c.placement_radius_m;
  j["ap_height_m"] = c.ap_height_m;
  j["ue_height_m"] = c.ue_height_m;
  j["pathloss_ref_distance_m"] =
      c.pathloss_ref_distance_m ? json(*c.pathloss_ref_distance_m) : json(nullptr);

  ordered_json o;
  o["bandwidth_hz"] = c.ofdm.bandwidth_hz;
  o["subcarrier_count"] = c.ofdm.subcarrier_count;
  o["subcarrier_spacing_hz"] = c.ofdm.subcarrier_spacing_hz();
  o["cp_duration_s"] = c.ofdm.cp_duration_s;
  o["symbol_period_s"] = c.ofdm.symbol_period_s();
  o["rb_subcarriers"] = c.ofdm.rb_subcarriers;
  o["rb_symbols"] = c.ofdm.rb_symbols;
  j["ofdm"] = o;
  j["seed"] = c.seed;

  const auto& s = c.solver;
  ordered_json p;
  p["rzf_reg_scale"] = s.rzf_reg_scale;
  p["projection_reg_scale"] = s.projection_reg_scale;
  p["split_penalty"] = s.split_penalty;
  p["pga"] = {{"initial_rho", s.pga.initial_rho},   {"initial_step", s.pga.initial_step},
              {"shrink", s.pga.shrink},             {"max_iterations", s.pga.max_iterations},
              {"tolerance", s.pga.tolerance},       {"rho_floor", s.pga.rho_floor}};
  p["gamma_db"] = s.gamma_db;
  p["fixed_psr"] = s.fixed_psr ? json(*s.fixed_psr) : json(nullptr);
  p["lambda_tradeoff"] = s.tradeoff;
  p["admm_penalty"] = s.admm_penalty;
  p["eta_policy"] = s.eta_policy == EtaPolicy::kEqual ? "equal" : "channel_gain";
  p["slack_penalty_init"] = s.slack_penalty_init;
  p["slack_penalty_step"] = s.slack_penalty_step;
  p["slack_penalty_max"] = s.slack_penalty_max;
  p["consensus_tol"] = s.consensus_tol;
  p["max_admm_iterations"] = s.max_admm_iterations;
  p["zeta_in_local_objective"] = s.zeta_in_local_objective;
  p["divide_by_tx_count"] = s.divide_by_tx_count;
  p["sca_max_rounds"] = s.sca_max_rounds;
  p["sca_tolerance"] = s.sca_tolerance;
  j["solver_params"] = p;
  return j;
}

template <typename T>
void take(const json& j, const char* key, T& out, std::set<std::string>& seen) {
  if (auto it = j.find(key); it != j.end()) {
    seen.insert(key);
    if (!it->is_null()) out = it->get<T>();
  }
}

template <typename T>
void take_opt(const json& j, const char* key, std::optional<T>& out,
              std::set<std::string>& seen) {
  if (auto it = j.find(key); it != j.end()) {
    seen.insert(key);
    if (it->is_null()) {
      out.reset();
    } else {
      out = it->get<T>();
    }
  }
}

void take_db(const json& j, const char* key, double& out, std::set<std::string>& seen) {
  if (auto it = j.find(key); it != j.end()) {
    seen.insert(key);
    out = from_db(it->get<double>());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& seen, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!seen.count(it.key())) {
      throw std::invalid_argument("unknown config key '" + where + it.key() + "'");
    }
  }
}

void check_derived(const json& j, const char* key, double expected) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    const double v = it->get<double>();
    if (std::abs(v - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw std::invalid_argument(std::string("ofdm.") + key +
                                  " inconsistent with bandwidth/subcarrier/cp settings");
    }
  }
}

}  // namespace

std::string config_to_json(const ScenarioConfig& config, int indent) {
  return to_ordered(config).dump(indent);
}

ScenarioConfig config_from_json(std::string_view text) {
  const json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("scenario config must be a JSON object");
  ScenarioConfig c;
  std::set<std::string> seen;
  take(j, "ap_count", c.ap_count, seen);
  take(j, "antennas_per_ap", c.antennas_per_ap, seen);
  take(j, "ue_count", c.ue_count, seen);
  take(j, "sensing_streams", c.sensing_streams, seen);
  take(j, "p_max_watts", c.p_max_watts, seen);
  take_db(j, "p_max_watts_db", c.p_max_watts, seen);
  take(j, "noise_var", c.noise_var, seen);
  take_db(j, "noise_var_db", c.noise_var, seen);
  take_opt(j, "sensing_noise_var", c.sensing_noise_var, seen);
  if (auto it = j.find("sensing_noise_var_db"); it != j.end()) {
    seen.insert("sensing_noise_var_db");
    c.sensing_noise_var = from_db(it->get<double>());
  }
  take(j, "rcs_var", c.rcs_var, seen);
  take_db(j, "rcs_var_db", c.rcs_var, seen);
  take(j, "rician_k_factor", c.rician_k_factor, seen);
  take_db(j, "rician_k_factor_db", c.rician_k_factor, seen);
  take(j, "carrier_wavelength_m", c.carrier_wavelength_m, seen);
  take(j, "ap_circle_radius_m", c.ap_circle_radius_m, seen);
  take(j, "placement_radius_m", c.placement_radius_m, seen);
  take(j, "ap_height_m", c.ap_height_m, seen);
  take(j, "ue_height_m", c.ue_height_m, seen);
  take_opt(j, "pathloss_ref_distance_m", c.pathloss_ref_distance_m, seen);
  take(j, "seed", c.seed, seen);
  // Applied last so it sees the final P_max.
  if (auto it = j.find("p_max_over_noise_db"); it != j.end()) {
    seen.insert("p_max_over_noise_db");
    c.noise_var = c.p_max_watts / from_db(it->get<double>());
  }

  if (auto it = j.find("ofdm"); it != j.end()) {
    seen.insert("ofdm");
    const json& o = *it;
    std::set<std::string> os{"subcarrier_spacing_hz", "symbol_period_s"};
    take(o, "bandwidth_hz", c.ofdm.bandwidth_hz, os);
    take(o, "subcarrier_count", c.ofdm.subcarrier_count, os);
    take(o, "cp_duration_s", c.ofdm.cp_duration_s, os);
    take(o, "rb_subcarriers", c.ofdm.rb_subcarriers, os);
    take(o, "rb_symbols", c.ofdm.rb_symbols, os);
    reject_unknown(o, os, "ofdm.");
    check_derived(o, "subcarrier_spacing_hz", c.ofdm.subcarrier_spacing_hz());
    check_derived(o, "symbol_period_s", c.ofdm.symbol_period_s());
  }

  if (auto it = j.find("solver_params"); it != j.end()) {
    seen.insert("solver_params");
    const json& p = *it;
    auto& s = c.solver;
    std::set<std::string> ps;
    take(p, "rzf_reg_scale", s.rzf_reg_scale, ps);
    take(p, "projection_reg_scale", s.projection_reg_scale, ps);
    take(p, "split_penalty", s.split_penalty, ps);
    if (auto pit = p.find("pga"); pit != p.end()) {
      ps.insert("pga");
      std::set<std::string> gs;
      take(*pit, "initial_rho", s.pga.initial_rho, gs);
      take(*pit, "initial_step", s.pga.initial_step, gs);
      take(*pit, "shrink", s.pga.shrink, gs);
      take(*pit, "max_iterations", s.pga.max_iterations, gs);
      take(*pit, "tolerance", s.pga.tolerance, gs);
      take(*pit, "rho_floor", s.pga.rho_floor, gs);
      reject_unknown(*pit, gs, "solver_params.pga.");
    }
    take(p, "gamma_db", s.gamma_db, ps);
    take_opt(p, "fixed_psr", s.fixed_psr, ps);
    take(p, "lambda_tradeoff", s.tradeoff, ps);
    take(p, "admm_penalty", s.admm_penalty, ps);
    if (auto eit = p.find("eta_policy"); eit != p.end()) {
      ps.insert("eta_policy");
      const auto v = eit->get<std::string>();
      if (v == "equal") {
        s.eta_policy = EtaPolicy::kEqual;
      } else if (v == "channel_gain") {
        s.eta_policy = EtaPolicy::kChannelGain;
      } else {
        throw std::invalid_argument("eta_policy must be 'equal' or 'channel_gain'");
      }
    }
    take(p, "slack_penalty_init", s.slack_penalty_init, ps);
    take(p, "slack_penalty_step", s.slack_penalty_step, ps);
    take(p, "slack_penalty_max", s.slack_penalty_max, ps);
    take(p, "consensus_tol", s.consensus_tol, ps);
    take(p, "max_admm_iterations", s.max_admm_iterations, ps);
    take(p, "zeta_in_local_objective", s.zeta_in_local_objective, ps);
    take(p, "divide_by_tx_count", s.divide_by_tx_count, ps);
    take(p, "sca_max_rounds", s.sca_max_rounds, ps);
    take(p, "sca_tolerance", s.sca_tolerance, ps);
    reject_unknown(p, ps, "solver_params.");
  }
  reject_unknown(j, seen, "");
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void apply_override(ScenarioConfig& config, std::string_view key, double value) {
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"n_ue", "ue_count"},     {"n_ap", "ap_count"},
      {"m", "antennas_per_ap"}, {"lambda", "solver_params.lambda_tradeoff"},
      {"gamma_db", "solver_params.gamma_db"}, {"fixed_psr", "solver_params.fixed_psr"},
  };
  std::string path(key);
  if (auto it = aliases.find(key); it != aliases.end()) path = it->second;

  json j = json::parse(config_to_json(config, -1));
  json* node = &j;
  std::string leaf = path;
  for (auto dot = leaf.find('.'); dot != std::string::npos; dot = leaf.find('.')) {
    const std::string head = leaf.substr(0, dot);
    if (!node->contains(head)) throw std::invalid_argument("unknown override key " + path);
    node = &(*node)[head];
    leaf = leaf.substr(dot + 1);
  }
  if (!node->contains(leaf) && !(leaf.size() > 3 && leaf.ends_with("_db"))) {
    // Top-level solver keys may be given without the prefix.
    if (node == &j && j["solver_params"].contains(leaf)) {
      node = &j["solver_params"];
    } else {
      throw std::invalid_argument("unknown override key " + path);
    }
  }
  const json& current = (*node)[leaf];
  if (current.is_number_integer() || current.is_number_unsigned()) {
    if (value != std::floor(value)) {
      throw std::invalid_argument("override " + path + " requires an integer value");
    }
    (*node)[leaf] = static_cast<long long>(value);
  } else if (current.is_boolean()) {
    (*node)[leaf] = value != 0.0;
  } else {
    (*node)[leaf] = value;
  }
  // Derived OFDM fields would be stale after a numerology change.
  j["ofdm"].erase("subcarrier_spacing_hz");
  j["ofdm"].erase("symbol_period_s");
  config = config_from_json(j.dump());
}

std::string scenario_hash(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  c.seed = 0;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(c, -1))));
  return buf;
}

}  // namespace cfisac
