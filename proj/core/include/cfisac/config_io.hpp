#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cfisac/scenario.hpp"

namespace cfisac {

/// JSON text for a config; keys mirror the ScenarioConfig field names.
std::string config_to_json(const ScenarioConfig& config, int indent = 2);

/// Parses a config from JSON text. Unknown keys are rejected. Power ratios
/// may be given in dB through `_db`-suffixed keys (e.g. `rician_k_factor_db`,
/// `p_max_over_noise_db`) and are converted to linear values.
ScenarioConfig config_from_json(std::string_view text);

ScenarioConfig load_config(const std::filesystem::path& path);

/// Sets one scalar config field by name. Accepts the JSON key names plus the
/// sweep aliases n_ue, n_ap, m, lambda, gamma_db, fixed_psr, seed.
void apply_override(ScenarioConfig& config, std::string_view key, double value);

/// Stable 64-bit hash of the resolved config, rendered as 16 hex digits.
std::string scenario_hash(const ScenarioConfig& config);

}  // namespace cfisac
