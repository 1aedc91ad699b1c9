#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfisac/fronthaul.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

/// `key=v1,v2,...`; keys are those accepted by apply_override.
struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

SweepAxis parse_sweep(std::string_view text);

Algorithm parse_algorithm(std::string_view name);

struct Preset {
  std::string name;
  std::vector<std::pair<std::string, double>> fixed;  // applied to the base config
  std::vector<SweepAxis> sweeps;
  std::vector<Algorithm> algorithms;
  std::size_t expected_points = 0;  // grid cardinality checked before running
};

std::vector<std::string> preset_names();

/// Throws std::invalid_argument for an unknown name.
Preset find_preset(std::string_view name);

struct RunRequest {
  ScenarioConfig base;
  std::optional<std::string> preset;
  std::vector<Algorithm> algorithms;  // empty: the preset's, else all three
  std::vector<SweepAxis> sweeps;
  int seed_count = 1;
  std::uint64_t first_seed = 1;
  int threads = 0;  // 0: CFISAC_THREADS, else hardware concurrency
};

/// One grid point: overrides applied to the base config.
struct GridPoint {
  std::vector<std::pair<std::string, double>> overrides;
  ScenarioConfig config;
  std::string hash;
};

/// Cross product of the preset's and the request's sweeps, preset first.
/// Throws if a preset's grid does not have its expected size or a sweep key
/// repeats.
std::vector<GridPoint> expand_grid(const RunRequest& request);

struct ResultRow {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string algo;
  int n_ue = 0;
  int m = 0;
  double lambda = 0.0;
  double gamma_db = 0.0;
  double min_sinr_db = 0.0;
  double mean_sinr_db = 0.0;
  double sens_snr_db = 0.0;
  int t_admm = 0;
  std::int64_t fronthaul_scalars = 0;
  std::string status;
};

struct TraceRow {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string algo;
  int t = 0;
  double gamma = 0.0;
  double residual = 0.0;
  double min_sinr_db = 0.0;
  double sens_snr_db = 0.0;
  double slack_penalty = 0.0;
  std::vector<int> solver_iterations;
};

struct FronthaulRow {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string algo;
  LedgerEntry entry;
};

struct LinkRow {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string algo;
  int ue = 0;
  double sinr_db = 0.0;
  double snr_db = 0.0;  // sensing SNR of the run, repeated per UE
  UePower power;
};

struct RunOutput {
  std::vector<ResultRow> results;
  std::vector<TraceRow> trace;
  std::vector<FronthaulRow> fronthaul;
  std::vector<LinkRow> links;
  std::string manifest;  // JSON
};

/// Runs every (grid point, seed) cell, each on its own channel draw shared by
/// the selected algorithms. Cell failures become rows with status "error: ...".
RunOutput run_experiments(const RunRequest& request);

inline constexpr std::string_view kResultsHeader =
    "scenario_hash,seed,algo,n_ue,m,lambda,gamma_db,min_sinr_db,mean_sinr_db,sens_snr_db,"
    "t_admm,fronthaul_scalars,status";

/// results.csv, trace.csv, fronthaul.csv, link_metrics.csv, manifest.json.
void write_outputs(const RunOutput& out, const std::filesystem::path& dir);

std::string results_csv(const std::vector<ResultRow>& rows);

/// Throws std::invalid_argument when the header is not the results schema.
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);
std::vector<ResultRow> parse_results_csv(std::string_view text);

struct CompareOptions {
  std::optional<std::string> algo_a;  // restrict side A to one algorithm
  std::optional<std::string> algo_b;
  double max_min_sinr_gap_db = 1.5;
  double max_sens_snr_gap_db = 1.5;
  double min_pass_fraction = 0.7;
};

struct CompareRow {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string algo_a;
  std::string algo_b;
  int n_ue = 0;
  int m = 0;
  bool matched = false;
  double d_min_sinr_db = 0.0;  // a - b
  double d_mean_sinr_db = 0.0;
  double d_sens_snr_db = 0.0;
  bool pass = false;
};

struct CompareSummary {
  std::vector<CompareRow> rows;
  int matched = 0;
  int unmatched = 0;
  int passing = 0;
  double pass_fraction = 0.0;
  bool pass = false;
  std::vector<double> min_sinr_gaps_db;  // sorted |d_min_sinr|
};

/// Joins on (scenario_hash, seed), plus algo unless both sides are pinned to
/// an algorithm.
CompareSummary compare_results(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b,
                               const CompareOptions& options = {});

std::string compare_csv(const CompareSummary& summary);
std::string format_summary(const CompareSummary& summary);

}  // namespace cfisac
