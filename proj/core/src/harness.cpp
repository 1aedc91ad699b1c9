#include "cfisac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cfisac/centralized.hpp"
#include "cfisac/channel.hpp"
#include "cfisac/config_io.hpp"
#include "cfisac/jointopt.hpp"
#include "cfisac/splitopt.hpp"
#include "json.hpp"

namespace cfisac {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse " + what + " value '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("cannot parse " + what + " value '" + s + "'");
  return v;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Avoid "-0.000000" so reruns and platforms agree on the text.
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

// Commas would break the CSV; messages keep their words.
std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int worker_count(int requested, std::size_t jobs) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("CFISAC_THREADS"); env && *env) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min<int>(n, static_cast<int>(std::max<std::size_t>(jobs, 1))));
}

struct CellOutput {
  std::vector<ResultRow> results;
  std::vector<TraceRow> trace;
  std::vector<FronthaulRow> fronthaul;
  std::vector<LinkRow> links;
};

ResultRow base_row(const GridPoint& gp, std::uint64_t seed, Algorithm algo) {
  ResultRow r;
  r.scenario_hash = gp.hash;
  r.seed = seed;
  r.algo = std::string(to_string(algo));
  r.n_ue = gp.config.ue_count;
  r.m = gp.config.antennas_per_ap;
  r.lambda = gp.config.solver.tradeoff;
  r.gamma_db = gp.config.solver.gamma_db;
  return r;
}

void fill_common(CellOutput& out, ResultRow& row, const LinkMetrics& lm,
                 const FronthaulLedger& ledger, Algorithm algo) {
  row.min_sinr_db = lm.min_sinr_db();
  row.mean_sinr_db = lm.mean_sinr_db();
  row.sens_snr_db = lm.sensing_snr_db();
  row.fronthaul_scalars = summarize(ledger, algo).per_ap();
  for (const auto& e : ledger.entries()) out.fronthaul.push_back({row.scenario_hash, row.seed, row.algo, e});
  for (std::size_t u = 0; u < lm.sinr.size(); ++u) {
    out.links.push_back({row.scenario_hash, row.seed, row.algo, static_cast<int>(u), to_db(lm.sinr[u]),
                         row.sens_snr_db, lm.ue[u]});
  }
}

CellOutput run_cell(const GridPoint& gp, std::uint64_t seed, const std::vector<Algorithm>& algos) {
  CellOutput out;
  ScenarioConfig cfg = gp.config;
  cfg.seed = seed;
  Geometry geo;
  ChannelSet channels;
  std::vector<SensingPath> paths;
  std::string setup_error;
  try {
    geo = build_scenario(cfg);
    channels = gen_comm_channels(geo, cfg);
    paths = sensing_paths(geo, cfg);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  for (Algorithm algo : algos) {
    ResultRow row = base_row(gp, seed, algo);
    if (!setup_error.empty()) {
      row.status = csv_safe("error: " + setup_error);
      out.results.push_back(row);
      continue;
    }
    try {
      switch (algo) {
        case Algorithm::kSplitOpt: {
          const SplitOptResult r = run_splitopt(cfg, channels, paths, cfg.solver.gamma_db);
          fill_common(out, row, r.metrics, r.ledger, algo);
          row.status = !r.pga_converged ? "not_converged"
                       : r.split.slack > 1e-6 ? "target_relaxed"
                                              : "ok";
          break;
        }
        case Algorithm::kJointOpt: {
          const JointOptResult r = run_jointopt(cfg, channels, paths);
          fill_common(out, row, r.metrics, r.ledger, algo);
          row.t_admm = r.iterations;
          row.status = !r.converged ? "not_converged" : r.solver_inaccurate ? "inaccurate" : "ok";
          for (const auto& t : r.trace) {
            out.trace.push_back({row.scenario_hash, seed, row.algo, t.t, t.gamma, t.residual,
                                 t.min_sinr_db, t.sensing_snr_db, t.slack_penalty, t.solver_iterations});
          }
          break;
        }
        case Algorithm::kCentralized: {
          const CentralizedResult r = solve_centralized(cfg, channels, paths);
          fill_common(out, row, r.metrics, r.ledger, algo);
          row.status = !r.converged ? "not_converged" : r.solver_inaccurate ? "inaccurate" : "ok";
          break;
        }
      }
    } catch (const std::exception& e) {
      row.status = csv_safe(std::string("error: ") + e.what());
    }
    out.results.push_back(row);
  }
  return out;
}

ordered_json manifest_json(const RunRequest& req, const std::vector<GridPoint>& grid,
                           const std::vector<Algorithm>& algos) {
  ordered_json j;
  j["tool"] = "cfisac";
  j["preset"] = req.preset ? ordered_json(*req.preset) : ordered_json(nullptr);
  ordered_json a = ordered_json::array();
  for (Algorithm x : algos) a.push_back(std::string(to_string(x)));
  j["algorithms"] = a;
  ordered_json seeds = ordered_json::array();
  for (int s = 0; s < req.seed_count; ++s) seeds.push_back(req.first_seed + s);
  j["seeds"] = seeds;
  ordered_json sw = ordered_json::array();
  for (const auto& ax : req.sweeps) sw.push_back({{"key", ax.key}, {"values", ax.values}});
  j["sweeps"] = sw;
  j["base_config"] = ordered_json::parse(config_to_json(req.base, -1));
  ordered_json g = ordered_json::array();
  for (const auto& gp : grid) {
    ordered_json o = ordered_json::object();
    for (const auto& [k, v] : gp.overrides) o[k] = v;
    g.push_back({{"scenario_hash", gp.hash},
                 {"overrides", o},
                 {"config", ordered_json::parse(config_to_json(gp.config, -1))}});
  }
  j["grid"] = g;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

}  // namespace

SweepAxis parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw std::invalid_argument("sweep must look like key=v1,v2,...: '" + std::string(text) + "'");
  }
  SweepAxis ax;
  ax.key = trim(text.substr(0, eq));
  for (const auto& part : split(text.substr(eq + 1), ',')) {
    const std::string v = trim(part);
    if (v.empty()) throw std::invalid_argument("empty value in sweep " + ax.key);
    ax.values.push_back(parse_double(v, "sweep " + ax.key));
  }
  return ax;
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::kSplitOpt, Algorithm::kJointOpt, Algorithm::kCentralized}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig3-lowrank", "table1"}; }

Preset find_preset(std::string_view name) {
  Preset p;
  p.name = std::string(name);
  if (name == "fig2") {
    p.fixed = {{"n_ap", 4}, {"m", 10}};
    p.sweeps = {{"gamma_db", {10, 11, 12, 13, 14, 15, 16}}, {"n_ue", {4, 5, 6}}};
    p.algorithms = {Algorithm::kSplitOpt};
    p.expected_points = 21;
  } else if (name == "fig3") {
    p.fixed = {{"n_ap", 4}, {"m", 10}};
    p.sweeps = {{"lambda", {0.3, 0.6, 0.9}}, {"n_ue", {1, 2, 3, 4, 5, 6}}};
    p.algorithms = {Algorithm::kJointOpt};
    p.expected_points = 18;
  } else if (name == "fig3-lowrank") {
    p.fixed = {{"n_ap", 11}, {"m", 3}};
    p.sweeps = {{"n_ue", {4, 5, 6}}};
    p.algorithms = {Algorithm::kJointOpt, Algorithm::kCentralized};
    p.expected_points = 3;
  } else if (name == "table1") {
    p.fixed = {{"n_ap", 4}, {"m", 10}, {"n_ue", 6}, {"sensing_streams", 1}};
    p.algorithms = {Algorithm::kSplitOpt, Algorithm::kJointOpt, Algorithm::kCentralized};
    p.expected_points = 1;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return p;
}

std::vector<GridPoint> expand_grid(const RunRequest& request) {
  ScenarioConfig base = request.base;
  std::vector<SweepAxis> axes;
  std::size_t expected = 0;
  if (request.preset) {
    const Preset p = find_preset(*request.preset);
    for (const auto& [k, v] : p.fixed) apply_override(base, k, v);
    axes = p.sweeps;
    expected = p.expected_points;
  }
  std::set<std::string> keys;
  for (const auto& ax : axes) keys.insert(ax.key);
  for (const auto& ax : request.sweeps) {
    if (!keys.insert(ax.key).second) throw std::invalid_argument("sweep key repeated: " + ax.key);
    if (ax.values.empty()) throw std::invalid_argument("sweep " + ax.key + " has no values");
    axes.push_back(ax);
    if (expected) expected *= ax.values.size();
  }

  std::vector<GridPoint> grid;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    GridPoint gp;
    gp.config = base;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      gp.overrides.emplace_back(axes[i].key, axes[i].values[idx[i]]);
      apply_override(gp.config, axes[i].key, axes[i].values[idx[i]]);
    }
    gp.hash = scenario_hash(gp.config);
    grid.push_back(std::move(gp));
    // Odometer with the last axis fastest.
    std::size_t i = axes.size();
    while (i > 0 && ++idx[i - 1] == axes[i - 1].values.size()) idx[--i] = 0;
    if (i == 0) break;
  }
  if (request.preset && grid.size() != expected) {
    throw std::invalid_argument("preset " + *request.preset + " expands to " +
                                std::to_string(grid.size()) + " points, expected " +
                                std::to_string(expected));
  }
  return grid;
}

RunOutput run_experiments(const RunRequest& request) {
  if (request.seed_count < 1) throw std::invalid_argument("seed count must be >= 1");
  const std::vector<GridPoint> grid = expand_grid(request);
  for (const auto& gp : grid) {
    const auto violations = validate_config(gp.config);
    if (!violations.empty()) {
      std::string msg = "invalid config:";
      for (const auto& v : violations) msg += "\n  " + v.field + ": " + v.rule;
      throw std::invalid_argument(msg);
    }
  }
  std::vector<Algorithm> algos = request.algorithms;
  if (algos.empty()) {
    algos = request.preset ? find_preset(*request.preset).algorithms
                           : std::vector<Algorithm>{Algorithm::kSplitOpt, Algorithm::kJointOpt,
                                                    Algorithm::kCentralized};
  }

  struct Job {
    std::size_t point;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (int s = 0; s < request.seed_count; ++s) jobs.push_back({p, request.first_seed + s});
  }
  std::vector<CellOutput> cells(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      cells[i] = run_cell(grid[jobs[i].point], jobs[i].seed, algos);
    }
  };
  const int n = worker_count(request.threads, jobs.size());
  {
    std::vector<std::jthread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }

  // Job order is the deterministic output order.
  RunOutput out;
  for (auto& c : cells) {
    std::move(c.results.begin(), c.results.end(), std::back_inserter(out.results));
    std::move(c.trace.begin(), c.trace.end(), std::back_inserter(out.trace));
    std::move(c.fronthaul.begin(), c.fronthaul.end(), std::back_inserter(out.fronthaul));
    std::move(c.links.begin(), c.links.end(), std::back_inserter(out.links));
  }
  out.manifest = manifest_json(request, grid, algos).dump(2) + "\n";
  return out;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kResultsHeader << '\n';
  for (const auto& r : rows) {
    os << r.scenario_hash << ',' << r.seed << ',' << r.algo << ',' << r.n_ue << ',' << r.m << ','
       << fmt(r.lambda) << ',' << fmt(r.gamma_db) << ',' << fmt(r.min_sinr_db) << ','
       << fmt(r.mean_sinr_db) << ',' << fmt(r.sens_snr_db) << ',' << r.t_admm << ','
       << r.fronthaul_scalars << ',' << r.status << '\n';
  }
  return os.str();
}

void write_outputs(const RunOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "results.csv", results_csv(out.results));

  std::ostringstream tr;
  tr << "scenario_hash,seed,algo,t,gamma,residual,min_sinr_db,sens_snr_db,slack_penalty,"
        "solver_iterations\n";
  for (const auto& r : out.trace) {
    tr << r.scenario_hash << ',' << r.seed << ',' << r.algo << ',' << r.t << ',' << fmt(r.gamma)
       << ',' << fmt(r.residual) << ',' << fmt(r.min_sinr_db) << ',' << fmt(r.sens_snr_db) << ','
       << fmt(r.slack_penalty) << ',';
    for (std::size_t i = 0; i < r.solver_iterations.size(); ++i) {
      tr << (i ? ";" : "") << r.solver_iterations[i];
    }
    tr << '\n';
  }
  write_text(dir / "trace.csv", tr.str());

  std::ostringstream fh;
  fh << "scenario_hash,seed,algo,ap_id,phase,direction,scalars,iteration\n";
  for (const auto& r : out.fronthaul) {
    fh << r.scenario_hash << ',' << r.seed << ',' << r.algo << ',' << r.entry.ap << ','
       << to_string(r.entry.phase) << ',' << to_string(r.entry.direction) << ','
       << r.entry.scalars << ',' << r.entry.iteration << '\n';
  }
  write_text(dir / "fronthaul.csv", fh.str());

  std::ostringstream lk;
  lk << "scenario_hash,seed,algo,ue_id,sinr_db,snr_db,cds,mui,s2ci\n";
  char buf[160];
  for (const auto& r : out.links) {
    // Powers span many decades; keep significant digits rather than decimals.
    std::snprintf(buf, sizeof buf, "%.9e,%.9e,%.9e", r.power.cds, r.power.mui, r.power.s2ci);
    lk << r.scenario_hash << ',' << r.seed << ',' << r.algo << ',' << r.ue << ',' << fmt(r.sinr_db)
       << ',' << fmt(r.snr_db) << ',' << buf << '\n';
  }
  write_text(dir / "link_metrics.csv", lk.str());
  write_text(dir / "manifest.json", out.manifest);
}

std::vector<ResultRow> parse_results_csv(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line) || trim(line) != kResultsHeader) {
    throw std::invalid_argument("results schema mismatch: expected header '" +
                                std::string(kResultsHeader) + "'");
  }
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 13) {
      throw std::invalid_argument("results schema mismatch: line " + std::to_string(lineno) +
                                  " has " + std::to_string(f.size()) + " fields");
    }
    ResultRow r;
    r.scenario_hash = f[0];
    r.seed = static_cast<std::uint64_t>(parse_double(f[1], "seed"));
    r.algo = f[2];
    r.n_ue = static_cast<int>(parse_double(f[3], "n_ue"));
    r.m = static_cast<int>(parse_double(f[4], "m"));
    r.lambda = parse_double(f[5], "lambda");
    r.gamma_db = parse_double(f[6], "gamma_db");
    r.min_sinr_db = parse_double(f[7], "min_sinr_db");
    r.mean_sinr_db = parse_double(f[8], "mean_sinr_db");
    r.sens_snr_db = parse_double(f[9], "sens_snr_db");
    r.t_admm = static_cast<int>(parse_double(f[10], "t_admm"));
    r.fronthaul_scalars = static_cast<std::int64_t>(parse_double(f[11], "fronthaul_scalars"));
    r.status = f[12];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_results_csv(ss.str());
}

CompareSummary compare_results(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b,
                               const CompareOptions& options) {
  const bool pinned = options.algo_a.has_value() && options.algo_b.has_value();
  using Key = std::tuple<std::string, std::uint64_t, std::string>;
  auto key = [&](const ResultRow& r) { return Key{r.scenario_hash, r.seed, pinned ? "" : r.algo}; };
  auto keep = [](const ResultRow& r, const std::optional<std::string>& algo) {
    return !algo || r.algo == *algo;
  };

  std::map<Key, const ResultRow*> right;
  for (const auto& r : b) {
    if (keep(r, options.algo_b)) right.emplace(key(r), &r);
  }
  std::set<Key> used;
  CompareSummary s;
  for (const auto& r : a) {
    if (!keep(r, options.algo_a)) continue;
    CompareRow c;
    c.scenario_hash = r.scenario_hash;
    c.seed = r.seed;
    c.algo_a = r.algo;
    c.n_ue = r.n_ue;
    c.m = r.m;
    const auto it = right.find(key(r));
    if (it != right.end() && used.insert(it->first).second) {
      const ResultRow& o = *it->second;
      c.algo_b = o.algo;
      c.matched = true;
      c.d_min_sinr_db = r.min_sinr_db - o.min_sinr_db;
      c.d_mean_sinr_db = r.mean_sinr_db - o.mean_sinr_db;
      c.d_sens_snr_db = r.sens_snr_db - o.sens_snr_db;
      c.pass = std::abs(c.d_min_sinr_db) <= options.max_min_sinr_gap_db &&
               std::abs(c.d_sens_snr_db) <= options.max_sens_snr_gap_db;
      ++s.matched;
      s.passing += c.pass ? 1 : 0;
      s.min_sinr_gaps_db.push_back(std::abs(c.d_min_sinr_db));
    } else {
      ++s.unmatched;
    }
    s.rows.push_back(std::move(c));
  }
  for (const auto& [k, r] : right) {
    if (used.count(k)) continue;
    CompareRow c;
    c.scenario_hash = r->scenario_hash;
    c.seed = r->seed;
    c.algo_b = r->algo;
    c.n_ue = r->n_ue;
    c.m = r->m;
    ++s.unmatched;
    s.rows.push_back(std::move(c));
  }
  std::sort(s.min_sinr_gaps_db.begin(), s.min_sinr_gaps_db.end());
  s.pass_fraction = s.matched ? static_cast<double>(s.passing) / s.matched : 0.0;
  s.pass = s.matched > 0 && s.pass_fraction >= options.min_pass_fraction;
  return s;
}

std::string compare_csv(const CompareSummary& summary) {
  std::ostringstream os;
  os << "scenario_hash,seed,algo_a,algo_b,n_ue,m,d_min_sinr_db,d_mean_sinr_db,d_sens_snr_db,"
        "result\n";
  for (const auto& r : summary.rows) {
    os << r.scenario_hash << ',' << r.seed << ',' << r.algo_a << ',' << r.algo_b << ',' << r.n_ue
       << ',' << r.m << ',';
    if (r.matched) {
      os << fmt(r.d_min_sinr_db) << ',' << fmt(r.d_mean_sinr_db) << ',' << fmt(r.d_sens_snr_db)
         << ',' << (r.pass ? "pass" : "fail");
    } else {
      os << ",,,unmatched";
    }
    os << '\n';
  }
  return os.str();
}

std::string format_summary(const CompareSummary& s) {
  auto quantile = [&](double q) {
    if (s.min_sinr_gaps_db.empty()) return std::nan("");
    const double pos = q * (s.min_sinr_gaps_db.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.min_sinr_gaps_db.size() - 1);
    return s.min_sinr_gaps_db[lo] + (pos - lo) * (s.min_sinr_gaps_db[hi] - s.min_sinr_gaps_db[lo]);
  };
  std::ostringstream os;
  os << "matched " << s.matched << ", unmatched " << s.unmatched << '\n';
  os << "|d min-SINR| dB  p10 " << fmt(quantile(0.1)) << "  p50 " << fmt(quantile(0.5)) << "  p90 "
     << fmt(quantile(0.9)) << "  max " << fmt(quantile(1.0)) << '\n';
  os << "within thresholds " << s.passing << '/' << s.matched << " (" << fmt(100.0 * s.pass_fraction)
     << "%) -> " << (s.pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

}  // namespace cfisac
