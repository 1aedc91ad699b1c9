#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cfisac/harness.hpp"

using namespace cfisac;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cfisac_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

ResultRow row(const std::string& hash, std::uint64_t seed, const std::string& algo, double sinr,
              double snr) {
  ResultRow r;
  r.scenario_hash = hash;
  r.seed = seed;
  r.algo = algo;
  r.min_sinr_db = sinr;
  r.mean_sinr_db = sinr;
  r.sens_snr_db = snr;
  r.status = "ok";
  return r;
}

}  // namespace

TEST(Sweep, Parse) {
  const SweepAxis ax = parse_sweep("gamma_db=10, 12.5,14");
  EXPECT_EQ(ax.key, "gamma_db");
  EXPECT_EQ(ax.values, (std::vector<double>{10, 12.5, 14}));
  EXPECT_THROW(parse_sweep("gamma_db"), std::invalid_argument);
  EXPECT_THROW(parse_sweep("gamma_db=1,,2"), std::invalid_argument);
  EXPECT_THROW(parse_sweep("gamma_db=1x"), std::invalid_argument);
}

TEST(Algorithms, ParseNames) {
  EXPECT_EQ(parse_algorithm("jointopt"), Algorithm::kJointOpt);
  EXPECT_THROW(parse_algorithm("admm"), std::invalid_argument);
}

TEST(Presets, Fig2Grid) {
  RunRequest req;
  req.preset = "fig2";
  const auto grid = expand_grid(req);
  ASSERT_EQ(grid.size(), 21u);
  for (const auto& gp : grid) {
    EXPECT_EQ(gp.config.ap_count, 4);
    EXPECT_EQ(gp.config.antennas_per_ap, 10);
  }
  // Last axis fastest.
  EXPECT_EQ(grid[0].config.ue_count, 4);
  EXPECT_EQ(grid[1].config.ue_count, 5);
  EXPECT_EQ(grid[3].config.solver.gamma_db, 11.0);
  EXPECT_EQ(find_preset("fig2").algorithms, std::vector<Algorithm>{Algorithm::kSplitOpt});
}

TEST(Presets, Fig3LowRank) {
  const Preset p = find_preset("fig3-lowrank");
  EXPECT_EQ(p.algorithms, (std::vector<Algorithm>{Algorithm::kJointOpt, Algorithm::kCentralized}));
  RunRequest req;
  req.preset = "fig3-lowrank";
  const auto grid = expand_grid(req);
  ASSERT_EQ(grid.size(), 3u);
  for (const auto& gp : grid) {
    EXPECT_EQ(gp.config.ap_count, 11);
    EXPECT_EQ(gp.config.antennas_per_ap, 3);
  }
}

TEST(Presets, ExtraSweepMultipliesCardinality) {
  RunRequest req;
  req.preset = "fig3";
  req.sweeps = {parse_sweep("gamma_db=10,20")};
  EXPECT_EQ(expand_grid(req).size(), 36u);
  req.sweeps = {parse_sweep("n_ue=1,2")};
  EXPECT_THROW(expand_grid(req), std::invalid_argument);
  EXPECT_THROW(find_preset("fig9"), std::invalid_argument);
}

TEST(Grid, DistinctHashes) {
  RunRequest req;
  req.sweeps = {parse_sweep("n_ue=2,3"), parse_sweep("lambda=0.3,0.9")};
  const auto grid = expand_grid(req);
  ASSERT_EQ(grid.size(), 4u);
  std::set<std::string> hashes;
  for (const auto& gp : grid) hashes.insert(gp.hash);
  EXPECT_EQ(hashes.size(), 4u);
}

TEST(Run, InvalidConfigListsViolations) {
  RunRequest req;
  req.base.ap_count = 1;
  req.algorithms = {Algorithm::kSplitOpt};
  try {
    run_experiments(req);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("ap_count"), std::string::npos);
  }
}

TEST(Run, StatusVocabulary) {
  RunRequest req;
  req.base.ue_count = 3;
  req.threads = 1;
  const RunOutput out = run_experiments(req);
  ASSERT_EQ(out.results.size(), 3u);
  const std::set<std::string> allowed{"ok", "not_converged", "inaccurate", "target_relaxed"};
  for (const auto& r : out.results) EXPECT_TRUE(allowed.count(r.status)) << r.status;
}

TEST(Run, RowsCarryHashAndSeed) {
  RunRequest req;
  req.algorithms = {Algorithm::kSplitOpt};
  req.seed_count = 3;
  req.first_seed = 7;
  req.sweeps = {parse_sweep("n_ue=3,4")};
  req.threads = 2;
  const RunOutput out = run_experiments(req);
  ASSERT_EQ(out.results.size(), 6u);
  const auto grid = expand_grid(req);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(out.results[i].scenario_hash, grid[i / 3].hash);
    EXPECT_EQ(out.results[i].seed, 7 + i % 3);
    EXPECT_EQ(out.results[i].fronthaul_scalars, 4);
  }
  EXPECT_EQ(out.links.size(), 3u * 3 + 3u * 4);
}

TEST(Run, ThreadCountDoesNotChangeOutput) {
  RunRequest req;
  req.preset = "table1";
  req.seed_count = 2;
  req.threads = 1;
  const RunOutput a = run_experiments(req);
  req.threads = 3;
  const RunOutput b = run_experiments(req);
  EXPECT_EQ(results_csv(a.results), results_csv(b.results));
  const auto da = scratch("thr_a"), db = scratch("thr_b");
  write_outputs(a, da);
  write_outputs(b, db);
  for (const char* f : {"results.csv", "fronthaul.csv", "trace.csv", "link_metrics.csv", "manifest.json"}) {
    EXPECT_EQ(slurp(da / f), slurp(db / f)) << f;
  }
  std::filesystem::remove_all(da);
  std::filesystem::remove_all(db);
}

TEST(Run, Table1Counts) {
  RunRequest req;
  req.preset = "table1";
  const RunOutput out = run_experiments(req);
  ASSERT_EQ(out.results.size(), 3u);
  EXPECT_EQ(out.results[0].fronthaul_scalars, 4);
  EXPECT_EQ(out.results[1].fronthaul_scalars, 7 * out.results[1].t_admm);
  EXPECT_EQ(out.results[2].fronthaul_scalars, 280);
}

TEST(Csv, HeaderAndRoundTrip) {
  std::vector<ResultRow> rows{row("abc", 1, "splitopt", 14.25, 37.5), row("abc", 2, "jointopt", -0.0000001, 1)};
  rows[1].status = "error: x; y";
  const std::string text = results_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kResultsHeader);
  EXPECT_EQ(text.find("-0.000000"), std::string::npos);
  const auto back = parse_results_csv(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].min_sinr_db, 14.25);
  EXPECT_EQ(back[1].status, "error: x; y");
  EXPECT_EQ(results_csv(back), text);
  EXPECT_THROW(parse_results_csv("a,b,c\n1,2,3\n"), std::invalid_argument);
}

TEST(Compare, IdenticalInputsZeroDeltas) {
  const std::vector<ResultRow> a{row("h", 1, "jointopt", 5, 40), row("h", 2, "jointopt", 6, 41)};
  const CompareSummary s = compare_results(a, a);
  EXPECT_EQ(s.matched, 2);
  EXPECT_EQ(s.unmatched, 0);
  for (const auto& r : s.rows) {
    EXPECT_EQ(r.d_min_sinr_db, 0.0);
    EXPECT_EQ(r.d_sens_snr_db, 0.0);
  }
  EXPECT_TRUE(s.pass);
}

TEST(Compare, MissingSeedUnmatched) {
  const std::vector<ResultRow> a{row("h", 1, "x", 5, 40), row("h", 2, "x", 6, 41)};
  const std::vector<ResultRow> b{row("h", 1, "x", 5, 40)};
  const CompareSummary s = compare_results(a, b);
  EXPECT_EQ(s.unmatched, 1);
  EXPECT_NE(compare_csv(s).find("unmatched"), std::string::npos);
}

TEST(Compare, PinnedAlgorithmsGapDistribution) {
  const std::vector<ResultRow> rows{row("h", 1, "jointopt", 5, 40), row("h", 1, "centralized", 6, 40.5),
                                    row("h", 2, "jointopt", 2, 40), row("h", 2, "centralized", 6, 40)};
  CompareOptions o;
  o.algo_a = "jointopt";
  o.algo_b = "centralized";
  const CompareSummary s = compare_results(rows, rows, o);
  EXPECT_EQ(s.matched, 2);
  EXPECT_EQ(s.passing, 1);
  EXPECT_EQ(s.min_sinr_gaps_db, (std::vector<double>{1.0, 4.0}));
  EXPECT_FALSE(s.pass);
  const std::string text = format_summary(s);
  EXPECT_NE(text.find("p50"), std::string::npos);
  EXPECT_NE(text.find("FAIL"), std::string::npos);
}
