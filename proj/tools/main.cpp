// cfisac: experiment runner and result comparison.
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cfisac/channel.hpp"
#include "cfisac/config_io.hpp"
#include "cfisac/harness.hpp"

namespace {

cfisac::ScenarioConfig base_config(const std::string& path) {
  return path.empty() ? cfisac::ScenarioConfig{} : cfisac::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfisac - cell-free ISAC resource optimization experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset, algo = "auto";
  std::vector<std::string> sweeps;
  int seeds = 1, threads = 0;
  std::uint64_t first_seed = 1;
  auto* run = app.add_subcommand("run", "run algorithms over a seed batch and sweep grid");
  run->add_option("--config", config_path, "scenario config (JSON)")->check(CLI::ExistingFile);
  run->add_option("--algo", algo, "splitopt|jointopt|centralized|all")
      ->check(CLI::IsMember({"auto", "splitopt", "jointopt", "centralized", "all"}));
  run->add_option("--seeds", seeds, "number of seeds")->check(CLI::PositiveNumber);
  run->add_option("--seed", first_seed, "first seed");
  run->add_option("--sweep", sweeps, "key=v1,v2,... (repeatable; cross product)");
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--preset", preset, "fig2|fig3|fig3-lowrank|table1")
      ->check(CLI::IsMember(cfisac::preset_names()));
  run->add_option("--threads", threads, "worker cap (default: CFISAC_THREADS or all cores)");

  std::string file_a, file_b, algo_a, algo_b, compare_out;
  cfisac::CompareOptions copt;
  auto* cmp = app.add_subcommand("compare", "join two results.csv files on (scenario, seed)");
  cmp->add_option("a", file_a, "results.csv A")->required()->check(CLI::ExistingFile);
  cmp->add_option("b", file_b, "results.csv B")->required()->check(CLI::ExistingFile);
  cmp->add_option("--algo-a", algo_a, "take only this algorithm's rows from A");
  cmp->add_option("--algo-b", algo_b, "take only this algorithm's rows from B");
  cmp->add_option("--max-sinr-gap", copt.max_min_sinr_gap_db, "dB");
  cmp->add_option("--max-sensing-gap", copt.max_sens_snr_gap_db, "dB");
  cmp->add_option("--min-pass-fraction", copt.min_pass_fraction);
  cmp->add_option("--out", compare_out, "per-row deltas CSV");

  std::string channels_out;
  std::uint64_t channel_seed = 1;
  auto* chan = app.add_subcommand("channels", "draw one channel realization and write it as CSV");
  chan->add_option("--config", config_path, "scenario config (JSON)")->check(CLI::ExistingFile);
  chan->add_option("--seed", channel_seed, "seed");
  chan->add_option("--out", channels_out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cfisac::RunRequest req;
      req.base = base_config(config_path);
      if (!preset.empty()) req.preset = preset;
      if (algo == "all") {
        req.algorithms = {cfisac::Algorithm::kSplitOpt, cfisac::Algorithm::kJointOpt,
                          cfisac::Algorithm::kCentralized};
      } else if (algo != "auto") {
        req.algorithms = {cfisac::parse_algorithm(algo)};
      }
      for (const auto& s : sweeps) req.sweeps.push_back(cfisac::parse_sweep(s));
      req.seed_count = seeds;
      req.first_seed = first_seed;
      req.threads = threads;
      const cfisac::RunOutput out = cfisac::run_experiments(req);
      cfisac::write_outputs(out, out_dir);
      int failed = 0;
      for (const auto& r : out.results) failed += r.status.rfind("error", 0) == 0 ? 1 : 0;
      std::printf("%zu rows (%d errors) -> %s\n", out.results.size(), failed, out_dir.c_str());
    } else if (*cmp) {
      if (!algo_a.empty()) copt.algo_a = algo_a;
      if (!algo_b.empty()) copt.algo_b = algo_b;
      const auto s = cfisac::compare_results(cfisac::read_results_csv(file_a),
                                             cfisac::read_results_csv(file_b), copt);
      if (!compare_out.empty()) {
        std::ofstream f(compare_out, std::ios::binary);
        f << cfisac::compare_csv(s);
      }
      std::cout << cfisac::format_summary(s);
    } else if (*chan) {
      cfisac::ScenarioConfig cfg = base_config(config_path);
      cfg.seed = channel_seed;
      const auto geo = cfisac::build_scenario(cfg);
      cfisac::write_channels_csv(cfisac::gen_comm_channels(geo, cfg), channels_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "cfisac: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
