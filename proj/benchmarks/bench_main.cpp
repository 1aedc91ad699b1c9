#include <benchmark/benchmark.h>

#include "cfisac/centralized.hpp"
#include "cfisac/channel.hpp"
#include "cfisac/jointopt.hpp"
#include "cfisac/splitopt.hpp"

namespace {

struct Draw {
  cfisac::ScenarioConfig cfg;
  cfisac::ChannelSet channels;
  std::vector<cfisac::SensingPath> paths;
};

Draw draw(int aps, int m, int ue, std::uint64_t seed = 1) {
  Draw d;
  d.cfg.ap_count = aps;
  d.cfg.antennas_per_ap = m;
  d.cfg.ue_count = ue;
  d.cfg.seed = seed;
  const auto geo = cfisac::build_scenario(d.cfg);
  d.channels = cfisac::gen_comm_channels(geo, d.cfg);
  d.paths = cfisac::sensing_paths(geo, d.cfg);
  return d;
}

void BM_Channels(benchmark::State& state) {
  cfisac::ScenarioConfig cfg;
  cfg.ue_count = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto geo = cfisac::build_scenario(cfg);
    benchmark::DoNotOptimize(cfisac::gen_comm_channels(geo, cfg));
  }
}
BENCHMARK(BM_Channels)->Arg(1)->Arg(6);

void BM_SplitOpt(benchmark::State& state) {
  const Draw d = draw(4, 10, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfisac::run_splitopt(d.cfg, d.channels, d.paths, 15.0));
  }
}
BENCHMARK(BM_SplitOpt)->Arg(4)->Arg(6)->Unit(benchmark::kMicrosecond);

void BM_LocalStep(benchmark::State& state) {
  const Draw d = draw(4, static_cast<int>(state.range(0)), 6);
  const auto steering = cfisac::target_steering(d.channels, d.paths);
  cfisac::LocalInput in;
  in.H = d.channels.H[0];
  in.steering = steering[0];
  in.anchor = cfisac::initial_beamformer(in.H, in.steering, 1, 1.0);
  in.gamma_prev = 1.0;
  in.psi.assign(6, 0.1);
  in.eta.assign(6, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(cfisac::local_step(in));
}
BENCHMARK(BM_LocalStep)->Arg(3)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_JointOpt(benchmark::State& state) {
  const Draw d = draw(4, 10, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cfisac::run_jointopt(d.cfg, d.channels, d.paths));
}
BENCHMARK(BM_JointOpt)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Centralized(benchmark::State& state) {
  const Draw d = draw(11, 3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cfisac::solve_centralized(d.cfg, d.channels, d.paths));
}
BENCHMARK(BM_Centralized)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
