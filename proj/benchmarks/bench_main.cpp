#include <benchmark/benchmark.h>

#include <limits>
#include <random>

#include "slicing/allocator.hpp"
#include "slicing/channel.hpp"
#include "slicing/engine.hpp"
#include "slicing/traffic.hpp"

using namespace slicing;

namespace {

struct Instance {
  PhyParams phy;
  ChannelMatrix ch;
  WeightVector w;
};

Instance make_instance(std::size_t n, std::size_t k) {
  Instance in;
  in.phy.num_prbs = static_cast<int>(k);
  in.ch.gains = Matrix<double>(n, k);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> fading(1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const UserId id{static_cast<int>(i)};
    in.ch.users.push_back(id);
    in.w[id] = 3e-6 * unit(rng);
    for (std::size_t j = 0; j < k; ++j) {
      in.ch.gains(i, j) = path_loss_gain(35.0 + 1465.0 * unit(rng), in.phy) * fading(rng);
    }
  }
  return in;
}

void BM_SlotAllocate(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)),
                                static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(slot_allocate(in.w, in.ch, in.phy));
}
BENCHMARK(BM_SlotAllocate)->Args({12, 50})->Args({50, 100});

void BM_DemandCapped(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in = make_instance(n, static_cast<std::size_t>(state.range(1)));
  std::vector<double> demand(n, 250e3);
  demand[0] = std::numeric_limits<double>::infinity();
  for (auto _ : state) benchmark::DoNotOptimize(demand_capped_allocate(in.w, in.ch, in.phy, demand));
}
BENCHMARK(BM_DemandCapped)->Args({12, 50})->Args({50, 100});

void BM_BruteForce3x3(benchmark::State& state) {
  const auto in = make_instance(3, 3);
  std::vector<double> grid;
  for (int g = 0; g <= 1000; ++g) grid.push_back(g * 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_oracle(in.w, in.ch, in.phy, grid));
}
BENCHMARK(BM_BruteForce3x3)->Unit(benchmark::kMillisecond);

void BM_SampleChannel(benchmark::State& state) {
  const auto scn = load_scenario(SLICING_BASELINE_CFG);
  int t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_channel(scn, t++ % scn.horizon_slots));
}
BENCHMARK(BM_SampleChannel);

void BM_Mm1Simulation(benchmark::State& state) {
  for (auto _ : state) {
    auto rng = make_stream(1, StreamPurpose::Traffic);
    benchmark::DoNotOptimize(simulate_mm1_tail({2e6, 1e6, 1e4, 0.01}, 100'000, rng));
  }
}
BENCHMARK(BM_Mm1Simulation)->Unit(benchmark::kMillisecond);

void BM_EngineStep(benchmark::State& state) {
  auto rc = load_run_config(SLICING_BASELINE_CFG);
  rc.controller.linearization = static_cast<LinearizationMode>(state.range(0));
  auto st = initial_state(rc.scenario, rc.controller);
  int t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(step(rc.scenario, rc.controller, rc.engine, st, t));
    if (++t == rc.scenario.horizon_slots) {
      t = 0;
      st = initial_state(rc.scenario, rc.controller);
    }
  }
}
BENCHMARK(BM_EngineStep)
    ->Arg(static_cast<int>(LinearizationMode::FixedPoint))
    ->Arg(static_cast<int>(LinearizationMode::TargetRate))
    ->Unit(benchmark::kMicrosecond);

void BM_FullRun(benchmark::State& state) {
  const auto rc = load_run_config(SLICING_BASELINE_CFG);
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(rc));
}
BENCHMARK(BM_FullRun)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
