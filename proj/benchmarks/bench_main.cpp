#include "cran/algorithms.hpp"

#include <benchmark/benchmark.h>

using namespace cran;

namespace {

struct Fixture {
  Scenario scenario;
  ChannelRealization ch;
};

// First all-active-feasible homogeneous draw at 8 dB.
Fixture feasible_draw(int num_aps, int num_mus) {
  const auto cfg = NetworkConfig::homogeneous(num_aps, num_mus, 8.0, 8.0);
  for (std::uint64_t t = 0;; ++t) {
    Fixture f{generate_scenario(cfg, derive_seed(7, t, 0)), {}};
    f.ch = sample_channel(f.scenario, derive_seed(7, t, 1));
    if (check_joint_feasibility(f.ch, cfg, all_aps(num_aps), fixed_point_options(cfg)).feasible()) return f;
  }
}

void BM_FixedPoint(benchmark::State& state) {
  const auto f = feasible_draw(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto& c = f.scenario.config;
  for (auto _ : state)
    benchmark::DoNotOptimize(ul_fixed_point_power(f.ch, c.qos_ul, c.noise_power, all_aps(c.num_aps)));
}
BENCHMARK(BM_FixedPoint)->Args({4, 3})->Args({6, 4})->Args({10, 8})->Unit(benchmark::kMicrosecond);

void BM_SolveP5(benchmark::State& state) {
  const auto f = feasible_draw(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto& c = f.scenario.config;
  const auto prog = build_p5(f.ch, c, Eigen::VectorXd::Ones(c.num_aps), Penalty::l12, all_aps(c.num_aps));
  for (auto _ : state) benchmark::DoNotOptimize(solve_program(prog));
}
BENCHMARK(BM_SolveP5)->Args({4, 3})->Args({6, 4})->Args({10, 8})->Unit(benchmark::kMillisecond);

void BM_Gso(benchmark::State& state) {
  const auto f = feasible_draw(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(algorithm_gso(f.scenario, f.ch));
}
BENCHMARK(BM_Gso)->Args({4, 3})->Args({6, 4})->Unit(benchmark::kMillisecond);

void BM_Rip(benchmark::State& state) {
  const auto f = feasible_draw(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(algorithm_rip(f.scenario, f.ch));
}
BENCHMARK(BM_Rip)->Args({4, 3})->Args({6, 4})->Unit(benchmark::kMillisecond);

void BM_ExhaustiveSearch(benchmark::State& state) {
  const auto f = feasible_draw(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(exhaustive_search(f.scenario, f.ch));
}
BENCHMARK(BM_ExhaustiveSearch)->Args({4, 3})->Args({6, 4})->Unit(benchmark::kMillisecond);

}  // namespace
