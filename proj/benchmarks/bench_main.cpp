#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "mfp/approx_profile.hpp"
#include "mfp/bench.hpp"
#include "mfp/corridor.hpp"
#include "mfp/multi_future_qp.hpp"
#include "mfp/planner.hpp"
#include "mfp/scenario.hpp"

namespace {

void BM_ApproxProfileRandom(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(7);
  std::vector<mfp::BoundPair> inputs;
  for (int i = 0; i < 32; ++i) inputs.push_back(mfp::obstacle_bounds(steps, k, rng));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& b = inputs[i++ % inputs.size()];
    benchmark::DoNotOptimize(mfp::approximate_profile(b.lb, b.ub, b.start));
  }
}
BENCHMARK(BM_ApproxProfileRandom)
    ->Args({100, 5})
    ->Args({200, 5})
    ->Args({1000, 5})
    ->Args({1000, 16});

void BM_ApproxProfileStaircase(benchmark::State& state) {
  const auto b = mfp::staircase_bounds(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfp::approximate_profile(b.lb, b.ub, b.start));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ApproxProfileStaircase)->RangeMultiplier(2)->Range(64, 512)
    ->Complexity();

void BM_EnumerateCorridors(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const mfp::Limits limits;
  const auto obs = mfp::staircase_obstacles(k, 0.25, 80);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfp::enumerate_corridors(obs, limits, 0.25, 80));
  }
}
BENCHMARK(BM_EnumerateCorridors)->DenseRange(2, 8, 2);

void BM_SolvePedestrianQp(benchmark::State& state) {
  const auto spec =
      mfp::load_scenario(std::string(MFP_SCENARIO_DIR) + "/pedestrian.json");
  const auto futures = spec.joint_futures();
  std::vector<mfp::Corridor> corridors;
  std::vector<double> p;
  for (const auto& f : futures) {
    corridors.push_back(mfp::enumerate_corridors(f.obstacles, spec.limits,
                                                 spec.dt, spec.horizon_steps)
                            .front());
    p.push_back(f.probability);
  }
  const auto problem =
      mfp::build_qp(corridors, p, static_cast<std::size_t>(state.range(0)),
                    spec.ego, spec.limits, spec.dt, mfp::CostWeights{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfp::solve_qp(problem));
  }
}
BENCHMARK(BM_SolvePedestrianQp)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_PlanCycle(benchmark::State& state) {
  const char* names[] = {"pedestrian.json", "five_agents.json",
                         "greedy_two_decisions.json", "staircase_k4.json"};
  const auto spec = mfp::load_scenario(std::string(MFP_SCENARIO_DIR) + "/" +
                                       names[state.range(0)]);
  mfp::PlanningSnapshot snap;
  snap.ego = spec.ego;
  snap.limits = spec.limits;
  snap.dt = spec.dt;
  snap.horizon_steps = spec.horizon_steps;
  snap.futures = spec.joint_futures();
  mfp::PlannerConfig config;
  config.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfp::plan(snap, config));
  }
  state.SetLabel(names[state.range(0)]);
}
BENCHMARK(BM_PlanCycle)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
