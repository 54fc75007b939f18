#include <benchmark/benchmark.h>

#include "trajbench/predictors.hpp"
#include "trajbench/scenario.hpp"
#include "trajbench/synthetic.hpp"

using namespace trajbench;

namespace {

Scenario crowd(int agents) {
  LinearCrowdOptions o;
  o.agents = agents;
  o.frames = 20;
  o.spacing = 1.5;
  o.seed = 8;
  return extract_scenarios(linear_crowd_dataset(o), ScenarioSpec{}).front();
}

void BM_Cvm(benchmark::State& state) {
  const auto s = crowd(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(predict_cvm(s));
}

void BM_SocialForce(benchmark::State& state) {
  const auto s = crowd(static_cast<int>(state.range(0)));
  const SofParams p;
  for (auto _ : state) benchmark::DoNotOptimize(predict_social_force(s, p));
}

void BM_Karamouzas(benchmark::State& state) {
  const auto s = crowd(static_cast<int>(state.range(0)));
  const KaraParams p;
  for (auto _ : state) benchmark::DoNotOptimize(predict_karamouzas(s, p));
}

}  // namespace

BENCHMARK(BM_Cvm)->Arg(2)->Arg(20)->Arg(50);
BENCHMARK(BM_SocialForce)->Arg(2)->Arg(20)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Karamouzas)->Arg(2)->Arg(20)->Arg(50)->Unit(benchmark::kMicrosecond);
