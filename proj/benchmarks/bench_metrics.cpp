#include <benchmark/benchmark.h>

#include <random>

#include "trajbench/metrics.hpp"

using namespace trajbench;

namespace {

Path random_path(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 3.0);
  Path p;
  for (std::size_t i = 0; i < n; ++i) p.emplace_back(g(rng), g(rng));
  return p;
}

void BM_TopKAde(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Path gt = random_path(rng, 12);
  SampleSet s;
  for (int k = 0; k < state.range(0); ++k) s.samples.push_back(random_path(rng, 12));
  for (auto _ : state) benchmark::DoNotOptimize(top_k_ade(s, gt));
}

void BM_MixtureNlp(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Path gt = random_path(rng, 12);
  GaussianMixtureSequence m;
  for (int k = 0; k < state.range(0); ++k) {
    m.weights.push_back(1.0 / static_cast<double>(state.range(0)));
    m.modes.emplace_back();
    for (const auto& p : random_path(rng, 12)) m.modes.back().push_back({p, Mat2::Identity()});
  }
  for (auto _ : state) benchmark::DoNotOptimize(nlp(m, gt));
}

}  // namespace

BENCHMARK(BM_TopKAde)->Arg(1)->Arg(20);
BENCHMARK(BM_MixtureNlp)->Arg(1)->Arg(5);
