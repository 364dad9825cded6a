#include <benchmark/benchmark.h>

#include <numbers>
#include <random>
#include <vector>

#include "hetcache/analytics.hpp"
#include "hetcache/optimizer.hpp"
#include "hetcache/simulator.hpp"
#include "hetcache/specfun.hpp"

using namespace hetcache;

namespace {

NetworkConfig network(int max_tx) {
  NetworkConfig c;
  c.alpha = AlphaParams(4.0);
  c.theta = db_to_linear(3.0);
  c.max_tx = max_tx;
  c.tiers = {{1.0 / (std::numbers::pi * 250.0 * 250.0), 20.0, 25},
             {1.0 / (std::numbers::pi * 50.0 * 50.0), 0.13, 15}};
  c.catalog = Catalog::zipf(50, 0.8);
  return c;
}

void BM_Hyp2f1Neg(benchmark::State& state) {
  const AlphaParams a(4.0);
  const double theta = std::pow(10.0, static_cast<double>(state.range(0)) / 10.0);
  for (auto _ : state) {
    for (int i = 0; i <= 5; ++i) benchmark::DoNotOptimize(hyp2f1_neg(i, theta, a));
  }
}
BENCHMARK(BM_Hyp2f1Neg)->Arg(-30)->Arg(3)->Arg(30);

void BM_StpEvaluatorBuild(benchmark::State& state) {
  const auto c = network(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(StpEvaluator(c, 0.7));
}
BENCHMARK(BM_StpEvaluatorBuild)->DenseRange(1, 5, 2);

void BM_StpEvaluatorStatic(benchmark::State& state) {
  const auto c = network(static_cast<int>(state.range(0)));
  const StpEvaluator ev(c, 0.7);
  double s = 0.0;
  for (auto _ : state) {
    s = s >= 1.0 ? 0.01 : s + 0.01;
    benchmark::DoNotOptimize(ev.st(s));
  }
}
BENCHMARK(BM_StpEvaluatorStatic)->DenseRange(1, 5, 2);

void BM_ProjectCappedSimplex(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.5, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_capped_simplex(v, n / 3.0));
  state.SetComplexityN(n);
}
BENCHMARK(BM_ProjectCappedSimplex)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_OptimizeHm(benchmark::State& state) {
  const auto c = network(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(optimize_hm(c));
}
BENCHMARK(BM_OptimizeHm)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_AlternateOptimizeSt(benchmark::State& state) {
  const auto c = network(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(alternate_optimize_st(c));
}
BENCHMARK(BM_AlternateOptimizeSt)->Arg(2)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_SimulateStp(benchmark::State& state) {
  const auto c = network(3);
  const auto policy = optimize_hm(c).policy;
  SimParams p;
  p.window_side = 2000.0;
  p.n_realizations = state.range(0);
  p.scenario = Scenario::Static;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_stp(c, policy, DtxPolicy{0.7}, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateStp)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
