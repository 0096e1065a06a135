#include <benchmark/benchmark.h>

#include "abbias/analytic.hpp"
#include "abbias/estimators.hpp"
#include "abbias/simulate.hpp"

using namespace abbias;

namespace {

PanelDataset make_panel(int users_per_arm, int k) {
  BehaviorModel model = example1_model();
  auto population = sample_population(model, users_per_arm, users_per_arm, 17);
  return generate_panel(population, model, k, 18);
}

void BM_GeneratePanel(benchmark::State& state) {
  BehaviorModel model = example1_model();
  auto population = sample_population(model, 1000, 1000, 17);
  for (auto _ : state) {
    PanelDataset panel = generate_panel(population, model, 14, 18);
    benchmark::DoNotOptimize(panel.rows.data());
  }
}
BENCHMARK(BM_GeneratePanel);

void BM_Naive(benchmark::State& state) {
  PanelDataset panel = make_panel(1000, 14);
  for (auto _ : state)
    benchmark::DoNotOptimize(naive_scaled(panel).point);
}
BENCHMARK(BM_Naive);

void BM_Jackknife(benchmark::State& state) {
  PanelDataset panel = make_panel(1000, 14);
  for (auto _ : state)
    benchmark::DoNotOptimize(jackknife_adjusted(panel).point);
}
BENCHMARK(BM_Jackknife);

void BM_BlockBootstrap(benchmark::State& state) {
  PanelDataset panel = make_panel(1000, 14);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        block_bootstrap_adjusted(panel, 100, 1, 7).point);
}
BENCHMARK(BM_BlockBootstrap);

void BM_ExpectedNaive(benchmark::State& state) {
  BehaviorModel model;
  model.activity = BetaDist{2.0, 3.0};
  model.effect = Polynomial{0.0, 1.0};
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_expected_naive(model, k));
}
BENCHMARK(BM_ExpectedNaive)->Arg(14)->Arg(200)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
