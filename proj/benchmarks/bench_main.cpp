#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "fairtree/dataset.hpp"
#include "fairtree/forest.hpp"
#include "fairtree/metrics.hpp"
#include "fairtree/rng.hpp"
#include "fairtree/synthetic.hpp"
#include "fairtree/tree.hpp"

using namespace fairtree;

namespace {

std::vector<double> random_scores(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> z(n);
  for (auto& v : z) v = rng.uniform();
  return z;
}

std::vector<std::uint8_t> random_labels(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> y(n);
  for (auto& b : y) b = rng.uniform() < 0.5 ? 1 : 0;
  return y;
}

Dataset bench_dataset(std::size_t n) {
  SyntheticConfig config;
  config.n = n;
  config.seed = 7;
  return generate_synthetic(config, 32);
}

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto z = random_scores(n, 1);
  const auto y = random_labels(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(auc(z, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auc)->Range(1 << 8, 1 << 16)->Complexity(benchmark::oNLogN);

void BM_SensitiveAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto z = random_scores(n, 3);
  const auto mask = random_labels(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(sensitive_auc(z, mask));
}
BENCHMARK(BM_SensitiveAuc)->Range(1 << 8, 1 << 14);

void BM_EvaluateSplit(benchmark::State& state) {
  const Dataset ds = bench_dataset(static_cast<std::size_t>(state.range(0)));
  std::vector<std::size_t> rows(ds.n());
  std::iota(rows.begin(), rows.end(), 0);
  const SplitCandidate candidate{0, ds.n_bins[0] / 2};
  const SplitCriterion criterion{CriterionKind::Scaff, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_split(candidate, rows, ds, criterion));
}
BENCHMARK(BM_EvaluateSplit)->Range(1 << 9, 1 << 13);

void BM_GrowTree(benchmark::State& state) {
  const Dataset ds = bench_dataset(2000);
  std::vector<std::size_t> rows(ds.n());
  std::iota(rows.begin(), rows.end(), 0);
  TreeConfig config;
  config.criterion = SplitCriterion{CriterionKind::Scaff, 0.5};
  config.max_depth = static_cast<int>(state.range(0));
  config.seed = 11;
  for (auto _ : state) benchmark::DoNotOptimize(grow(ds, rows, config));
}
BENCHMARK(BM_GrowTree)->Arg(2)->Arg(4)->Arg(6);

void BM_FitForest(benchmark::State& state) {
  const Dataset ds = bench_dataset(1000);
  ForestConfig config;
  config.n_trees = static_cast<int>(state.range(0));
  config.n_threads = 1;
  config.seed = 13;
  config.tree.criterion = SplitCriterion{CriterionKind::Scaff, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(fit(ds, config));
}
BENCHMARK(BM_FitForest)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
