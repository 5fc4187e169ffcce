#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "loco/analysis.hpp"

namespace {

std::vector<double> normal_sample(std::size_t n) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = d(rng);
  return xs;
}

void BM_ShapiroWilk(benchmark::State& state) {
  const auto xs = normal_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loco::analysis::shapiro_wilk(xs));
}
BENCHMARK(BM_ShapiroWilk)->Arg(14)->Arg(100)->Arg(5000);

void BM_WilcoxonExact(benchmark::State& state) {
  const auto xs = normal_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loco::analysis::wilcoxon_signed_rank(xs));
}
BENCHMARK(BM_WilcoxonExact)->Arg(14)->Arg(25);

void BM_SelectTest(benchmark::State& state) {
  loco::analysis::PairedSample s;
  s.values_a = normal_sample(14);
  s.values_b.assign(14, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(loco::analysis::select_test(s, "completion_time_s"));
}
BENCHMARK(BM_SelectTest);

}  // namespace

BENCHMARK_MAIN();
