#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "loco/headless.hpp"

namespace {

// One 100 Hz host tick against the default city, walls included.
void BM_PipelineTick(benchmark::State& state) {
  const auto map = std::make_shared<const loco::CityMap>(loco::default_city_map());
  loco::Pipeline p(map, {}, loco::Session(*map, "P01", loco::Condition::Scooter, 1));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto _ : state) {
    auto r = p.tick(loco::NormalizedInput::make(u(rng), u(rng), loco::InputSource::Scooter, 0), 0.01);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PipelineTick);

void BM_PilotSession(benchmark::State& state) {
  const auto map = loco::default_city_map();
  for (auto _ : state) {
    auto r = loco::run_pilot_session(map, {}, {});
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_PilotSession)->Unit(benchmark::kMillisecond);

}  // namespace
