#include <array>

#include <benchmark/benchmark.h>

#include "mes/sweep.hpp"

namespace {

std::vector<mes::EpisodeJob> jobs() {
    mes::CampaignConfig cfg = mes::default_campaign();
    cfg.dt = 1e-4;
    const std::array<double, 2> k1{-450.0, -550.0};
    const std::array<double, 2> k2{-110.0, -140.0};
    const std::array<double, 2> k3{-24.0, -28.0};
    return mes::gain_grid(cfg, k1, k2, k3);
}

void BM_SweepSerial(benchmark::State& state) {
    const auto js = jobs();
    for (auto _ : state)
        benchmark::DoNotOptimize(mes::run_episodes_serial(js));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(js.size()));
}

void BM_SweepParallel(benchmark::State& state) {
    const auto js = jobs();
    for (auto _ : state)
        benchmark::DoNotOptimize(mes::run_episodes_parallel(js, static_cast<int>(state.range(0))));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(js.size()));
}

} // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
