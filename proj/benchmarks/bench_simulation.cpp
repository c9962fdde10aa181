#include <benchmark/benchmark.h>

#include "anytime/simulation.hpp"

namespace {

using namespace anytime;

SimConfig cubic_config(ControllerKind kind, int threads) {
    SimConfig c;
    c.plant = make_builtin_plant("cubic_scalar");
    c.disturbance = DisturbanceModel::uniform(1, 0.0, 0.01);
    c.availability = from_execution_time(0.2);
    c.controller.kind = kind;
    c.horizon = 1000;
    c.runs = 32;
    c.threads = threads;
    return c;
}

void BM_Episode(benchmark::State& state) {
    const auto config = cubic_config(static_cast<ControllerKind>(state.range(0)), 1);
    int run = 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_episode(config, run++));
    state.SetItemsProcessed(state.iterations() * config.horizon);
}
BENCHMARK(BM_Episode)
    ->Arg(static_cast<int>(ControllerKind::baseline))
    ->Arg(static_cast<int>(ControllerKind::a1))
    ->Arg(static_cast<int>(ControllerKind::a2));

void BM_MonteCarlo(benchmark::State& state) {
    const auto config = cubic_config(ControllerKind::a2, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(config));
    state.SetItemsProcessed(state.iterations() * config.runs * config.horizon);
}
BENCHMARK(BM_MonteCarlo)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace
