#include <benchmark/benchmark.h>

#include "anytime/controller.hpp"
#include "anytime/plant.hpp"

namespace {

using namespace anytime;

void BM_TentativeSequence(benchmark::State& state) {
    const auto plant = make_builtin_plant("sat_2d");
    const Vector x = Vector::Ones(2);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(tentative_sequence(plant, x, n));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TentativeSequence)->Arg(1)->Arg(4)->Arg(16);

// Cycles N through 0..capacity so every branch of the update runs.
void BM_ControllerStep(benchmark::State& state) {
    const auto kind = static_cast<ControllerKind>(state.range(0));
    const auto plant = make_builtin_plant("cubic_scalar");
    constexpr int kCapacity = 4;
    Controller controller(ControllerSpec{kind, std::nullopt}, plant, kCapacity);
    const Vector x = Vector::Constant(1, 0.5);
    int n = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(controller.step(x, n));
        n = (n + 1) % (kCapacity + 1);
    }
    state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_ControllerStep)
    ->Arg(static_cast<int>(ControllerKind::baseline))
    ->Arg(static_cast<int>(ControllerKind::a1))
    ->Arg(static_cast<int>(ControllerKind::a2));

}  // namespace
