#include <benchmark/benchmark.h>

#include "anytime/processor.hpp"
#include "anytime/stability.hpp"

namespace {

using namespace anytime;

MarkovAvailability uniform_chain(int states, int lengths) {
    MarkovAvailability m;
    m.transition = Eigen::MatrixXd::Constant(states, states, 1.0 / states);
    m.conditional.resize(states, lengths + 1);
    for (int s = 0; s < states; ++s) {
        const double p0 = 0.1 + 0.3 * s / std::max(1, states - 1);
        m.conditional(s, 0) = p0;
        for (int l = 1; l <= lengths; ++l) m.conditional(s, l) = (1.0 - p0) / lengths;
    }
    return m;
}

void BM_A1Margin(benchmark::State& state) {
    const auto model = from_execution_time(0.23);
    for (auto _ : state) benchmark::DoNotOptimize(a1_margin(model, 0.5, 1.618));
}
BENCHMARK(BM_A1Margin);

void BM_Upsilon(benchmark::State& state) {
    const auto model = uniform_chain(static_cast<int>(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(upsilon(model, 0.5, 1.2));
}
BENCHMARK(BM_Upsilon)->Arg(2)->Arg(8)->Arg(32);

void BM_EvaluateMarkov(benchmark::State& state) {
    const CertificateInputs inputs{0.5, 1.2, uniform_chain(static_cast<int>(state.range(0)), 4)};
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(inputs));
}
BENCHMARK(BM_EvaluateMarkov)->Arg(2)->Arg(8)->Arg(32);

}  // namespace
