#include <benchmark/benchmark.h>

#include "sdtf/time_integration.hpp"

namespace {

void BM_VariableStepCoefficients(benchmark::State& state) {
    double tau = 0.7;
    for (auto _ : state) {
        const auto c = sdtf::variable_step_coefficients(tau, 1.1 - tau * 0.1);
        benchmark::DoNotOptimize(c.beta3 - c.beta2 - c.beta1);
        tau = tau < 1.0 ? tau + 1e-6 : 0.7;
    }
}
BENCHMARK(BM_VariableStepCoefficients);

void BM_TimeFilter(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    sdtf::StepHistory history(6);
    for (int i = 0; i < 4; ++i) {
        history.push(0.05 * i, sdtf::Vector::Random(n));
    }
    const sdtf::Vector hat = sdtf::Vector::Random(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sdtf::time_filter(hat, 0.2, history, 3));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TimeFilter)->Arg(1 << 10)->Arg(1 << 14);

}  // namespace
