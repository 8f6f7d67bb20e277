#include <benchmark/benchmark.h>

#include "sdtf/scenarios.hpp"

namespace {

// One filtered step at a cached factorization: the steady-state cost of a
// constant-step run.
void BM_DecoupledStepCached(benchmark::State& state) {
    const auto nx = static_cast<std::size_t>(state.range(0));
    auto problem = sdtf::make_mms_problem(sdtf::PhysicalParams::isotropic(1, 1, 1, 1, 1),
                                          {2, 1, 2}, nx);
    const double k = 0.05;
    const auto seed = sdtf::exact_seed_history(*problem.model, problem.exact, 0.0,
                                               sdtf::constant_schedule(k).k_next, 3);
    sdtf::step_once(*problem.model, sdtf::SchemeKind::bdf2_tf, seed, k);  // warm the cache
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            sdtf::step_once(*problem.model, sdtf::SchemeKind::bdf2_tf, seed, k));
    }
}
BENCHMARK(BM_DecoupledStepCached)->Arg(8)->Arg(16);

void BM_StokesFactorization(benchmark::State& state) {
    const auto nx = static_cast<std::size_t>(state.range(0));
    auto problem = sdtf::make_mms_problem(sdtf::PhysicalParams::isotropic(1, 1, 1, 1, 1),
                                          {2, 1, 2}, nx);
    const auto seed = sdtf::exact_seed_history(*problem.model, problem.exact, 0.0,
                                               sdtf::constant_schedule(0.05).k_next, 3);
    double k = 0.05;
    for (auto _ : state) {
        // A fresh k each iteration forces a refactorization.
        k += 1e-7;
        benchmark::DoNotOptimize(
            sdtf::step_once(*problem.model, sdtf::SchemeKind::bdf2_tf, seed, k));
    }
}
BENCHMARK(BM_StokesFactorization)->Arg(8)->Arg(16);

}  // namespace
