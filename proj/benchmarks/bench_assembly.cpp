#include <benchmark/benchmark.h>

#include "sdtf/fem.hpp"
#include "sdtf/mesh.hpp"

namespace {

const sdtf::Rect kFluid{0.0, 1.0, 1.0, 2.0};
const sdtf::Rect kPorous{0.0, 0.0, 1.0, 1.0};

void BM_AssembleMass(benchmark::State& state) {
    const auto nx = static_cast<std::size_t>(state.range(0));
    const auto mesh = sdtf::build_rect_union(kFluid, kPorous, nx, nx, nx);
    const sdtf::FiniteElementSpace space(mesh, sdtf::Region::fluid, 2, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sdtf::assemble_mass(space));
    }
    state.SetItemsProcessed(state.iterations() * space.n_elements());
}
BENCHMARK(BM_AssembleMass)->Arg(8)->Arg(16)->Arg(32);

void BM_AssembleStiffness(benchmark::State& state) {
    const auto nx = static_cast<std::size_t>(state.range(0));
    const auto mesh = sdtf::build_rect_union(kFluid, kPorous, nx, nx, nx);
    const sdtf::FiniteElementSpace space(mesh, sdtf::Region::porous, 2, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sdtf::assemble_stiffness_tensor(space, {2.0, 0.5, 0.5, 1.0}));
    }
    state.SetItemsProcessed(state.iterations() * space.n_elements());
}
BENCHMARK(BM_AssembleStiffness)->Arg(8)->Arg(16)->Arg(32);

void BM_BuildRectUnion(benchmark::State& state) {
    const auto nx = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sdtf::build_rect_union(kFluid, kPorous, nx, nx, nx));
    }
}
BENCHMARK(BM_BuildRectUnion)->Arg(16)->Arg(64);

}  // namespace
