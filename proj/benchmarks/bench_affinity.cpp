#include <benchmark/benchmark.h>

#include "riesne/affinity.hpp"
#include "riesne/synthetic.hpp"

using namespace riesne;

namespace {

const ManifoldDescriptor kManifolds[] = {ManifoldDescriptor::euclidean(10), ManifoldDescriptor::sphere(10),
                                         ManifoldDescriptor::spd(4)};

void BM_BuildPDense(benchmark::State& st) {
    const auto data = synthetic::random_points(kManifolds[st.range(0)], static_cast<std::size_t>(st.range(1)), 3);
    for (auto _ : st) benchmark::DoNotOptimize(build_p(data, 30.0, PMode::Dense).unconverged);
    st.SetLabel(describe(data.manifold));
}
BENCHMARK(BM_BuildPDense)->ArgsProduct({{0, 1, 2}, {500}})->Unit(benchmark::kMillisecond);

void BM_BuildPSparse(benchmark::State& st) {
    const auto data = synthetic::random_points(kManifolds[st.range(0)], static_cast<std::size_t>(st.range(1)), 3);
    for (auto _ : st) benchmark::DoNotOptimize(build_p(data, 30.0, PMode::Sparse).unconverged);
    st.SetLabel(describe(data.manifold));
}
BENCHMARK(BM_BuildPSparse)->ArgsProduct({{0, 1, 2}, {500, 5000}})->Unit(benchmark::kMillisecond);

}  // namespace
