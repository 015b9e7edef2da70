#include <benchmark/benchmark.h>

#include "riesne/neighbors.hpp"
#include "riesne/synthetic.hpp"

using namespace riesne;

namespace {

ManifoldDescriptor family(int which) {
    switch (which) {
        case 0: return ManifoldDescriptor::euclidean(10);
        case 1: return ManifoldDescriptor::sphere(10);
        default: return ManifoldDescriptor::spd(4);
    }
}

void BM_VpTreeBuild(benchmark::State& st) {
    const auto data = synthetic::random_points(family(static_cast<int>(st.range(0))), static_cast<std::size_t>(st.range(1)), 1);
    for (auto _ : st) benchmark::DoNotOptimize(VpTree(data, 7).nodes().size());
    st.SetLabel(describe(data.manifold));
}
BENCHMARK(BM_VpTreeBuild)->ArgsProduct({{0, 1, 2}, {1000, 5000}})->Unit(benchmark::kMillisecond);

void BM_VpTreeQueryAll(benchmark::State& st) {
    const auto data = synthetic::random_points(family(static_cast<int>(st.range(0))), 2000, 2);
    const VpTree tree(data, 7);
    for (auto _ : st) benchmark::DoNotOptimize(tree.query_all(static_cast<std::size_t>(st.range(1))).size());
    st.SetLabel(describe(data.manifold));
}
BENCHMARK(BM_VpTreeQueryAll)->ArgsProduct({{0, 1, 2}, {10, 90}})->Unit(benchmark::kMillisecond);

void BM_BruteKnn(benchmark::State& st) {
    const auto data = synthetic::random_points(family(static_cast<int>(st.range(0))), 2000, 2);
    for (auto _ : st) benchmark::DoNotOptimize(brute_knn(data, 90).size());
    st.SetLabel(describe(data.manifold));
}
BENCHMARK(BM_BruteKnn)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
