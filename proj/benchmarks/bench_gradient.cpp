#include <benchmark/benchmark.h>

#include "riesne/affinity.hpp"
#include "riesne/embedding.hpp"
#include "riesne/synthetic.hpp"

using namespace riesne;

namespace {

struct Fixture {
    AffinityMatrix p;
    EmbeddingState state;
};

// Two planar blobs used both as input data and as the embedding state.
Fixture blobs(std::size_t n) {
    const auto data = synthetic::two_blobs(n, 2, 8.0, 5);
    EmbeddingState s;
    s.descriptor = data.manifold;
    s.points.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) s.points.row(static_cast<Eigen::Index>(i)) = data.points[i].coords.transpose();
    s.velocity = Eigen::MatrixXd::Zero(s.points.rows(), 2);
    return {build_p(data, 30.0, PMode::Sparse).p, std::move(s)};
}

const TargetSpace kStudent{ManifoldDescriptor::euclidean(2), SimilarityFamily::StudentT};

void BM_GradientExact(benchmark::State& st) {
    const auto f = blobs(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kl_gradient_exact(f.p, f.state, kStudent).data());
}
BENCHMARK(BM_GradientExact)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_GradientBarnesHut(benchmark::State& st) {
    const auto f = blobs(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kl_gradient_bh(f.p, f.state, kStudent, 0.5).data());
}
BENCHMARK(BM_GradientBarnesHut)->Arg(1000)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_GradientExactSphere(benchmark::State& st) {
    const TargetSpace target{ManifoldDescriptor::sphere(3), st.range(1) == 0 ? SimilarityFamily::VonMisesFisher
                                                                               : SimilarityFamily::Brownian};
    const auto data = synthetic::random_points(ManifoldDescriptor::euclidean(5), static_cast<std::size_t>(st.range(0)), 6);
    const auto p = build_p(data, 30.0, PMode::Dense).p;
    const auto state = init_embedding(data.size(), target, 7);
    for (auto _ : st) benchmark::DoNotOptimize(kl_gradient_exact(p, state, target).data());
    st.SetLabel(to_string(target.family));
}
BENCHMARK(BM_GradientExactSphere)->ArgsProduct({{1000}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace
