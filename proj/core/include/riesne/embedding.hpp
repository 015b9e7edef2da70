#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "riesne/affinity.hpp"
#include "riesne/dataset.hpp"

namespace riesne {

enum class SimilarityFamily { StudentT, VonMisesFisher, Brownian };

std::string to_string(SimilarityFamily family);
SimilarityFamily parse_similarity_family(const std::string& name);

/// Low-dimensional manifold and the similarity used on it. Student-t needs a
/// Euclidean target and von Mises-Fisher a sphere; the Brownian kernel (t = 1)
/// works on Euclidean and sphere targets.
struct TargetSpace {
    ManifoldDescriptor descriptor;
    SimilarityFamily family = SimilarityFamily::StudentT;

    void validate() const;
};

/// Embedding coordinates, one row per point, plus the momentum buffer.
struct EmbeddingState {
    ManifoldDescriptor descriptor;
    Eigen::MatrixXd points;
    Eigen::MatrixXd velocity;
    int iteration = 0;
    bool exaggeration_active = false;

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    ManifoldPoint point(std::size_t i) const;
    DatasetTable to_table() const;
};

enum class GradientMethod { Exact, BarnesHut };
enum class SphereStep { Retraction, ExpMap };

struct OptimizerConfig {
    int iters = 1000;
    double learning_rate = 200.0;
    double momentum_early = 0.5;
    double momentum_late = 0.8;
    double exaggeration_factor = 12.0;
    int exaggeration_iters = 250;
    double bh_theta = 0.5;
    GradientMethod gradient = GradientMethod::Exact;
    /// Project-then-normalize retraction, or the exact exponential map.
    SphereStep sphere_step = SphereStep::Retraction;
    std::uint64_t seed = 42;
    int threads = 1;
    /// KL is recorded every `kl_interval` iterations, plus the first and last.
    int kl_interval = 50;

    void validate() const;
};

struct KlRecord {
    int iteration = 0;
    double kl = 0.0;
};

struct OptimizeResult {
    EmbeddingState state;
    std::vector<KlRecord> kl_history;
};

/// Unnormalized low-dimensional similarity; constants that cancel in the row
/// normalization are dropped for student-t and von Mises-Fisher.
double s_low(const ManifoldPoint& yi, const ManifoldPoint& yj, const TargetSpace& target);

/// Row-normalized then symmetrized low-dimensional joint distribution,
/// q_ij = (q_{j|i} + q_{i|j}) / (2n).
AffinityMatrix build_q(const EmbeddingState& state, const TargetSpace& target);

/// KL(P || Q) over P's stored entries, with P floored at kProbabilityFloor.
double kl_cost(const AffinityMatrix& p, const AffinityMatrix& q);

/// KL(P || Q(state)) without materializing Q. `p_scale` multiplies P.
double kl_cost(const AffinityMatrix& p, const EmbeddingState& state, const TargetSpace& target, double p_scale = 1.0);

/// Exact gradient of the KL cost with respect to the embedding coordinates.
/// Rows for sphere targets are projected onto the tangent space at each point.
Eigen::MatrixXd kl_gradient_exact(const AffinityMatrix& p, const EmbeddingState& state, const TargetSpace& target,
                                  double p_scale = 1.0, int threads = 1);

/// Barnes-Hut approximation of kl_gradient_exact for student-t similarities
/// on R^2 or R^3. Cells of diameter r at distance D from a point are replaced
/// by their centroid when r < theta * D.
Eigen::MatrixXd kl_gradient_bh(const AffinityMatrix& p, const EmbeddingState& state, const TargetSpace& target,
                               double theta, double p_scale = 1.0, int threads = 1);

/// Seeded initialization: N(0, 1e-4^2) per coordinate for Euclidean targets,
/// uniform on the sphere for sphere targets.
EmbeddingState init_embedding(std::size_t n, const TargetSpace& target, std::uint64_t seed);

/// Momentum gradient descent with early exaggeration.
OptimizeResult optimize(const AffinityMatrix& p, const TargetSpace& target, const OptimizerConfig& config,
                        std::optional<EmbeddingState> initial = std::nullopt);

}  // namespace riesne
