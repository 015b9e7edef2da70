#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "riesne/dataset.hpp"

namespace riesne {

/// Diffusion time and manifold dimension of a Brownian-motion heat kernel.
struct BrownianParams {
    double t = 1.0;
    std::size_t dim = 1;
};

/// Log of the first-order heat-kernel density
/// (2 pi t)^{-D/2} * h0_ratio * exp(-distance^2 / (2t)).
double log_bm_similarity(double distance, double h0_ratio, const BrownianParams& params);

/// exp(log_bm_similarity). Returns 0 when the density underflows.
double bm_similarity(double distance, double h0_ratio, const BrownianParams& params);

/// Per-point log volume densities of a dataset.
Eigen::VectorXd log_volume_densities(const DatasetTable& data);

/// Volume ratios H0[i,j] = exp(lambda_i - lambda_j) with lambda the log volume
/// density, so H0[i,j] * H0[j,i] = 1.
Eigen::MatrixXd h0_matrix(const DatasetTable& data);

/// Maximum number of bisection steps per row.
inline constexpr int kCalibrationSteps = 100;
/// Tolerance on |H(P_i) - log2(perplexity)|, in bits.
inline constexpr double kPerplexityTolerance = 1e-5;
/// Floor applied to P entries inside the KL cost and gradient.
inline constexpr double kProbabilityFloor = 1e-12;

/// One row of conditional probabilities p_{.|i} and its diffusion time.
struct CalibratedRow {
    std::size_t row_index = 0;
    /// Dataset indices of the entries of `probs`.
    std::vector<std::size_t> indices;
    std::vector<double> probs;
    double t = 1.0;
    double entropy_bits = 0.0;
    double achieved_perplexity = 1.0;
    bool converged = false;
    int steps = 0;
};

/// Fits the diffusion time of one row to a target perplexity by the
/// doubling/halving then bisection search, starting from t = 1.
///
/// `distances` and `h0` run over candidate neighbors. The entry at
/// `self_index`, if given, is excluded and gets probability 0, as do entries
/// with non-finite distance. `indices` in the result are positions in the
/// input arrays.
CalibratedRow calibrate_row(std::span<const double> distances, std::span<const double> h0, std::size_t dim,
                            double target_perplexity, std::optional<std::size_t> self_index = std::nullopt);

enum class AffinityKind { JointP, JointQ };

/// Symmetric joint distribution over point pairs, stored dense or sparse.
class AffinityMatrix {
public:
    using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    AffinityMatrix() = default;
    AffinityMatrix(Eigen::MatrixXd dense, AffinityKind kind);
    AffinityMatrix(Sparse sparse, AffinityKind kind);

    std::size_t n() const { return n_; }
    AffinityKind kind() const { return kind_; }
    bool is_sparse() const { return sparse_; }

    double value(std::size_t i, std::size_t j) const;
    double total() const;
    Eigen::MatrixXd to_dense() const;

    const Eigen::MatrixXd& dense() const { return dense_; }
    const Sparse& sparse() const { return sparse_storage_; }

    /// Calls f(j, p_ij) for every stored off-diagonal entry of row i. Dense
    /// storage visits all j != i.
    template <class F>
    void for_each_in_row(std::size_t i, F&& f) const {
        if (sparse_) {
            for (Sparse::InnerIterator it(sparse_storage_, static_cast<Eigen::Index>(i)); it; ++it) {
                const auto j = static_cast<std::size_t>(it.col());
                if (j != i) f(j, it.value());
            }
        } else {
            for (std::size_t j = 0; j < n_; ++j) {
                if (j != i) f(j, dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
        }
    }

private:
    std::size_t n_ = 0;
    AffinityKind kind_ = AffinityKind::JointP;
    bool sparse_ = false;
    Eigen::MatrixXd dense_;
    Sparse sparse_storage_;
};

enum class PMode { Dense, Sparse };

/// Number of neighbors kept per row by the sparse path, floor(3 * perplexity).
std::size_t sparse_neighbor_count(double perplexity);

/// How the volume ratio H0 enters the row similarities. `Chart` uses
/// exp(lambda_i - lambda_j) from log_volume_density. `Uniform` sets every
/// ratio to 1, i.e. densities with respect to the Riemannian volume, which is
/// homogeneous on all supported manifolds. For SPD(n) with large n the chart
/// ratios scale like det^{(n+1)/2} and can cap the reachable perplexity.
enum class VolumeRatio { Chart, Uniform };

std::string to_string(VolumeRatio v);
VolumeRatio parse_volume_ratio(const std::string& name);

struct BuildOptions {
    std::uint64_t seed = 42;
    int threads = 1;
    VolumeRatio volume_ratio = VolumeRatio::Chart;
};

/// Calibration summary for one row of P.
struct RowFit {
    double t = 1.0;
    double achieved_perplexity = 1.0;
    bool converged = false;
    int steps = 0;
};

struct AffinityBuild {
    AffinityMatrix p;
    std::vector<RowFit> rows;
    std::size_t unconverged = 0;
};

/// Symmetrized joint P from per-row calibrated conditionals:
/// p_ij = (p_{j|i} + p_{i|j}) / (2n).
///
/// Dense mode uses all pairwise distances; sparse mode restricts each row to
/// its floor(3 * perplexity) nearest neighbors found with a VP-tree.
AffinityBuild build_p(const DatasetTable& data, double perplexity, PMode mode, const BuildOptions& options = {});

/// Symmetrizes a set of calibrated rows into a joint distribution.
AffinityMatrix symmetrize(std::span<const CalibratedRow> rows, std::size_t n, bool sparse);

}  // namespace riesne
