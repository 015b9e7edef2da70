#include "riesne/affinity.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "riesne/errors.hpp"
#include "riesne/neighbors.hpp"
#include "riesne/parallel.hpp"

namespace riesne {

double log_bm_similarity(double distance, double h0_ratio, const BrownianParams& params) {
    if (!(params.t > 0.0)) throw InvalidArgument("diffusion time must be positive");
    return -0.5 * static_cast<double>(params.dim) * std::log(2.0 * std::numbers::pi * params.t) + std::log(h0_ratio) -
           distance * distance / (2.0 * params.t);
}

double bm_similarity(double distance, double h0_ratio, const BrownianParams& params) {
    return std::exp(log_bm_similarity(distance, h0_ratio, params));
}

Eigen::VectorXd log_volume_densities(const DatasetTable& data) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) out[static_cast<Eigen::Index>(i)] = log_volume_density(data.points[i]);
    return out;
}

Eigen::MatrixXd h0_matrix(const DatasetTable& data) {
    const Eigen::VectorXd lam = log_volume_densities(data);
    const auto n = lam.size();
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) h(i, j) = i == j ? 1.0 : std::exp(lam[i] - lam[j]);
    }
    return h;
}

CalibratedRow calibrate_row(std::span<const double> distances, std::span<const double> h0, std::size_t dim,
                            double target_perplexity, std::optional<std::size_t> self_index) {
    if (distances.size() != h0.size()) throw InvalidArgument("distance and H0 rows differ in length");
    if (!(target_perplexity >= 1.0)) throw InvalidArgument("target perplexity must be at least 1");

    const std::size_t m = distances.size();
    std::vector<char> active(m, 0);
    std::size_t n_active = 0;
    for (std::size_t j = 0; j < m; ++j) {
        if (self_index && *self_index == j) continue;
        if (std::isfinite(distances[j]) && h0[j] > 0.0 && std::isfinite(h0[j])) {
            active[j] = 1;
            ++n_active;
        }
    }
    if (n_active == 0) throw NumericError("row has no finite neighbor entries");

    CalibratedRow row;
    row.indices.resize(m);
    for (std::size_t j = 0; j < m; ++j) row.indices[j] = j;
    row.probs.assign(m, 0.0);
    if (self_index) row.row_index = *self_index;

    const double target_bits = std::log2(target_perplexity);
    std::vector<double> logw(m, 0.0);
    double t = 1.0;
    double t_min = -std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity();

    for (int step = 0; step < kCalibrationSteps; ++step) {
        // Log-space similarities with per-row max subtraction before normalizing.
        const BrownianParams params{t, dim};
        double max_logw = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (!active[j]) continue;
            logw[j] = log_bm_similarity(distances[j], h0[j], params);
            max_logw = std::max(max_logw, logw[j]);
        }
        if (!std::isfinite(max_logw)) throw NumericError("all similarities underflow");
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (!active[j]) continue;
            row.probs[j] = std::exp(logw[j] - max_logw);
            sum += row.probs[j];
        }
        double weighted = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (!active[j]) continue;
            row.probs[j] /= sum;
            if (row.probs[j] != 0.0) weighted += row.probs[j] * (logw[j] - max_logw);
        }
        const double entropy = (std::log(sum) - weighted) / std::numbers::ln2;

        row.t = t;
        row.entropy_bits = entropy;
        row.steps = step + 1;
        const double diff = entropy - target_bits;
        if (std::abs(diff) <= kPerplexityTolerance) {
            row.converged = true;
            break;
        }
        if (diff < 0.0) {
            t_min = t;
            t = std::isinf(t_max) ? 2.0 * t : 0.5 * (t + t_max);
        } else {
            t_max = t;
            t = std::isinf(t_min) ? 0.5 * t : 0.5 * (t + t_min);
        }
    }
    row.achieved_perplexity = std::exp2(row.entropy_bits);
    return row;
}

AffinityMatrix::AffinityMatrix(Eigen::MatrixXd dense, AffinityKind kind)
    : n_(static_cast<std::size_t>(dense.rows())), kind_(kind), sparse_(false), dense_(std::move(dense)) {
    if (dense_.rows() != dense_.cols()) throw InvalidArgument("affinity matrix must be square");
}

AffinityMatrix::AffinityMatrix(Sparse sparse, AffinityKind kind)
    : n_(static_cast<std::size_t>(sparse.rows())), kind_(kind), sparse_(true), sparse_storage_(std::move(sparse)) {
    if (sparse_storage_.rows() != sparse_storage_.cols()) throw InvalidArgument("affinity matrix must be square");
    sparse_storage_.makeCompressed();
}

double AffinityMatrix::value(std::size_t i, std::size_t j) const {
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    return sparse_ ? sparse_storage_.coeff(a, b) : dense_(a, b);
}

double AffinityMatrix::total() const { return sparse_ ? sparse_storage_.sum() : dense_.sum(); }

Eigen::MatrixXd AffinityMatrix::to_dense() const { return sparse_ ? Eigen::MatrixXd(sparse_storage_) : dense_; }

std::string to_string(VolumeRatio v) { return v == VolumeRatio::Chart ? "chart" : "uniform"; }

VolumeRatio parse_volume_ratio(const std::string& name) {
    if (name == "chart") return VolumeRatio::Chart;
    if (name == "uniform") return VolumeRatio::Uniform;
    throw InvalidArgument("unknown volume ratio '" + name + "' (expected chart or uniform)");
}

std::size_t sparse_neighbor_count(double perplexity) { return static_cast<std::size_t>(std::floor(3.0 * perplexity)); }

AffinityMatrix symmetrize(std::span<const CalibratedRow> rows, std::size_t n, bool sparse) {
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    if (!sparse) {
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (const auto& row : rows) {
            const auto i = static_cast<Eigen::Index>(row.row_index);
            for (std::size_t e = 0; e < row.probs.size(); ++e) {
                const auto j = static_cast<Eigen::Index>(row.indices[e]);
                if (j == i) continue;
                p(i, j) += scale * row.probs[e];
                p(j, i) += scale * row.probs[e];
            }
        }
        return AffinityMatrix(std::move(p), AffinityKind::JointP);
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& row : rows) {
        for (std::size_t e = 0; e < row.probs.size(); ++e) {
            if (row.indices[e] == row.row_index) continue;
            const auto i = static_cast<int>(row.row_index), j = static_cast<int>(row.indices[e]);
            triplets.emplace_back(i, j, scale * row.probs[e]);
            triplets.emplace_back(j, i, scale * row.probs[e]);
        }
    }
    AffinityMatrix::Sparse p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    p.setFromTriplets(triplets.begin(), triplets.end());
    return AffinityMatrix(std::move(p), AffinityKind::JointP);
}

namespace {

template <class F>
CalibratedRow calibrate_in_row(std::size_t i, F&& f) {
    try {
        return f();
    } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (row " + std::to_string(i) + ")");
    }
}

}  // namespace

AffinityBuild build_p(const DatasetTable& data, double perplexity, PMode mode, const BuildOptions& options) {
    data.validate();
    const std::size_t n = data.size();
    if (n < 4) throw InvalidArgument("build_p needs at least 4 points");
    if (!(perplexity >= 1.0)) throw InvalidArgument("perplexity must be at least 1");
    const std::size_t dim = data.manifold.intrinsic_dim();
    const Eigen::VectorXd lam = options.volume_ratio == VolumeRatio::Chart
                                    ? log_volume_densities(data)
                                    : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

    std::vector<CalibratedRow> rows(n);
    if (mode == PMode::Dense) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        parallel_for(n, options.threads, [&](std::size_t i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    dist(data.manifold, data.points[i].coords, data.points[j].coords);
            }
        });
        d.triangularView<Eigen::StrictlyLower>() = d.transpose();
        parallel_for(n, options.threads, [&](std::size_t i) {
            const auto ii = static_cast<Eigen::Index>(i);
            std::vector<double> drow(n), hrow(n);
            for (std::size_t j = 0; j < n; ++j) {
                drow[j] = d(ii, static_cast<Eigen::Index>(j));
                hrow[j] = j == i ? 1.0 : std::exp(lam[ii] - lam[static_cast<Eigen::Index>(j)]);
            }
            rows[i] = calibrate_in_row(i, [&] { return calibrate_row(drow, hrow, dim, perplexity, i); });
        });
    } else {
        const std::size_t tau = sparse_neighbor_count(perplexity);
        if (tau < 1 || tau > n - 1) {
            throw InvalidArgument("sparse mode needs floor(3 * perplexity) in [1, n-1]; got " + std::to_string(tau) +
                                  " for n=" + std::to_string(n));
        }
        const VpTree tree(data, options.seed);
        parallel_for(n, options.threads, [&](std::size_t i) {
            const auto neighbors = tree.query(i, tau);
            const auto ii = static_cast<Eigen::Index>(i);
            std::vector<double> drow(tau), hrow(tau);
            for (std::size_t e = 0; e < tau; ++e) {
                drow[e] = neighbors[e].distance;
                hrow[e] = std::exp(lam[ii] - lam[static_cast<Eigen::Index>(neighbors[e].index)]);
            }
            CalibratedRow row = calibrate_in_row(i, [&] { return calibrate_row(drow, hrow, dim, perplexity); });
            row.row_index = i;
            for (std::size_t e = 0; e < tau; ++e) row.indices[e] = neighbors[e].index;
            rows[i] = std::move(row);
        });
    }

    AffinityBuild out;
    out.p = symmetrize(rows, n, mode == PMode::Sparse);
    out.rows.reserve(n);
    for (const auto& row : rows) {
        out.rows.push_back({row.t, row.achieved_perplexity, row.converged, row.steps});
        if (!row.converged) ++out.unconverged;
    }
    return out;
}

}  // namespace riesne
