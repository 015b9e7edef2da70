#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "riesne/embedding.hpp"
#include "riesne/errors.hpp"
#include "riesne/parallel.hpp"
#include "similarity_kernels.hpp"

namespace riesne {

namespace {

constexpr int kMaxDepth = 64;

// 2^D-ary space-partitioning tree over the embedding (quadtree for D=2,
// octree for D=3). Leaves hold one point or several identical points.
template <int D>
class SpaceTree {
public:
    struct Cell {
        std::array<double, D> center{};
        double half = 0.0;
        std::uint32_t begin = 0, end = 0;
        // Children are stored contiguously from first_child.
        std::int32_t first_child = 0;
        int n_children = 0;
        double count = 0.0;
        std::array<double, D> centroid{};
        double weight = 0.0;
        std::array<double, D> weighted_centroid{};
    };

    explicit SpaceTree(const detail::RowMatrix& y) : y_(y) {
        const auto n = static_cast<std::uint32_t>(y.rows());
        perm_.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) perm_[i] = i;

        Cell root;
        double half = 0.0;
        for (int k = 0; k < D; ++k) {
            const double lo = y.col(k).minCoeff(), hi = y.col(k).maxCoeff();
            root.center[k] = 0.5 * (lo + hi);
            half = std::max(half, 0.5 * (hi - lo));
        }
        root.half = half * (1.0 + 1e-9) + 1e-300;
        root.begin = 0;
        root.end = n;
        cells_.push_back(root);
        split(0, 0);
        // Children always follow their parent, so a reverse sweep sees
        // children first.
        for (std::size_t c = cells_.size(); c-- > 0;) summarize(cells_[c]);
        diagonal_factor_ = 2.0 * std::sqrt(static_cast<double>(D));
    }

    /// Fills per-cell weight sums and weighted centroids for point weights w.
    void set_weights(const Eigen::VectorXd& w) {
        for (std::size_t c = cells_.size(); c-- > 0;) {
            Cell& cell = cells_[c];
            cell.weight = 0.0;
            cell.weighted_centroid.fill(0.0);
            if (cell.n_children == 0) {
                for (auto e = cell.begin; e < cell.end; ++e) {
                    const auto i = perm_[e];
                    cell.weight += w[i];
                    for (int k = 0; k < D; ++k) cell.weighted_centroid[k] += w[i] * y_(i, k);
                }
            } else {
                for (int ch = 0; ch < cell.n_children; ++ch) {
                    const Cell& child = cells_[static_cast<std::size_t>(cell.first_child + ch)];
                    cell.weight += child.weight;
                    for (int k = 0; k < D; ++k) cell.weighted_centroid[k] += child.weight * child.weighted_centroid[k];
                }
            }
            if (cell.weight > 0.0) {
                for (int k = 0; k < D; ++k) cell.weighted_centroid[k] /= cell.weight;
            } else {
                cell.weighted_centroid = cell.centroid;
            }
        }
    }

    const Cell& cell(std::int32_t id) const { return cells_[static_cast<std::size_t>(id)]; }

    /// Visits the tree for point a. Summarized cells call far(cell_id); points
    /// in opened leaves call near(j).
    template <class Far, class Near>
    void traverse(std::uint32_t a, double theta, Far&& far, Near&& near) const {
        const double* ya = y_.row(a).data();
        const double theta2 = theta * theta;
        // A point inside a cell is within one diagonal of its centroid, so
        // for theta < 1 the opening test alone already rejects it.
        const bool check_inside = theta >= 1.0;
        if (cells_[0].n_children == 0) {
            for (auto e = cells_[0].begin; e < cells_[0].end; ++e) {
                if (perm_[e] != a) near(perm_[e]);
            }
            return;
        }
        std::array<std::int32_t, kMaxDepth * (1 << D) + 1> stack;
        std::size_t top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Cell& cell = cells_[static_cast<std::size_t>(stack[--top])];
            for (int ch = 0; ch < cell.n_children; ++ch) {
                const auto child_id = cell.first_child + ch;
                const Cell& child = cells_[static_cast<std::size_t>(child_id)];
                if (child.n_children == 0) {
                    for (auto e = child.begin; e < child.end; ++e) {
                        if (perm_[e] != a) near(perm_[e]);
                    }
                    continue;
                }
                if (summarizes(child, ya, theta2, check_inside)) {
                    far(child_id);
                } else {
                    stack[top++] = child_id;
                }
            }
        }
    }

private:
    bool summarizes(const Cell& cell, const double* ya, double theta2, bool check_inside) const {
        double d2 = 0.0;
        for (int k = 0; k < D; ++k) {
            const double diff = ya[k] - cell.centroid[k];
            d2 += diff * diff;
        }
        const double r = diagonal_factor_ * cell.half;
        if (!(r * r < theta2 * d2)) return false;
        if (!check_inside) return true;
        for (int k = 0; k < D; ++k) {
            if (std::abs(ya[k] - cell.center[k]) > cell.half) return true;
        }
        return false;
    }

    void split(std::size_t id, int depth) {
        const std::uint32_t begin = cells_[id].begin, end = cells_[id].end;
        if (end - begin <= 1 || depth >= kMaxDepth || all_identical(begin, end)) return;

        const auto center = cells_[id].center;
        const double half = cells_[id].half;
        const int n_orthants = 1 << D;
        auto orthant = [&](std::uint32_t i) {
            int code = 0;
            for (int k = 0; k < D; ++k) {
                if (y_(i, k) > center[k]) code |= 1 << k;
            }
            return code;
        };
        // Counting sort of the range by orthant.
        std::array<std::uint32_t, (1 << D) + 1> offsets{};
        for (auto e = begin; e < end; ++e) ++offsets[static_cast<std::size_t>(orthant(perm_[e])) + 1];
        for (int o = 0; o < n_orthants; ++o) offsets[static_cast<std::size_t>(o) + 1] += offsets[static_cast<std::size_t>(o)];
        std::vector<std::uint32_t> sorted(end - begin);
        auto cursor = offsets;
        for (auto e = begin; e < end; ++e) {
            const auto i = perm_[e];
            sorted[cursor[static_cast<std::size_t>(orthant(i))]++] = i;
        }
        std::copy(sorted.begin(), sorted.end(), perm_.begin() + begin);

        const auto first = static_cast<std::int32_t>(cells_.size());
        for (int o = 0; o < n_orthants; ++o) {
            const auto lo = begin + offsets[static_cast<std::size_t>(o)];
            const auto hi = begin + offsets[static_cast<std::size_t>(o) + 1];
            if (lo == hi) continue;
            Cell child;
            child.half = 0.5 * half;
            for (int k = 0; k < D; ++k) child.center[k] = center[k] + ((o >> k) & 1 ? 0.5 : -0.5) * half;
            child.begin = lo;
            child.end = hi;
            cells_.push_back(child);
        }
        const auto last = static_cast<std::int32_t>(cells_.size());
        cells_[id].first_child = first;
        cells_[id].n_children = static_cast<int>(last - first);
        for (auto c = first; c < last; ++c) split(static_cast<std::size_t>(c), depth + 1);
    }

    bool all_identical(std::uint32_t begin, std::uint32_t end) const {
        const auto first = perm_[begin];
        for (auto e = begin + 1; e < end; ++e) {
            if (y_.row(perm_[e]) != y_.row(first)) return false;
        }
        return true;
    }

    void summarize(Cell& cell) {
        cell.count = static_cast<double>(cell.end - cell.begin);
        cell.centroid.fill(0.0);
        for (auto e = cell.begin; e < cell.end; ++e) {
            for (int k = 0; k < D; ++k) cell.centroid[k] += y_(perm_[e], k);
        }
        if (cell.count > 0.0) {
            for (int k = 0; k < D; ++k) cell.centroid[k] /= cell.count;
        }
    }

    const detail::RowMatrix& y_;
    double diagonal_factor_ = 0.0;
    std::vector<std::uint32_t> perm_;
    std::vector<Cell> cells_;
};

template <int D>
double sq_dist(const double* a, const double* b) {
    double d2 = 0.0;
    for (int k = 0; k < D; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
    return d2;
}

template <int D>
detail::RowMatrix bh_gradient(const AffinityMatrix& p, const detail::RowMatrix& y, double theta, double p_scale,
                              int threads) {
    const auto n = y.rows();
    SpaceTree<D> tree(y);

    // Pass 1: Z_a = sum_j s_aj and R1_a = sum_j s_aj^2 (y_a - y_j). Each
    // point's interactions are recorded (cell id, or ~j for a single point)
    // so pass 2 can replay them without walking the tree again.
    Eigen::VectorXd z(n);
    detail::RowMatrix r1(n, D);
    std::vector<std::vector<std::int32_t>> interactions(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ai) {
        const auto a = static_cast<std::uint32_t>(ai);
        const double* ya = y.row(a).data();
        auto& list = interactions[ai];
        double zsum = 0.0;
        std::array<double, D> acc{};
        auto add = [&](double count, const double* at) {
            const double s = 1.0 / (1.0 + sq_dist<D>(ya, at));
            zsum += count * s;
            const double f = count * s * s;
            for (int k = 0; k < D; ++k) acc[k] += f * (ya[k] - at[k]);
        };
        tree.traverse(
            a, theta,
            [&](std::int32_t id) {
                list.push_back(id);
                add(tree.cell(id).count, tree.cell(id).centroid.data());
            },
            [&](std::uint32_t j) {
                list.push_back(~static_cast<std::int32_t>(j));
                add(1.0, y.row(j).data());
            });
        z[a] = zsum;
        for (int k = 0; k < D; ++k) r1(a, k) = acc[k];
    });

    // Over P's support: A_a = sum_j W_aj q_{j|a} with W_aj = p_aj / q_aj, and
    // the attraction -2 sum_j p_aj dlog s_aj = 4 sum_j p_aj s_aj (y_a - y_j).
    const double two_n = 2.0 * static_cast<double>(n);
    Eigen::VectorXd w(n);
    detail::RowMatrix grad(n, D);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ai) {
        const auto a = static_cast<Eigen::Index>(ai);
        const double* ya = y.row(a).data();
        double acc = 0.0;
        std::array<double, D> attract{};
        p.for_each_in_row(ai, [&](std::size_t jj, double pij) {
            const auto j = static_cast<Eigen::Index>(jj);
            const double* yj = y.row(j).data();
            const double s = 1.0 / (1.0 + sq_dist<D>(ya, yj));
            const double pv = p_scale * std::max(pij, kProbabilityFloor);
            const double qa = s / z[a];
            acc += pv * qa * two_n / (qa + s / z[j]);
            for (int k = 0; k < D; ++k) attract[k] += 4.0 * pv * s * (ya[k] - yj[k]);
        });
        w[a] = acc / z[a];
        for (int k = 0; k < D; ++k) grad(a, k) = attract[k];
    });
    tree.set_weights(w);

    // Pass 2: R2_a = sum_j w_j s_aj^2 (y_a - y_j); repulsion is
    // -(2/n) (w_a R1_a + R2_a).
    const double inv_n = 1.0 / static_cast<double>(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ai) {
        const auto a = static_cast<Eigen::Index>(ai);
        const double* ya = y.row(a).data();
        std::array<double, D> r2{};
        auto add = [&](double weight, const double* at) {
            const double s = 1.0 / (1.0 + sq_dist<D>(ya, at));
            const double f = weight * s * s;
            for (int k = 0; k < D; ++k) r2[k] += f * (ya[k] - at[k]);
        };
        for (const std::int32_t e : interactions[ai]) {
            if (e >= 0) {
                add(tree.cell(e).weight, tree.cell(e).weighted_centroid.data());
            } else {
                add(w[~e], y.row(~e).data());
            }
        }
        for (int k = 0; k < D; ++k) grad(a, k) -= 2.0 * inv_n * (w[a] * r1(a, k) + r2[k]);
    });
    return grad;
}

}  // namespace

Eigen::MatrixXd kl_gradient_bh(const AffinityMatrix& p, const EmbeddingState& state, const TargetSpace& target,
                               double theta, double p_scale, int threads) {
    target.validate();
    const auto d = target.descriptor.coord_size();
    if (target.family != SimilarityFamily::StudentT || (d != 2 && d != 3)) {
        throw InvalidArgument("Barnes-Hut gradient needs student-t similarities on R^2 or R^3");
    }
    if (!(state.descriptor == target.descriptor)) throw InvalidArgument("embedding state is not on the target manifold");
    if (p.n() != state.size() || state.size() < 2) throw InvalidArgument("P and the embedding differ in size");
    if (!(theta >= 0.0)) throw InvalidArgument("theta must be non-negative");

    const detail::RowMatrix y = state.points;
    return d == 2 ? bh_gradient<2>(p, y, theta, p_scale, threads) : bh_gradient<3>(p, y, theta, p_scale, threads);
}

}  // namespace riesne
