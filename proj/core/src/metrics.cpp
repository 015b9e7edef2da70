#include "riesne/metrics.hpp"

#include <algorithm>
#include <map>

#include "riesne/errors.hpp"
#include "riesne/neighbors.hpp"

namespace riesne {

DatasetTable euclidean_table(const Eigen::MatrixXd& coords) {
    std::vector<ManifoldPoint> pts;
    pts.reserve(static_cast<std::size_t>(coords.rows()));
    const auto m = ManifoldDescriptor::euclidean(static_cast<std::size_t>(coords.cols()));
    for (Eigen::Index i = 0; i < coords.rows(); ++i) pts.push_back({m, coords.row(i).transpose()});
    auto t = DatasetTable::from_points(std::move(pts));
    t.manifold = m;
    return t;
}

double knn_label_accuracy(const DatasetTable& embedding, const std::vector<int>& labels, std::size_t k) {
    const std::size_t n = embedding.size();
    if (labels.size() != n) throw InvalidArgument("labels are missing or do not match the embedding size");
    const NeighborList knn = brute_knn(embedding, k);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::map<int, std::size_t> votes;
        for (const auto& nb : knn[i]) ++votes[labels[nb.index]];
        // std::map iterates labels ascending, so the first maximum is the
        // smallest tied label.
        int best = votes.begin()->first;
        std::size_t best_count = 0;
        for (const auto& [label, count] : votes) {
            if (count > best_count) {
                best = label;
                best_count = count;
            }
        }
        if (best == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

double trustworthiness(const DatasetTable& data, const DatasetTable& embedding, std::size_t k) {
    const std::size_t n = data.size();
    if (embedding.size() != n) throw InvalidArgument("data and embedding differ in size");
    if (k < 1 || 2 * k > n) throw InvalidArgument("trustworthiness needs 1 <= k <= n/2");

    const NeighborList emb = brute_knn(embedding, k);
    double penalty = 0.0;
    std::vector<Neighbor> all;
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        all.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) all.push_back({j, dist(data.manifold, data.points[i].coords, data.points[j].coords)});
        }
        std::sort(all.begin(), all.end(), neighbor_less);
        for (std::size_t r = 0; r < all.size(); ++r) rank[all[r].index] = r + 1;
        for (const auto& nb : emb[i]) {
            if (rank[nb.index] > k) penalty += static_cast<double>(rank[nb.index] - k);
        }
    }
    if (penalty == 0.0) return 1.0;
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    return 1.0 - 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0)) * penalty;
}

double sequential_neighbor_rate(const DatasetTable& embedding, const std::vector<std::size_t>& order, std::size_t k) {
    if (order.size() != embedding.size() || order.size() < 2) {
        throw InvalidArgument("order must be a permutation of the embedding indices");
    }
    std::vector<char> seen(order.size(), 0);
    for (std::size_t v : order) {
        if (v >= order.size() || seen[v]) throw InvalidArgument("order must be a permutation of the embedding indices");
        seen[v] = 1;
    }
    const NeighborList knn = brute_knn(embedding, k);
    std::size_t hits = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const auto& list = knn[order[i]];
        const auto next = order[i + 1];
        if (std::any_of(list.begin(), list.end(), [next](const Neighbor& nb) { return nb.index == next; })) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(order.size() - 1);
}

}  // namespace riesne
