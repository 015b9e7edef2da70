#include "riesne/neighbors.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <utility>

#include "riesne/errors.hpp"
#include "riesne/parallel.hpp"

namespace riesne {

namespace {

void check_k(std::size_t k, std::size_t n) {
    if (k < 1 || k + 1 > n) {
        throw InvalidArgument("k must lie in [1, n-1]; got k=" + std::to_string(k) + " for n=" + std::to_string(n));
    }
}

// Slack added to pruning bounds so rounding in the computed distances can
// never exclude a true neighbor.
double prune_slack(double a, double b) { return 1e-9 * (1.0 + a + b); }

struct WorstFirst {
    bool operator()(const Neighbor& a, const Neighbor& b) const { return neighbor_less(a, b); }
};

}  // namespace

VpTree::VpTree(const DatasetTable& data, std::uint64_t seed) : data_(&data) {
    if (data.size() == 0) throw InvalidArgument("cannot build a VP-tree over an empty dataset");
    std::vector<std::size_t> items(data.size());
    for (std::size_t i = 0; i < items.size(); ++i) items[i] = i;
    nodes_.reserve(items.size());
    std::mt19937_64 rng(seed);
    build(items, 0, items.size(), rng);
}

std::int64_t VpTree::build(std::vector<std::size_t>& items, std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
    if (lo >= hi) return -1;
    const auto id = static_cast<std::int64_t>(nodes_.size());
    nodes_.push_back({});

    const std::size_t pick = lo + static_cast<std::size_t>(rng() % (hi - lo));
    std::swap(items[lo], items[pick]);
    const std::size_t vantage = items[lo];
    nodes_[id].vantage = vantage;
    if (hi - lo == 1) return id;

    const auto& m = data_->manifold;
    const auto& v = data_->points[vantage].coords;
    std::vector<std::pair<double, std::size_t>> rest;
    rest.reserve(hi - lo - 1);
    for (std::size_t i = lo + 1; i < hi; ++i) rest.emplace_back(dist(m, v, data_->points[items[i]].coords), items[i]);

    auto mid = rest.begin() + static_cast<std::ptrdiff_t>((rest.size() - 1) / 2);
    std::nth_element(rest.begin(), mid, rest.end());
    const double radius = mid->first;
    auto split = std::partition(rest.begin(), rest.end(), [radius](const auto& e) { return e.first <= radius; });
    for (std::size_t i = 0; i < rest.size(); ++i) items[lo + 1 + i] = rest[i].second;
    const std::size_t boundary = lo + 1 + static_cast<std::size_t>(split - rest.begin());

    nodes_[id].radius = radius;
    const auto left = build(items, lo + 1, boundary, rng);
    const auto right = build(items, boundary, hi, rng);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

std::vector<Neighbor> VpTree::query(std::size_t query_index, std::size_t k, QueryStats* stats) const {
    const std::size_t n = data_->size();
    check_k(k, n);
    if (query_index >= n) throw InvalidArgument("query index out of range");

    const auto& m = data_->manifold;
    const auto& q = data_->points[query_index].coords;
    std::priority_queue<Neighbor, std::vector<Neighbor>, WorstFirst> heap;
    std::size_t visited = 0;

    auto tau = [&] { return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().distance; };

    auto search = [&](auto&& self, std::int64_t id) -> void {
        if (id < 0) return;
        ++visited;
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        const double d = dist(m, q, data_->points[node.vantage].coords);
        if (node.vantage != query_index) {
            const Neighbor cand{node.vantage, d};
            if (heap.size() < k) {
                heap.push(cand);
            } else if (neighbor_less(cand, heap.top())) {
                heap.pop();
                heap.push(cand);
            }
        }
        auto visit_left = [&] {
            if (d - node.radius <= tau() + prune_slack(d, node.radius)) self(self, node.left);
        };
        auto visit_right = [&] {
            if (node.radius - d <= tau() + prune_slack(d, node.radius)) self(self, node.right);
        };
        if (d <= node.radius) {
            visit_left();
            visit_right();
        } else {
            visit_right();
            visit_left();
        }
    };
    search(search, root());

    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = heap.top();
        heap.pop();
    }
    if (stats) stats->visited_nodes = visited;
    return out;
}

NeighborList VpTree::query_all(std::size_t k, int threads) const {
    check_k(k, size());
    NeighborList out(size());
    parallel_for(size(), threads, [&](std::size_t i) { out[i] = query(i, k); });
    return out;
}

NeighborList brute_knn(const DatasetTable& data, std::size_t k, int threads) {
    const std::size_t n = data.size();
    check_k(k, n);
    NeighborList out(n);
    parallel_for(n, threads, [&](std::size_t i) {
        std::vector<Neighbor> all;
        all.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) all.push_back({j, dist(data.manifold, data.points[i].coords, data.points[j].coords)});
        }
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), neighbor_less);
        all.resize(k);
        out[i] = std::move(all);
    });
    return out;
}

bool audit_vp_tree(const VpTree& tree, const DatasetTable& data) {
    const auto& nodes = tree.nodes();
    if (nodes.size() != data.size()) return false;
    std::vector<int> seen(data.size(), 0);
    for (const auto& node : nodes) {
        if (node.vantage >= data.size() || seen[node.vantage]++) return false;
    }

    // Collect each subtree's indices and compare against its ancestors' radii.
    auto collect = [&](auto&& self, std::int64_t id, std::vector<std::size_t>& acc) -> void {
        if (id < 0) return;
        const auto& node = nodes[static_cast<std::size_t>(id)];
        acc.push_back(node.vantage);
        self(self, node.left, acc);
        self(self, node.right, acc);
    };
    for (const auto& node : nodes) {
        const auto& v = data.points[node.vantage].coords;
        std::vector<std::size_t> left, right;
        collect(collect, node.left, left);
        collect(collect, node.right, right);
        for (auto i : left) {
            if (dist(data.manifold, v, data.points[i].coords) > node.radius) return false;
        }
        for (auto i : right) {
            if (!(dist(data.manifold, v, data.points[i].coords) > node.radius)) return false;
        }
    }
    return true;
}

}  // namespace riesne
