#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "riesne/dataset.hpp"

namespace riesne {

struct Neighbor {
    std::size_t index;
    double distance;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// (distance, index) lexicographic order used for every neighbor ranking.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

/// Per-query neighbor arrays, ascending by distance with ties broken by index.
using NeighborList = std::vector<std::vector<Neighbor>>;

/// Vantage-point tree over a dataset under its manifold distance.
///
/// Each node holds one dataset index as its vantage point. Points in the left
/// subtree are within `radius` of the vantage point, points in the right
/// subtree are strictly farther. The tree keeps a pointer to the dataset, which
/// must outlive it.
class VpTree {
public:
    struct Node {
        std::size_t vantage = 0;
        double radius = 0.0;
        std::int64_t left = -1;
        std::int64_t right = -1;
    };

    struct QueryStats {
        std::size_t visited_nodes = 0;
    };

    VpTree(const DatasetTable& data, std::uint64_t seed);

    /// The k nearest other points of dataset point `query_index`.
    std::vector<Neighbor> query(std::size_t query_index, std::size_t k, QueryStats* stats = nullptr) const;

    /// All queries, optionally spread over worker threads.
    NeighborList query_all(std::size_t k, int threads = 1) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    std::int64_t root() const { return nodes_.empty() ? -1 : 0; }
    std::size_t size() const { return data_->size(); }

private:
    std::int64_t build(std::vector<std::size_t>& items, std::size_t lo, std::size_t hi, std::mt19937_64& rng);

    const DatasetTable* data_;
    std::vector<Node> nodes_;
};

/// O(n^2) reference k-nearest-neighbor search.
NeighborList brute_knn(const DatasetTable& data, std::size_t k, int threads = 1);

/// Checks the VP-tree structural invariants: every index appears exactly once
/// and every subtree respects its node's radius. Returns false on violation.
bool audit_vp_tree(const VpTree& tree, const DatasetTable& data);

}  // namespace riesne
