#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "riesne/errors.hpp"
#include "riesne/neighbors.hpp"
#include "riesne/synthetic.hpp"

using namespace riesne;

namespace {

DatasetTable line(std::initializer_list<double> xs) {
    std::vector<ManifoldPoint> pts;
    for (double x : xs) pts.push_back({ManifoldDescriptor::euclidean(1), Eigen::VectorXd::Constant(1, x)});
    return DatasetTable::from_points(std::move(pts));
}

void expect_same(const std::vector<Neighbor>& a, const std::vector<Neighbor>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t e = 0; e < a.size(); ++e) {
        EXPECT_EQ(a[e].index, b[e].index) << "rank " << e;
        EXPECT_EQ(a[e].distance, b[e].distance) << "rank " << e;
    }
}

}  // namespace

TEST(VpTree, SinglePointIsOneLeaf) {
    const auto data = line({2.0});
    const VpTree tree(data, 1);
    ASSERT_EQ(tree.nodes().size(), 1u);
    EXPECT_EQ(tree.nodes()[0].left, -1);
    EXPECT_EQ(tree.nodes()[0].right, -1);
    EXPECT_TRUE(audit_vp_tree(tree, data));
}

TEST(VpTree, CollinearPointsSatisfyInvariant) {
    const auto data = line({0.0, 1.0, 2.0});
    for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_TRUE(audit_vp_tree(VpTree(data, seed), data));
}

TEST(VpTree, ThousandSpherePointsAudit) {
    const auto data = synthetic::random_points(ManifoldDescriptor::sphere(3), 1000, 3);
    const VpTree tree(data, 42);
    EXPECT_EQ(tree.nodes().size(), 1000u);
    EXPECT_TRUE(audit_vp_tree(tree, data));
}

TEST(VpTree, LineQuery) {
    const auto data = line({0.0, 1.0, 3.0});
    const auto r = VpTree(data, 5).query(0, 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].index, 1u);
    EXPECT_EQ(r[0].distance, 1.0);
}

TEST(VpTree, FullNeighborhoodIsSorted) {
    const auto data = synthetic::random_points(ManifoldDescriptor::euclidean(3), 40, 9);
    const VpTree tree(data, 1);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = tree.query(i, data.size() - 1);
        ASSERT_EQ(r.size(), data.size() - 1);
        std::set<std::size_t> seen;
        for (std::size_t e = 0; e < r.size(); ++e) {
            EXPECT_NE(r[e].index, i);
            seen.insert(r[e].index);
            if (e > 0) EXPECT_TRUE(neighbor_less(r[e - 1], r[e]));
        }
        EXPECT_EQ(seen.size(), data.size() - 1);
    }
}

TEST(VpTree, KOutOfRange) {
    const auto data = line({0.0, 1.0, 3.0});
    const VpTree tree(data, 5);
    EXPECT_THROW(tree.query(0, 0), InvalidArgument);
    EXPECT_THROW(tree.query(0, 3), InvalidArgument);
    EXPECT_THROW(brute_knn(data, 3), InvalidArgument);
}

TEST(VpTree, SpdMatchesBruteForce) {
    const auto data = synthetic::random_points(ManifoldDescriptor::spd(3), 500, 17, 0.5);
    const VpTree tree(data, 3);
    const auto brute = brute_knn(data, 90);
    for (std::size_t i = 0; i < data.size(); ++i) expect_same(tree.query(i, 90), brute[i]);
}

TEST(VpTree, AllManifoldsAllK) {
    for (const auto& m : {ManifoldDescriptor::euclidean(5), ManifoldDescriptor::sphere(4), ManifoldDescriptor::spd(2)}) {
        const auto data = synthetic::random_points(m, 300, 21);
        const VpTree tree(data, 8);
        for (std::size_t k : {1u, 10u, 90u}) {
            const auto brute = brute_knn(data, k);
            const auto fast = tree.query_all(k, 3);
            for (std::size_t i = 0; i < data.size(); ++i) expect_same(fast[i], brute[i]);
        }
    }
}

TEST(VpTree, DeterministicForSeed) {
    const auto data = synthetic::random_points(ManifoldDescriptor::sphere(3), 200, 4);
    const VpTree a(data, 77), b(data, 77);
    ASSERT_EQ(a.nodes().size(), b.nodes().size());
    for (std::size_t k = 0; k < a.nodes().size(); ++k) {
        EXPECT_EQ(a.nodes()[k].vantage, b.nodes()[k].vantage);
        EXPECT_EQ(a.nodes()[k].radius, b.nodes()[k].radius);
        EXPECT_EQ(a.nodes()[k].left, b.nodes()[k].left);
        EXPECT_EQ(a.nodes()[k].right, b.nodes()[k].right);
    }
    const auto ra = a.query_all(7), rb = b.query_all(7, 4);
    for (std::size_t i = 0; i < data.size(); ++i) expect_same(ra[i], rb[i]);
}

TEST(VpTree, VisitsGrowSublinearly) {
    auto mean_visits = [](std::size_t n) {
        const auto data = synthetic::random_points(ManifoldDescriptor::sphere(3), n, 31);
        const VpTree tree(data, 2);
        double total = 0.0;
        for (std::size_t q = 0; q < 1000; ++q) {
            VpTree::QueryStats stats;
            tree.query(q, 10, &stats);
            total += static_cast<double>(stats.visited_nodes);
        }
        return total / 1000.0;
    };
    const double small = mean_visits(4000), large = mean_visits(8000);
    EXPECT_LT(large / small, 1.5) << small << " -> " << large;
}

TEST(BruteKnn, TwoPoints) {
    const auto data = line({0.0, 2.5});
    const auto r = brute_knn(data, 1);
    EXPECT_EQ(r[0][0].index, 1u);
    EXPECT_EQ(r[1][0].index, 0u);
    EXPECT_EQ(r[0][0].distance, 2.5);
}

TEST(BruteKnn, DuplicatesFirstWithIndexTieBreak) {
    const auto data = line({1.0, 5.0, 1.0, 1.0, 0.0});
    const auto r = brute_knn(data, 3);
    expect_same(r[0], {{2, 0.0}, {3, 0.0}, {4, 1.0}});
    expect_same(r[3], {{0, 0.0}, {2, 0.0}, {4, 1.0}});
    expect_same(VpTree(data, 3).query(0, 3), r[0]);
}
