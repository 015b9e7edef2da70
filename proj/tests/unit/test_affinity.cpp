#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "riesne/affinity.hpp"
#include "riesne/errors.hpp"
#include "riesne/synthetic.hpp"
#include "test_util.hpp"

using namespace riesne;

namespace {

double row_sum(const CalibratedRow& r) {
    double s = 0.0;
    for (double p : r.probs) s += p;
    return s;
}

DatasetTable spd_pair(double logdet_shift) {
    const Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d b = Eigen::Vector2d(std::exp(logdet_shift), 1.0).asDiagonal();
    return DatasetTable::from_points(
        {{ManifoldDescriptor::spd(2), spd::flatten(a)}, {ManifoldDescriptor::spd(2), spd::flatten(b)}});
}

}  // namespace

TEST(BmSimilarity, Examples) {
    EXPECT_NEAR(bm_similarity(0.0, 1.0, {1.0, 2}), 1.0 / (2.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(bm_similarity(0.0, 1.0, {1.0, 2}), 0.159155, 1e-6);
    EXPECT_NEAR(bm_similarity(1.0, 2.0, {0.5, 2}), 2.0 * std::exp(-1.0) / std::numbers::pi, 1e-15);
    EXPECT_NEAR(bm_similarity(1.0, 2.0, {0.5, 2}), 0.234200, 1e-6);
}

TEST(BmSimilarity, IsotropicGaussianDensity) {
    std::mt19937_64 rng(1);
    for (std::size_t d : {1u, 3u, 7u}) {
        const Eigen::VectorXd x = testutil::random_vector(rng, static_cast<Eigen::Index>(d));
        const Eigen::VectorXd y = testutil::random_vector(rng, static_cast<Eigen::Index>(d));
        const double t = 0.8;
        double gauss = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double u = x[static_cast<Eigen::Index>(k)] - y[static_cast<Eigen::Index>(k)];
            gauss *= std::exp(-u * u / (2 * t)) / std::sqrt(2 * std::numbers::pi * t);
        }
        EXPECT_NEAR(bm_similarity((x - y).norm(), 1.0, {t, d}) / gauss, 1.0, 1e-12);
    }
}

TEST(BmSimilarity, UnderflowIsZeroAndTimeMustBePositive) {
    EXPECT_EQ(bm_similarity(1e3, 1.0, {1e-3, 2}), 0.0);
    EXPECT_THROW(bm_similarity(1.0, 1.0, {0.0, 2}), InvalidArgument);
}

TEST(H0, HomogeneousDataIsAllOnes) {
    for (const auto& m : {ManifoldDescriptor::euclidean(3), ManifoldDescriptor::sphere(3)}) {
        const auto h = h0_matrix(synthetic::random_points(m, 10, 2));
        EXPECT_EQ(h, Eigen::MatrixXd::Ones(10, 10));
    }
}

TEST(H0, SpdVolumeRatio) {
    // lambda(I) = 0 and lambda(diag(e^2, 1)) = -3.
    const auto h = h0_matrix(spd_pair(2.0));
    EXPECT_NEAR(h(0, 1), std::exp(3.0), 1e-12);
    EXPECT_NEAR(h(0, 1), 20.0855, 1e-4);
    EXPECT_NEAR(h(1, 0), std::exp(-3.0), 1e-15);
    EXPECT_EQ(h(0, 0), 1.0);
    EXPECT_EQ(h(1, 1), 1.0);
}

TEST(H0, ReciprocalPairs) {
    const auto h = h0_matrix(synthetic::random_points(ManifoldDescriptor::spd(3), 30, 5, 0.5));
    for (Eigen::Index i = 0; i < 30; ++i) {
        EXPECT_EQ(h(i, i), 1.0);
        for (Eigen::Index j = 0; j < 30; ++j) EXPECT_NEAR(h(i, j) * h(j, i), 1.0, 1e-10);
    }
}

TEST(Calibrate, EquidistantNeighbors) {
    const std::vector<double> d = {1.5, 1.5, 1.5}, h = {1, 1, 1};
    const auto r = calibrate_row(d, h, 4, 3.0);
    EXPECT_TRUE(r.converged);
    for (double p : r.probs) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.achieved_perplexity, 3.0, 1e-12);
}

TEST(Calibrate, SingleNeighbor) {
    const std::vector<double> d = {0.0, 2.0}, h = {1, 1};
    const auto r = calibrate_row(d, h, 2, 1.0, 0);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.probs[0], 0.0);
    EXPECT_EQ(r.probs[1], 1.0);
    EXPECT_NEAR(r.entropy_bits, 0.0, 1e-15);
    EXPECT_NEAR(r.achieved_perplexity, 1.0, 1e-15);
}

TEST(Calibrate, TwoNeighborOracle) {
    // Reference values from an independent high-precision bisection over t
    // (1e-12 bracket) for distances (1, 2), D = 1, h0 = 1, perplexity 1.8.
    constexpr double kT = 1.5442004662054867;
    constexpr double kP0 = 0.7253937727045354, kP1 = 0.2746062272954646;
    const std::vector<double> d = {1.0, 2.0}, h = {1, 1};
    const auto r = calibrate_row(d, h, 1, 1.8);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(std::abs(r.entropy_bits - std::log2(1.8)), kPerplexityTolerance);
    // The search stops once the entropy is within 1e-5 bits, so t and the
    // probabilities agree to the corresponding first-order band.
    EXPECT_NEAR(r.t, kT, 2e-4);
    EXPECT_NEAR(r.probs[0], kP0, 2e-5);
    EXPECT_NEAR(r.probs[1], kP1, 2e-5);
    // The in-repo double-precision bisection agrees with the frozen values.
    EXPECT_NEAR(oracle::bisect_time(d, h, 1.8), kT, 1e-9);
}

TEST(Calibrate, RejectsBadInput) {
    const std::vector<double> d = {1.0, INFINITY}, h = {1, 1};
    EXPECT_THROW(calibrate_row(std::vector<double>{INFINITY}, std::vector<double>{1.0}, 1, 2.0), NumericError);
    EXPECT_THROW(calibrate_row(d, h, 1, 0.5), InvalidArgument);
    EXPECT_THROW(calibrate_row(d, std::vector<double>{1.0}, 1, 2.0), InvalidArgument);
    // Non-finite entries are skipped rather than fatal.
    const auto r = calibrate_row(d, h, 1, 1.0);
    EXPECT_EQ(r.probs[1], 0.0);
    EXPECT_EQ(r.probs[0], 1.0);
}

TEST(Calibrate, RandomRowsSumToOneAndMeetTolerance) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 5.0), hu(0.2, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> d(60), h(60);
        for (auto& v : d) v = u(rng);
        for (auto& v : h) v = hu(rng);
        const auto r = calibrate_row(d, h, 5, 20.0);
        EXPECT_NEAR(row_sum(r), 1.0, 1e-9);
        if (r.converged) EXPECT_LE(std::abs(r.entropy_bits - std::log2(20.0)), kPerplexityTolerance);
        EXPECT_TRUE(r.converged);
    }
}

TEST(Calibrate, PerplexityMonotoneInTime) {
    // With uniform volume ratios the row entropy is non-decreasing in t.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> d(40), h(40, 1.0);
        for (auto& v : d) v = u(rng);
        double prev = -1.0;
        for (double lt = -6.0; lt <= 6.0; lt += 0.25) {
            const double hb = oracle::row_entropy_bits(d, h, std::exp(lt));
            EXPECT_GE(hb, prev - 1e-12);
            prev = hb;
        }
        // The fitted rows follow the same ordering.
        const auto lo = calibrate_row(d, h, 3, 5.0), hi = calibrate_row(d, h, 3, 15.0);
        EXPECT_LT(lo.t, hi.t);
    }
}

TEST(Calibrate, ScaleCovariance) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 3.0), hu(0.5, 2.0);
    std::vector<double> d(30), h(30);
    for (auto& v : d) v = u(rng);
    for (auto& v : h) v = hu(rng);
    const auto base = calibrate_row(d, h, 2, 10.0);
    for (double s : {0.5, 4.0}) {
        std::vector<double> ds(d);
        for (auto& v : ds) v *= s;
        const auto r = calibrate_row(ds, h, 2, 10.0);
        ASSERT_TRUE(r.converged && base.converged);
        // Bisection from t = 1 visits powers of two, so t scales exactly by s^2
        // for these power-of-two factors.
        EXPECT_NEAR(r.t / base.t, s * s, 1e-12);
        for (std::size_t j = 0; j < d.size(); ++j) EXPECT_NEAR(r.probs[j], base.probs[j], 1e-7);
    }
}

TEST(Symmetrize, TwoPoints) {
    CalibratedRow a{0, {1}, {1.0}}, b{1, {0}, {1.0}};
    const std::vector<CalibratedRow> rows = {a, b};
    for (bool sparse : {false, true}) {
        const auto p = symmetrize(rows, 2, sparse);
        EXPECT_EQ(p.value(0, 1), 0.5);
        EXPECT_EQ(p.value(1, 0), 0.5);
        EXPECT_EQ(p.total(), 1.0);
    }
}

TEST(Symmetrize, SymmetricConditionalsDivideByN) {
    // p_{j|i} = p_{i|j} for a 3x3 doubly stochastic matrix with zero diagonal.
    std::vector<CalibratedRow> rows(3);
    const double c[3][3] = {{0, 0.3, 0.7}, {0.3, 0, 0.7}, {0.7, 0.7, 0}};
    // Rows 0 and 1 sum to one; row 2 is not a distribution, only symmetric.
    for (std::size_t i = 0; i < 3; ++i) {
        rows[i].row_index = i;
        rows[i].indices = {0, 1, 2};
        rows[i].probs = {c[i][0], c[i][1], c[i][2]};
    }
    const auto p = symmetrize(rows, 3, false);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p.value(i, j), c[i][j] / 3.0, 1e-16);
    }
}

TEST(BuildP, GaussianSneOracle) {
    const auto data = synthetic::random_points(ManifoldDescriptor::euclidean(6), 120, 8);
    const auto built = build_p(data, 15.0, PMode::Dense);
    ASSERT_EQ(built.unconverged, 0u);
    Eigen::MatrixXd x(120, 6);
    std::vector<double> sigma2;
    for (std::size_t i = 0; i < 120; ++i) {
        x.row(static_cast<Eigen::Index>(i)) = data.points[i].coords.transpose();
        sigma2.push_back(built.rows[i].t);
    }
    const Eigen::MatrixXd ref = oracle::gaussian_sne_p(x, sigma2);
    EXPECT_LT((built.p.dense() - ref).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(BuildP, InvariantsAllManifolds) {
    for (const auto& m : {ManifoldDescriptor::euclidean(4), ManifoldDescriptor::sphere(4), ManifoldDescriptor::spd(3)}) {
        const auto data = synthetic::random_points(m, 80, 6);
        for (PMode mode : {PMode::Dense, PMode::Sparse}) {
            const auto built = build_p(data, 10.0, mode);
            const Eigen::MatrixXd p = built.p.to_dense();
            EXPECT_EQ(built.p.is_sparse(), mode == PMode::Sparse);
            EXPECT_EQ(built.unconverged, 0u) << describe(m);
            EXPECT_NEAR(p.sum(), 1.0, 1e-8);
            EXPECT_GE(p.minCoeff(), 0.0);
            EXPECT_EQ((p - p.transpose()).cwiseAbs().maxCoeff(), 0.0);
            EXPECT_EQ(p.diagonal().cwiseAbs().maxCoeff(), 0.0);
        }
    }
}

TEST(BuildP, SparseRowsOnlyTouchNeighbors) {
    const auto data = synthetic::random_points(ManifoldDescriptor::sphere(5), 100, 12);
    const auto built = build_p(data, 5.0, PMode::Sparse);
    // Each row keeps 15 conditionals; symmetrization adds at most 15 more.
    for (Eigen::Index i = 0; i < 100; ++i) {
        const auto nnz = built.p.sparse().outerIndexPtr()[i + 1] - built.p.sparse().outerIndexPtr()[i];
        EXPECT_GE(nnz, 15);
        EXPECT_LE(nnz, 30);
    }
}

TEST(BuildP, SparseEqualsDenseWithFullNeighborhoods) {
    for (const auto& m : {ManifoldDescriptor::euclidean(3), ManifoldDescriptor::spd(2)}) {
        const auto data = synthetic::random_points(m, 200, 14);
        const double perp = 199.0 / 3.0 + 0.01;  // floor(3 * perp) = 199
        ASSERT_EQ(sparse_neighbor_count(perp), 199u);
        const auto dense = build_p(data, perp, PMode::Dense);
        const auto sparse = build_p(data, perp, PMode::Sparse);
        EXPECT_LT((dense.p.dense() - sparse.p.to_dense()).cwiseAbs().maxCoeff(), 1e-10) << describe(m);
    }
}

TEST(BuildP, DeterministicAcrossThreads) {
    const auto data = synthetic::random_points(ManifoldDescriptor::spd(3), 150, 2);
    for (PMode mode : {PMode::Dense, PMode::Sparse}) {
        const auto a = build_p(data, 12.0, mode, {42, 1});
        const auto b = build_p(data, 12.0, mode, {42, 4});
        EXPECT_EQ(a.p.to_dense(), b.p.to_dense());
    }
}

TEST(BuildP, PreconditionErrors) {
    const auto small = synthetic::random_points(ManifoldDescriptor::euclidean(2), 3, 1);
    EXPECT_THROW(build_p(small, 1.0, PMode::Dense), InvalidArgument);
    const auto data = synthetic::random_points(ManifoldDescriptor::euclidean(2), 20, 1);
    EXPECT_THROW(build_p(data, 7.0, PMode::Sparse), InvalidArgument);  // tau = 21 > 19
    EXPECT_NO_THROW(build_p(data, 6.0, PMode::Sparse));                // tau = 18
}

TEST(BuildP, UniformVolumeRatio) {
    // Identical on homogeneous data; on SPD it drops the determinant weighting.
    const auto flat = synthetic::random_points(ManifoldDescriptor::sphere(4), 60, 3);
    EXPECT_EQ(build_p(flat, 8.0, PMode::Dense).p.dense(),
              build_p(flat, 8.0, PMode::Dense, {42, 1, VolumeRatio::Uniform}).p.dense());

    const auto data = synthetic::random_points(ManifoldDescriptor::spd(3), 60, 4, 0.6);
    const auto chart = build_p(data, 8.0, PMode::Dense);
    const auto uniform = build_p(data, 8.0, PMode::Dense, {42, 1, VolumeRatio::Uniform});
    EXPECT_GT((chart.p.dense() - uniform.p.dense()).cwiseAbs().maxCoeff(), 1e-6);

    std::vector<CalibratedRow> rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<double> d(data.size()), h(data.size(), 1.0);
        for (std::size_t j = 0; j < data.size(); ++j) d[j] = dist(data.points[i], data.points[j]);
        rows.push_back(calibrate_row(d, h, data.manifold.intrinsic_dim(), 8.0, i));
    }
    EXPECT_LT((symmetrize(rows, data.size(), false).dense() - uniform.p.dense()).cwiseAbs().maxCoeff(), 1e-15);

    EXPECT_EQ(parse_volume_ratio(to_string(VolumeRatio::Uniform)), VolumeRatio::Uniform);
    EXPECT_THROW(parse_volume_ratio("entries"), InvalidArgument);
}

TEST(BuildP, UnderflowErrorNamesRow) {
    // Point 2 is so far out that its distances overflow to infinity, leaving
    // its row without a usable entry.
    std::vector<ManifoldPoint> pts;
    for (double x : {0.0, 1.0, 1e300, 2.0, 3.0}) pts.push_back({ManifoldDescriptor::euclidean(1), Eigen::VectorXd::Constant(1, x)});
    try {
        build_p(DatasetTable::from_points(pts), 1.5, PMode::Dense);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("(row 2)"), std::string::npos) << e.what();
    }
}
