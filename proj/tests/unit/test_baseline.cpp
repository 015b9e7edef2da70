#include <random>

#include <gtest/gtest.h>

#include "riesne/baseline.hpp"
#include "riesne/errors.hpp"
#include "riesne/synthetic.hpp"
#include "test_util.hpp"

using namespace riesne;

namespace {

Eigen::MatrixXd coords_of(const DatasetTable& data) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.manifold.coord_size()));
    for (std::size_t i = 0; i < data.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = data.points[i].coords.transpose();
    return x;
}

Eigen::VectorXd column_variance(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd c = m.rowwise() - m.colwise().mean();
    return c.colwise().squaredNorm().transpose() / static_cast<double>(m.rows() - 1);
}

DatasetTable correlated_gaussian(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd mix(4, 4);
    mix << 3, 0, 0, 0, 1, 2, 0, 0, 0.5, -0.3, 1, 0, 0.1, 0.2, 0.1, 0.4;
    std::vector<ManifoldPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        pts.push_back({ManifoldDescriptor::euclidean(4), mix * testutil::random_vector(rng, 4) + Eigen::Vector4d(1, 2, 3, 4)});
    }
    return DatasetTable::from_points(std::move(pts));
}

}  // namespace

TEST(TangentPca, EuclideanMatchesCovarianceOracle) {
    const auto data = correlated_gaussian(400, 1);
    const auto model = fit_tangent_pca(data, 2);
    const Eigen::MatrixXd x = coords_of(data);
    const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / 399.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    for (Eigen::Index k = 0; k < 2; ++k) {
        EXPECT_NEAR(model.explained_variance[k], es.eigenvalues()[3 - k], 1e-9);
        // Same direction up to sign.
        EXPECT_NEAR(std::abs(model.components.row(k).dot(es.eigenvectors().col(3 - k))), 1.0, 1e-9);
    }
    EXPECT_TRUE(model.mean_converged);
}

TEST(TangentPca, ComponentsOrthonormalVariancesSortedSignFixed) {
    const auto data = synthetic::random_points(ManifoldDescriptor::spd(3), 150, 2, 0.4);
    const auto model = fit_tangent_pca(data, 6);
    EXPECT_LT((model.components * model.components.transpose() - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(),
              1e-9);
    for (Eigen::Index k = 1; k < 6; ++k) EXPECT_GE(model.explained_variance[k - 1], model.explained_variance[k]);
    for (Eigen::Index k = 0; k < 6; ++k) {
        Eigen::Index arg = 0;
        model.components.row(k).cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(model.components(k, arg), 0.0);
    }
}

TEST(TangentPca, RepeatedPointHasZeroVariance) {
    const ManifoldPoint x{ManifoldDescriptor::sphere(3), Eigen::Vector3d(0, 0.6, 0.8)};
    const auto data = DatasetTable::from_points({x, x, x, x});
    const auto model = fit_tangent_pca(data, 2);
    EXPECT_LT(model.explained_variance.cwiseAbs().maxCoeff(), 1e-20);
    EXPECT_LT((model.components * model.components.transpose() - Eigen::Matrix2d::Identity()).norm(), 1e-12);
    EXPECT_LT(transform(model, data).norm(), 1e-14);
}

TEST(TangentPca, GreatCircleIsOneDimensional) {
    std::mt19937_64 rng(3);
    const auto m = ManifoldDescriptor::sphere(5);
    const auto base = testutil::random_point(rng, m);
    Eigen::VectorXd dir = testutil::random_vector(rng, 5);
    dir -= dir.dot(base.coords) * base.coords;
    dir.normalize();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<ManifoldPoint> pts;
    for (int i = 0; i < 100; ++i) pts.push_back(exp_map(base, {base, u(rng) * dir}));
    const auto model = fit_tangent_pca(DatasetTable::from_points(pts), 2);
    EXPECT_GE(model.explained_variance[0] / model.explained_variance.sum(), 0.99);
}

TEST(TangentPca, InvalidDimension) {
    const auto data = synthetic::random_points(ManifoldDescriptor::sphere(3), 10, 1);
    EXPECT_THROW(fit_tangent_pca(data, 0), InvalidArgument);
    EXPECT_THROW(fit_tangent_pca(data, 3), InvalidArgument);
}

TEST(Transform, BasePointMapsToZero) {
    const auto data = synthetic::random_points(ManifoldDescriptor::spd(2), 40, 4);
    const auto model = fit_tangent_pca(data, 2);
    EXPECT_LT(transform(model, DatasetTable::from_points({model.base_point})).norm(), 1e-12);
}

TEST(Transform, VariancesMatchModel) {
    for (const auto& m : {ManifoldDescriptor::euclidean(4), ManifoldDescriptor::sphere(4), ManifoldDescriptor::spd(2)}) {
        auto data = synthetic::random_points(m, 120, 5);
        if (m.family == ManifoldFamily::Sphere) {
            for (auto& p : data.points) p.coords[0] = std::abs(p.coords[0]) + 1.0, p.coords.normalize();
        }
        const auto model = fit_tangent_pca(data, 2);
        EXPECT_LT((column_variance(transform(model, data)) - model.explained_variance).cwiseAbs().maxCoeff(), 1e-8)
            << describe(m);
    }
}

TEST(Transform, FullRankIsOrthogonalChangeOfBasis) {
    std::mt19937_64 rng(6);
    std::vector<ManifoldPoint> pts;
    for (int i = 0; i < 60; ++i) pts.push_back({ManifoldDescriptor::euclidean(3), testutil::random_vector(rng, 3)});
    const auto data = DatasetTable::from_points(pts);
    const Eigen::MatrixXd z = transform(fit_tangent_pca(data, 3), data);
    for (int i = 0; i < 60; ++i) {
        for (int j = 0; j < 60; ++j) {
            EXPECT_NEAR((z.row(i) - z.row(j)).norm(), dist(data.points[static_cast<std::size_t>(i)],
                                                           data.points[static_cast<std::size_t>(j)]), 1e-8);
        }
    }
}

TEST(Transform, MatchesDirectProjectionOracle) {
    const auto data = synthetic::random_points(ManifoldDescriptor::spd(3), 50, 7, 0.4);
    const auto model = fit_tangent_pca(data, 3);
    const Eigen::MatrixXd t = tangent_coords(model.base_point, data.points);
    Eigen::MatrixXd ref(50, 3);
    for (Eigen::Index i = 0; i < 50; ++i) {
        for (Eigen::Index k = 0; k < 3; ++k) ref(i, k) = t.row(i).dot(model.components.row(k));
    }
    EXPECT_LT((transform(model, data) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Transform, FullReconstruction) {
    const auto data = synthetic::random_points(ManifoldDescriptor::spd(2), 30, 8);
    const auto model = fit_tangent_pca(data, 3);
    const Eigen::MatrixXd t = tangent_coords(model.base_point, data.points);
    EXPECT_LT((transform(model, data) * model.components - t).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(TangentPca, SphereRotationEquivariance) {
    std::mt19937_64 rng(9);
    auto data = synthetic::random_points(ManifoldDescriptor::sphere(4), 80, 10);
    for (auto& p : data.points) p.coords[0] = std::abs(p.coords[0]) + 1.5, p.coords.normalize();
    const Eigen::MatrixXd r = testutil::random_rotation(rng, 4);
    auto rotated = data;
    for (auto& p : rotated.points) p.coords = r * p.coords;
    const auto a = fit_tangent_pca(data, 3), b = fit_tangent_pca(rotated, 3);
    EXPECT_LT((r * a.base_point.coords - b.base_point.coords).norm(), 1e-8);
    EXPECT_LT((a.explained_variance - b.explained_variance).cwiseAbs().maxCoeff(), 1e-8);
}
