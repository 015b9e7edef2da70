#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "riesne/geometry.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    return random_matrix(rng, n, 1, scale).col(0);
}

inline riesne::ManifoldPoint random_point(std::mt19937_64& rng, const riesne::ManifoldDescriptor& m) {
    using riesne::ManifoldFamily;
    const auto size = static_cast<Eigen::Index>(m.coord_size());
    switch (m.family) {
        case ManifoldFamily::Euclidean: return {m, random_vector(rng, size)};
        case ManifoldFamily::Sphere: return {m, random_vector(rng, size).normalized()};
        case ManifoldFamily::SPD: {
            const auto n = static_cast<Eigen::Index>(m.ambient_dim);
            const Eigen::MatrixXd a = random_matrix(rng, n, n, 0.6);
            const Eigen::MatrixXd s = 0.5 * (a + a.transpose());
            return {m, riesne::spd::flatten(riesne::spd::sym_exp(s))};
        }
    }
    return {m, {}};
}

inline Eigen::MatrixXd random_rotation(std::mt19937_64& rng, Eigen::Index n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n, n));
    return qr.householderQ();
}

}  // namespace testutil
