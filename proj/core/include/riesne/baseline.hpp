#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "riesne/dataset.hpp"

namespace riesne {

/// PCA in the tangent space at the intrinsic mean.
struct TangentPcaModel {
    ManifoldPoint base_point;
    /// d x intrinsic_dim, rows orthonormal.
    Eigen::MatrixXd components;
    /// Non-increasing, length d.
    Eigen::VectorXd explained_variance;
    bool mean_converged = false;
};

/// Fits tangent-space PCA with `d` components. Covariance uses 1/(n-1)
/// normalization; each component's largest-magnitude entry is made positive.
TangentPcaModel fit_tangent_pca(const DatasetTable& data, std::size_t d);

/// n x d projection of the data's tangent coordinates at the base point onto
/// the model components.
Eigen::MatrixXd transform(const TangentPcaModel& model, const DatasetTable& data);

}  // namespace riesne
