#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "riesne/dataset.hpp"

namespace riesne {

/// Wraps an n x d coordinate matrix as Euclidean points.
DatasetTable euclidean_table(const Eigen::MatrixXd& coords);

/// Fraction of points whose majority label among their k nearest embedding
/// neighbors equals their own. Vote ties go to the smaller label.
double knn_label_accuracy(const DatasetTable& embedding, const std::vector<int>& labels, std::size_t k);

/// Trustworthiness of an embedding with respect to the original data, with
/// original-space ranks computed under the data manifold's distance.
double trustworthiness(const DatasetTable& data, const DatasetTable& embedding, std::size_t k);

/// Fraction of consecutive pairs (order[i], order[i+1]) where the second point
/// is among the k nearest embedding neighbors of the first.
double sequential_neighbor_rate(const DatasetTable& embedding, const std::vector<std::size_t>& order, std::size_t k);

}  // namespace riesne
