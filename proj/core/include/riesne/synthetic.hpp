#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "riesne/dataset.hpp"
#include "riesne/io.hpp"

namespace riesne::synthetic {

/// Random points: standard normal for Euclidean, uniform for the sphere, and
/// exp(S) with S a random symmetric matrix of entry scale `spread` for SPD.
DatasetTable random_points(const ManifoldDescriptor& m, std::size_t n, std::uint64_t seed, double spread = 0.25);

/// `n` points in R^d split evenly between Gaussian blobs centered at
/// +-separation/2 on the first axis. Labels are the blob index.
DatasetTable two_blobs(std::size_t n, std::size_t d, double separation, std::uint64_t seed);

/// Daily prices of `assets` series whose covariance drifts smoothly over
/// `days`: volatilities oscillate slowly and market-factor loadings trend,
/// so rolling covariances trace a one-dimensional path.
TimeSeries drifting_prices(std::size_t days, std::size_t assets, std::uint64_t seed);

}  // namespace riesne::synthetic
