#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace riesne {

enum class ManifoldFamily { Euclidean, Sphere, SPD };

std::string to_string(ManifoldFamily family);
ManifoldFamily parse_family(const std::string& name);

/// Identifies a manifold family and its size.
///
/// `ambient_dim` is the vector length for Euclidean and Sphere, and the matrix
/// side for SPD. Points are stored as flat coordinate vectors; SPD matrices are
/// stored row-major with all n*n entries.
struct ManifoldDescriptor {
    ManifoldFamily family = ManifoldFamily::Euclidean;
    std::size_t ambient_dim = 1;

    static ManifoldDescriptor euclidean(std::size_t dim) { return {ManifoldFamily::Euclidean, dim}; }
    static ManifoldDescriptor sphere(std::size_t ambient) { return {ManifoldFamily::Sphere, ambient}; }
    static ManifoldDescriptor spd(std::size_t side) { return {ManifoldFamily::SPD, side}; }

    /// D for Euclidean, D-1 for the sphere in R^D, n(n+1)/2 for SPD(n).
    std::size_t intrinsic_dim() const;
    /// Length of the flat coordinate vector.
    std::size_t coord_size() const;

    friend bool operator==(const ManifoldDescriptor&, const ManifoldDescriptor&) = default;
};

std::string describe(const ManifoldDescriptor& m);

struct ManifoldPoint {
    ManifoldDescriptor descriptor;
    Eigen::VectorXd coords;
};

/// Ambient representation of a tangent vector at `base`. For SPD this is a
/// symmetric matrix stored row-major.
struct TangentVector {
    ManifoldPoint base;
    Eigen::VectorXd coords;
};

/// Checks the point invariants (unit norm, symmetric positive definite) and
/// throws DataError describing the first violation.
void validate_point(const ManifoldPoint& x, double tol = 1e-9);
bool is_valid_point(const ManifoldPoint& x, double tol = 1e-9);

/// Geodesic distance. Symmetric to the last bit and exactly zero for
/// identical coordinates.
double dist(const ManifoldPoint& x, const ManifoldPoint& y);
double dist(const ManifoldDescriptor& m, const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& y);

TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y);
ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v);

/// Norm of a tangent vector under the metric at its base point.
double tangent_norm(const TangentVector& v);

/// Half the log-determinant of the metric tensor, up to a per-family constant.
/// Zero for Euclidean and Sphere (homogeneous spaces); -(n+1)/2 * log det(P)
/// for SPD(n) in the matrix-entry chart.
double log_volume_density(const ManifoldPoint& x);

/// Smallest eigenvalue kept by SPD projection.
inline constexpr double kSpdEpsilon = 1e-8;

ManifoldPoint project_to_manifold(const Eigen::Ref<const Eigen::VectorXd>& raw, const ManifoldDescriptor& m);

struct MeanResult {
    ManifoldPoint mean;
    bool converged = false;
    int iterations = 0;
    double gradient_norm = 0.0;
};

/// Karcher mean by fixed-point iteration, started from the projected
/// ambient average.
MeanResult intrinsic_mean(std::span<const ManifoldPoint> points, double tol = 1e-9, int max_iter = 200);

/// Rows are log_map(base, x_i) in an orthonormal basis of the tangent space
/// at `base`; the result has intrinsic_dim columns.
Eigen::MatrixXd tangent_coords(const ManifoldPoint& base, std::span<const ManifoldPoint> points);

/// Inverse of tangent_coords for a single row.
TangentVector from_tangent_coords(const ManifoldPoint& base, const Eigen::Ref<const Eigen::VectorXd>& coords);

double polyline_length(std::span<const ManifoldPoint> points);

namespace spd {

Eigen::MatrixXd as_matrix(const Eigen::Ref<const Eigen::VectorXd>& coords, std::size_t n);
Eigen::VectorXd flatten(const Eigen::MatrixXd& m);

/// Matrix functions of symmetric matrices via eigendecomposition.
Eigen::MatrixXd sym_log(const Eigen::MatrixXd& s);
Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& s);
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& s);
Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& s);

}  // namespace spd

}  // namespace riesne
