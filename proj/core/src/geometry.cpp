#include "riesne/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "riesne/errors.hpp"

namespace riesne {

namespace {

void require_same(const ManifoldDescriptor& a, const ManifoldDescriptor& b) {
    if (!(a == b)) {
        throw InvalidArgument("manifold mismatch: " + describe(a) + " vs " + describe(b));
    }
}

// Eigendecomposition of a symmetric matrix, throwing NumericError on failure.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success) {
        throw NumericError("symmetric eigendecomposition failed");
    }
    return es;
}

template <class F>
Eigen::MatrixXd apply_spectral(const Eigen::MatrixXd& s, F&& f) {
    auto es = eig(s);
    Eigen::VectorXd d = es.eigenvalues().unaryExpr(f);
    Eigen::MatrixXd out = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

// Square root and inverse square root of an SPD matrix from one solve.
struct SpdRoots {
    Eigen::MatrixXd sqrt;
    Eigen::MatrixXd inv_sqrt;
};

SpdRoots spd_roots(const Eigen::MatrixXd& p) {
    auto es = eig(p);
    const Eigen::VectorXd& d = es.eigenvalues();
    if (d.minCoeff() <= 0.0) {
        throw NumericError("matrix is not positive definite");
    }
    const Eigen::MatrixXd& u = es.eigenvectors();
    SpdRoots r;
    r.sqrt = u * d.cwiseSqrt().asDiagonal() * u.transpose();
    r.inv_sqrt = u * d.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
    r.sqrt = 0.5 * (r.sqrt + r.sqrt.transpose());
    r.inv_sqrt = 0.5 * (r.inv_sqrt + r.inv_sqrt.transpose());
    return r;
}

// Lexicographic order on coordinates, used to evaluate symmetric functions
// with a canonical argument order.
bool lex_less(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        if (a[k] != b[k]) return a[k] < b[k];
    }
    return false;
}

double spd_dist(std::size_t n, const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
    const bool swap = lex_less(y, x);
    const Eigen::MatrixXd a = spd::as_matrix(swap ? y : x, n);
    const Eigen::MatrixXd b = spd::as_matrix(swap ? x : y, n);
    // Eigenvalues of a^{-1} b.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(b, a, Eigen::EigenvaluesOnly);
    if (ges.info() != Eigen::Success) {
        throw NumericError("generalized eigendecomposition failed in SPD distance");
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < ges.eigenvalues().size(); ++k) {
        const double lam = ges.eigenvalues()[k];
        if (!(lam > 0.0)) throw NumericError("non-positive generalized eigenvalue in SPD distance");
        const double l = std::log(lam);
        sum += l * l;
    }
    return std::sqrt(sum);
}

// Orthonormal basis of the tangent space of the unit sphere at b, as the
// columns of a Householder reflection that sends b to a coordinate axis.
Eigen::MatrixXd sphere_tangent_basis(const Eigen::VectorXd& b) {
    const Eigen::Index dim = b.size();
    Eigen::Index m = 0;
    b.cwiseAbs().maxCoeff(&m);
    const double s = b[m] >= 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd v = b;
    v[m] += s;
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim, dim) - (2.0 / v.squaredNorm()) * v * v.transpose();
    Eigen::MatrixXd basis(dim, dim - 1);
    for (Eigen::Index j = 0, c = 0; j < dim; ++j) {
        if (j == m) continue;
        basis.col(c++) = h.col(j);
    }
    return basis;
}

}  // namespace

std::string to_string(ManifoldFamily family) {
    switch (family) {
        case ManifoldFamily::Euclidean: return "euclidean";
        case ManifoldFamily::Sphere: return "sphere";
        case ManifoldFamily::SPD: return "spd";
    }
    return "unknown";
}

ManifoldFamily parse_family(const std::string& name) {
    if (name == "euclidean") return ManifoldFamily::Euclidean;
    if (name == "sphere") return ManifoldFamily::Sphere;
    if (name == "spd") return ManifoldFamily::SPD;
    throw InvalidArgument("unknown manifold '" + name + "' (expected euclidean, sphere or spd)");
}

std::size_t ManifoldDescriptor::intrinsic_dim() const {
    switch (family) {
        case ManifoldFamily::Euclidean: return ambient_dim;
        case ManifoldFamily::Sphere: return ambient_dim - 1;
        case ManifoldFamily::SPD: return ambient_dim * (ambient_dim + 1) / 2;
    }
    return 0;
}

std::size_t ManifoldDescriptor::coord_size() const {
    return family == ManifoldFamily::SPD ? ambient_dim * ambient_dim : ambient_dim;
}

std::string describe(const ManifoldDescriptor& m) {
    switch (m.family) {
        case ManifoldFamily::Euclidean: return "R^" + std::to_string(m.ambient_dim);
        case ManifoldFamily::Sphere: return "S^" + std::to_string(m.ambient_dim - 1);
        case ManifoldFamily::SPD: return "SPD(" + std::to_string(m.ambient_dim) + ")";
    }
    return "?";
}

namespace spd {

Eigen::MatrixXd as_matrix(const Eigen::Ref<const Eigen::VectorXd>& coords, std::size_t n) {
    const auto side = static_cast<Eigen::Index>(n);
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(coords.data(), side,
                                                                                                   side);
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
    Eigen::VectorXd out(m.size());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out.data(), m.rows(), m.cols()) = m;
    return out;
}

Eigen::MatrixXd sym_log(const Eigen::MatrixXd& s) {
    return apply_spectral(s, [](double v) {
        if (!(v > 0.0)) throw NumericError("matrix logarithm of a non-positive-definite matrix");
        return std::log(v);
    });
}

Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& s) {
    return apply_spectral(s, [](double v) { return std::exp(v); });
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& s) { return spd_roots(s).sqrt; }

Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& s) { return spd_roots(s).inv_sqrt; }

}  // namespace spd

void validate_point(const ManifoldPoint& x, double tol) {
    const auto& m = x.descriptor;
    if (static_cast<std::size_t>(x.coords.size()) != m.coord_size()) {
        throw DataError("point has " + std::to_string(x.coords.size()) + " coordinates, expected " +
                        std::to_string(m.coord_size()) + " for " + describe(m));
    }
    if (!x.coords.allFinite()) throw DataError("point has non-finite coordinates");
    switch (m.family) {
        case ManifoldFamily::Euclidean: return;
        case ManifoldFamily::Sphere: {
            const double norm = x.coords.norm();
            if (std::abs(norm - 1.0) > tol) {
                throw DataError("point is not on the unit sphere (norm " + std::to_string(norm) + ")");
            }
            return;
        }
        case ManifoldFamily::SPD: {
            const Eigen::MatrixXd a = spd::as_matrix(x.coords, m.ambient_dim);
            if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol) throw DataError("matrix is not symmetric");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
            if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
                throw DataError("matrix is not positive definite");
            }
            return;
        }
    }
}

bool is_valid_point(const ManifoldPoint& x, double tol) {
    try {
        validate_point(x, tol);
        return true;
    } catch (const DataError&) {
        return false;
    }
}

double dist(const ManifoldDescriptor& m, const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& y) {
    switch (m.family) {
        case ManifoldFamily::Euclidean: return (x - y).norm();
        case ManifoldFamily::Sphere:
            // Same angle as arccos(x.y) on unit vectors, without the loss of
            // precision near 0 and pi.
            return 2.0 * std::atan2((x - y).norm(), (x + y).norm());
        case ManifoldFamily::SPD:
            if (x == y) return 0.0;
            return spd_dist(m.ambient_dim, x, y);
    }
    return 0.0;
}

double dist(const ManifoldPoint& x, const ManifoldPoint& y) {
    require_same(x.descriptor, y.descriptor);
    return dist(x.descriptor, x.coords, y.coords);
}

TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y) {
    require_same(x.descriptor, y.descriptor);
    const auto& m = x.descriptor;
    switch (m.family) {
        case ManifoldFamily::Euclidean: return {x, y.coords - x.coords};
        case ManifoldFamily::Sphere: {
            if ((x.coords + y.coords).norm() <= 1e-10) {
                throw DomainError("log map undefined for antipodal points on the sphere");
            }
            const double theta = dist(x, y);
            Eigen::VectorXd u = y.coords - x.coords.dot(y.coords) * x.coords;
            const double un = u.norm();
            if (theta == 0.0 || un == 0.0) return {x, Eigen::VectorXd::Zero(x.coords.size())};
            return {x, (theta / un) * u};
        }
        case ManifoldFamily::SPD: {
            if (x.coords == y.coords) return {x, Eigen::VectorXd::Zero(x.coords.size())};
            const auto roots = spd_roots(spd::as_matrix(x.coords, m.ambient_dim));
            const Eigen::MatrixXd q = spd::as_matrix(y.coords, m.ambient_dim);
            const Eigen::MatrixXd inner = roots.inv_sqrt * q * roots.inv_sqrt;
            Eigen::MatrixXd v = roots.sqrt * spd::sym_log(0.5 * (inner + inner.transpose())) * roots.sqrt;
            return {x, spd::flatten(0.5 * (v + v.transpose()))};
        }
    }
    return {x, {}};
}

ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v) {
    require_same(x.descriptor, v.base.descriptor);
    const auto& m = x.descriptor;
    if (static_cast<std::size_t>(v.coords.size()) != m.coord_size()) {
        throw InvalidArgument("tangent vector size does not match " + describe(m));
    }
    switch (m.family) {
        case ManifoldFamily::Euclidean: return {m, x.coords + v.coords};
        case ManifoldFamily::Sphere: {
            const double theta = v.coords.norm();
            if (theta == 0.0) return x;
            Eigen::VectorXd y = std::cos(theta) * x.coords + (std::sin(theta) / theta) * v.coords;
            return {m, y / y.norm()};
        }
        case ManifoldFamily::SPD: {
            if (v.coords.isZero(0.0)) return x;
            const auto roots = spd_roots(spd::as_matrix(x.coords, m.ambient_dim));
            const Eigen::MatrixXd w = roots.inv_sqrt * spd::as_matrix(v.coords, m.ambient_dim) * roots.inv_sqrt;
            Eigen::MatrixXd y = roots.sqrt * spd::sym_exp(0.5 * (w + w.transpose())) * roots.sqrt;
            return {m, spd::flatten(0.5 * (y + y.transpose()))};
        }
    }
    return x;
}

double tangent_norm(const TangentVector& v) {
    const auto& m = v.base.descriptor;
    if (m.family != ManifoldFamily::SPD) return v.coords.norm();
    const Eigen::MatrixXd is = spd::sym_inv_sqrt(spd::as_matrix(v.base.coords, m.ambient_dim));
    return (is * spd::as_matrix(v.coords, m.ambient_dim) * is).norm();
}

double log_volume_density(const ManifoldPoint& x) {
    const auto& m = x.descriptor;
    if (m.family != ManifoldFamily::SPD) return 0.0;
    const Eigen::MatrixXd a = spd::as_matrix(x.coords, m.ambient_dim);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw NumericError("log volume density: matrix is not positive definite");
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * static_cast<double>(m.ambient_dim + 1) * logdet;
}

ManifoldPoint project_to_manifold(const Eigen::Ref<const Eigen::VectorXd>& raw, const ManifoldDescriptor& m) {
    if (static_cast<std::size_t>(raw.size()) != m.coord_size()) {
        throw InvalidArgument("raw vector has " + std::to_string(raw.size()) + " entries, expected " +
                              std::to_string(m.coord_size()));
    }
    switch (m.family) {
        case ManifoldFamily::Euclidean: return {m, raw};
        case ManifoldFamily::Sphere: {
            const double norm = raw.norm();
            if (norm == 0.0) throw InvalidArgument("cannot project the zero vector onto the sphere");
            return {m, raw / norm};
        }
        case ManifoldFamily::SPD: {
            const Eigen::MatrixXd a = spd::as_matrix(raw, m.ambient_dim);
            return {m, spd::flatten(apply_spectral(0.5 * (a + a.transpose()),
                                                   [](double v) { return std::max(v, kSpdEpsilon); }))};
        }
    }
    return {m, raw};
}

MeanResult intrinsic_mean(std::span<const ManifoldPoint> points, double tol, int max_iter) {
    if (points.empty()) throw InvalidArgument("intrinsic_mean of an empty set");
    const auto& m = points.front().descriptor;
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.coord_size()));
    for (const auto& p : points) {
        require_same(m, p.descriptor);
        avg += p.coords;
    }
    avg /= static_cast<double>(points.size());

    ManifoldPoint mu;
    if (m.family == ManifoldFamily::Sphere && avg.norm() < 1e-12) {
        mu = points.front();
    } else {
        mu = project_to_manifold(avg, m);
    }

    MeanResult best{mu, false, 0, std::numeric_limits<double>::infinity()};
    for (int it = 0; it <= max_iter; ++it) {
        Eigen::VectorXd step = Eigen::VectorXd::Zero(avg.size());
        for (const auto& p : points) step += log_map(mu, p).coords;
        step /= static_cast<double>(points.size());
        const TangentVector v{mu, step};
        const double norm = tangent_norm(v);
        if (norm < best.gradient_norm) best = {mu, false, it, norm};
        if (norm < tol) {
            best.converged = true;
            return best;
        }
        if (it == max_iter) break;
        mu = exp_map(mu, v);
    }
    best.iterations = max_iter;
    return best;
}

Eigen::MatrixXd tangent_coords(const ManifoldPoint& base, std::span<const ManifoldPoint> points) {
    const auto& m = base.descriptor;
    const auto rows = static_cast<Eigen::Index>(points.size());
    const auto cols = static_cast<Eigen::Index>(m.intrinsic_dim());
    Eigen::MatrixXd out(rows, cols);

    auto checked_log = [&](std::size_t i) {
        try {
            return log_map(base, points[i]);
        } catch (const DomainError&) {
            throw DomainError("point " + std::to_string(i) + " is antipodal to the base point");
        }
    };

    switch (m.family) {
        case ManifoldFamily::Euclidean:
            for (Eigen::Index i = 0; i < rows; ++i) out.row(i) = checked_log(static_cast<std::size_t>(i)).coords;
            break;
        case ManifoldFamily::Sphere: {
            const Eigen::MatrixXd basis = sphere_tangent_basis(base.coords);
            for (Eigen::Index i = 0; i < rows; ++i) {
                out.row(i) = basis.transpose() * checked_log(static_cast<std::size_t>(i)).coords;
            }
            break;
        }
        case ManifoldFamily::SPD: {
            const std::size_t n = m.ambient_dim;
            const Eigen::MatrixXd is = spd::sym_inv_sqrt(spd::as_matrix(base.coords, n));
            for (Eigen::Index i = 0; i < rows; ++i) {
                const Eigen::MatrixXd w =
                    is * spd::as_matrix(checked_log(static_cast<std::size_t>(i)).coords, n) * is;
                Eigen::Index c = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    for (std::size_t l = k; l < n; ++l) {
                        const auto kk = static_cast<Eigen::Index>(k), ll = static_cast<Eigen::Index>(l);
                        out(i, c++) = k == l ? w(kk, kk) : std::numbers::sqrt2 * 0.5 * (w(kk, ll) + w(ll, kk));
                    }
                }
            }
            break;
        }
    }
    return out;
}

TangentVector from_tangent_coords(const ManifoldPoint& base, const Eigen::Ref<const Eigen::VectorXd>& coords) {
    const auto& m = base.descriptor;
    if (static_cast<std::size_t>(coords.size()) != m.intrinsic_dim()) {
        throw InvalidArgument("tangent coordinate vector has the wrong length");
    }
    switch (m.family) {
        case ManifoldFamily::Euclidean: return {base, coords};
        case ManifoldFamily::Sphere: return {base, sphere_tangent_basis(base.coords) * coords};
        case ManifoldFamily::SPD: {
            const std::size_t n = m.ambient_dim;
            const auto side = static_cast<Eigen::Index>(n);
            Eigen::MatrixXd w(side, side);
            Eigen::Index c = 0;
            for (Eigen::Index k = 0; k < side; ++k) {
                for (Eigen::Index l = k; l < side; ++l) {
                    if (k == l) {
                        w(k, k) = coords[c++];
                    } else {
                        w(k, l) = w(l, k) = coords[c++] / std::numbers::sqrt2;
                    }
                }
            }
            const Eigen::MatrixXd s = spd::sym_sqrt(spd::as_matrix(base.coords, n));
            return {base, spd::flatten(s * w * s)};
        }
    }
    return {base, coords};
}

double polyline_length(std::span<const ManifoldPoint> points) {
    if (points.size() < 2) throw InvalidArgument("polyline_length needs at least two points");
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) total += dist(points[i - 1], points[i]);
    return total;
}

}  // namespace riesne
