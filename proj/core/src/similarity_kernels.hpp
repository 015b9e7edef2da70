#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include <Eigen/Dense>

#include "riesne/embedding.hpp"

namespace riesne::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Low-dimensional similarity s(a, b) and the derivative of log s with respect
/// to a, on raw coordinate arrays of length `width`.
class Kernel {
public:
    explicit Kernel(const TargetSpace& target)
        : family_(target.family),
          sphere_(target.descriptor.family == ManifoldFamily::Sphere),
          width_(target.descriptor.coord_size()),
          log_norm_(-0.5 * static_cast<double>(target.descriptor.intrinsic_dim()) * std::log(2.0 * std::numbers::pi)) {}

    std::size_t width() const { return width_; }

    double similarity(const double* a, const double* b) const {
        switch (family_) {
            case SimilarityFamily::StudentT: return 1.0 / (1.0 + sq_dist(a, b));
            case SimilarityFamily::VonMisesFisher: return std::exp(dot(a, b));
            case SimilarityFamily::Brownian: {
                const double d = sphere_ ? sphere_angle(a, b) : std::sqrt(sq_dist(a, b));
                return std::exp(log_norm_ - 0.5 * d * d);
            }
        }
        return 0.0;
    }

    template <class A, class B>
    double similarity(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
        const Eigen::VectorXd ac = a, bc = b;
        return similarity(ac.data(), bc.data());
    }

    /// out += coeff * d/da log s(a, b). For the sphere Brownian kernel this is
    /// already the tangent (Riemannian) derivative.
    void add_dlog(const double* a, const double* b, double coeff, double* out) const {
        switch (family_) {
            case SimilarityFamily::StudentT: {
                const double s = 1.0 / (1.0 + sq_dist(a, b));
                for (std::size_t k = 0; k < width_; ++k) out[k] -= 2.0 * coeff * s * (a[k] - b[k]);
                return;
            }
            case SimilarityFamily::VonMisesFisher:
                for (std::size_t k = 0; k < width_; ++k) out[k] += coeff * b[k];
                return;
            case SimilarityFamily::Brownian:
                if (!sphere_) {
                    for (std::size_t k = 0; k < width_; ++k) out[k] -= coeff * (a[k] - b[k]);
                    return;
                }
                {
                    // Log map of b at a, theta * u / |u| with u = b - (a.b) a.
                    const double ab = dot(a, b);
                    double un2 = 0.0;
                    for (std::size_t k = 0; k < width_; ++k) {
                        const double u = b[k] - ab * a[k];
                        un2 += u * u;
                    }
                    if (un2 == 0.0) return;
                    const double f = coeff * sphere_angle(a, b) / std::sqrt(un2);
                    for (std::size_t k = 0; k < width_; ++k) out[k] += f * (b[k] - ab * a[k]);
                    return;
                }
        }
    }

private:
    double dot(const double* a, const double* b) const {
        double s = 0.0;
        for (std::size_t k = 0; k < width_; ++k) s += a[k] * b[k];
        return s;
    }
    double sq_dist(const double* a, const double* b) const {
        double s = 0.0;
        for (std::size_t k = 0; k < width_; ++k) {
            const double d = a[k] - b[k];
            s += d * d;
        }
        return s;
    }
    double sphere_angle(const double* a, const double* b) const {
        double dm = 0.0, dp = 0.0;
        for (std::size_t k = 0; k < width_; ++k) {
            dm += (a[k] - b[k]) * (a[k] - b[k]);
            dp += (a[k] + b[k]) * (a[k] + b[k]);
        }
        return 2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp));
    }

    SimilarityFamily family_;
    bool sphere_;
    std::size_t width_;
    double log_norm_;
};

/// A_a = sum_j W_aj q_{j|a} with W_aj = p_aj / q_aj, over P's support, given
/// the row normalizers z.
Eigen::VectorXd support_weights(const AffinityMatrix& p, const Kernel& kernel, const RowMatrix& y,
                                const Eigen::VectorXd& z, double p_scale, int threads);

/// grad += -sum_{j in supp(a)} 2 p_aj dlog s_aj.
void add_attraction(const AffinityMatrix& p, const Kernel& kernel, const RowMatrix& y, double p_scale,
                    RowMatrix& grad, int threads);

}  // namespace riesne::detail
