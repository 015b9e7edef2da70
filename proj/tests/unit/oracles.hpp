#pragma once

// Reference computations used only by the tests. Each one follows the plain
// textbook formula and shares no code path with the library internals.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Gaussian SNE joint P from squared Euclidean distances with per-row
/// variances: p_{j|i} proportional to exp(-|x_i - x_j|^2 / (2 sigma_i^2)).
inline Eigen::MatrixXd gaussian_sne_p(const Eigen::MatrixXd& x, const std::vector<double>& sigma2) {
    const auto n = x.rows();
    Eigen::MatrixXd cond = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // Subtract the row's smallest exponent so nothing underflows.
        double min_d2 = INFINITY;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) min_d2 = std::min(min_d2, (x.row(i) - x.row(j)).squaredNorm());
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d2 = (x.row(i) - x.row(j)).squaredNorm();
            cond(i, j) = std::exp(-(d2 - min_d2) / (2.0 * sigma2[static_cast<std::size_t>(i)]));
        }
        cond.row(i) /= cond.row(i).sum();
    }
    return (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
}

/// Q by the direct double loop: q_{j|i} = s_ij / sum_{k != i} s_ik, then
/// symmetrized.
inline Eigen::MatrixXd direct_q(std::size_t n, const std::function<double(std::size_t, std::size_t)>& s) {
    Eigen::MatrixXd cond = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double z = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) z += s(i, k);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) cond(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s(i, j) / z;
        }
    }
    return (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
}

/// KL(P || Q) by a double loop over p_ij > 0.
inline double direct_kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    double c = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (i != j && p(i, j) > 0.0) c += p(i, j) * std::log(p(i, j) / q(i, j));
        }
    }
    return c;
}

/// Central differences of f at x with step h.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        g[k] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

/// Entropy in bits of the row distribution with weights h_j exp(-d_j^2/(2t)).
inline double row_entropy_bits(const std::vector<double>& d, const std::vector<double>& h, double t) {
    std::vector<double> w(d.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        w[j] = h[j] * std::exp(-d[j] * d[j] / (2.0 * t));
        sum += w[j];
    }
    double hbits = 0.0;
    for (double v : w) {
        const double p = v / sum;
        if (p > 0.0) hbits -= p * std::log2(p);
    }
    return hbits;
}

/// Solves entropy(t) = log2(perplexity) by plain bisection on a wide bracket.
inline double bisect_time(const std::vector<double>& d, const std::vector<double>& h, double perplexity) {
    double lo = 1e-8, hi = 1e8;
    const double target = std::log2(perplexity);
    while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        (row_entropy_bits(d, h, mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Matrix logarithm / exponential / square root of a symmetric matrix by
/// eigendecomposition.
inline Eigen::MatrixXd sym_fn(const Eigen::MatrixXd& a, double (*f)(double)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    return es.eigenvectors() * es.eigenvalues().unaryExpr(f).asDiagonal() * es.eigenvectors().transpose();
}

/// Geometric mean A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}.
inline Eigen::MatrixXd geometric_mean(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::MatrixXd s = sym_fn(a, [](double v) { return std::sqrt(v); });
    const Eigen::MatrixXd is = sym_fn(a, [](double v) { return 1.0 / std::sqrt(v); });
    return s * sym_fn(is * b * is, [](double v) { return std::sqrt(v); }) * s;
}

/// 0.5 * log det of the affine-invariant metric Gram matrix at P, over the
/// basis {E_kl} of symmetric matrices, <U, V>_P = tr(P^-1 U P^-1 V).
inline double half_log_det_metric(const Eigen::MatrixXd& p) {
    const auto n = p.rows();
    std::vector<Eigen::MatrixXd> basis;
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = k; l < n; ++l) {
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
            e(k, l) = e(l, k) = 1.0;
            basis.push_back(e);
        }
    }
    const Eigen::MatrixXd pinv = p.inverse();
    const auto m = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd g(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            g(a, b) = (pinv * basis[static_cast<std::size_t>(a)] * pinv * basis[static_cast<std::size_t>(b)]).trace();
        }
    }
    return 0.5 * std::log(g.determinant());
}

}  // namespace oracle
