#include "riesne/embedding.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "riesne/errors.hpp"
#include "riesne/parallel.hpp"
#include "similarity_kernels.hpp"

namespace riesne {

std::string to_string(SimilarityFamily family) {
    switch (family) {
        case SimilarityFamily::StudentT: return "student-t";
        case SimilarityFamily::VonMisesFisher: return "vmf";
        case SimilarityFamily::Brownian: return "brownian";
    }
    return "unknown";
}

SimilarityFamily parse_similarity_family(const std::string& name) {
    if (name == "student-t") return SimilarityFamily::StudentT;
    if (name == "vmf") return SimilarityFamily::VonMisesFisher;
    if (name == "brownian") return SimilarityFamily::Brownian;
    throw InvalidArgument("unknown similarity family '" + name + "' (expected student-t, vmf or brownian)");
}

void TargetSpace::validate() const {
    const auto f = descriptor.family;
    if (descriptor.ambient_dim < 1 || (f == ManifoldFamily::Sphere && descriptor.ambient_dim < 2)) {
        throw InvalidArgument("target dimension too small for " + describe(descriptor));
    }
    switch (family) {
        case SimilarityFamily::StudentT:
            if (f != ManifoldFamily::Euclidean) throw InvalidArgument("student-t similarity needs a Euclidean target");
            return;
        case SimilarityFamily::VonMisesFisher:
            if (f != ManifoldFamily::Sphere) throw InvalidArgument("von Mises-Fisher similarity needs a sphere target");
            return;
        case SimilarityFamily::Brownian:
            if (f == ManifoldFamily::SPD) throw InvalidArgument("Brownian targets support Euclidean and sphere only");
            return;
    }
}

ManifoldPoint EmbeddingState::point(std::size_t i) const {
    return {descriptor, points.row(static_cast<Eigen::Index>(i)).transpose()};
}

DatasetTable EmbeddingState::to_table() const {
    std::vector<ManifoldPoint> pts;
    pts.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) pts.push_back(point(i));
    auto t = DatasetTable::from_points(std::move(pts));
    t.manifold = descriptor;
    return t;
}

void OptimizerConfig::validate() const {
    if (iters < 0) throw InvalidArgument("iters must be non-negative");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
    if (!(momentum_early >= 0.0 && momentum_early < 1.0) || !(momentum_late >= 0.0 && momentum_late < 1.0)) {
        throw InvalidArgument("momentum must lie in [0, 1)");
    }
    if (!(exaggeration_factor > 0.0)) throw InvalidArgument("exaggeration_factor must be positive");
    if (exaggeration_iters < 0 || exaggeration_iters > iters) {
        throw InvalidArgument("exaggeration_iters must lie in [0, iters]");
    }
    if (!(bh_theta >= 0.0)) throw InvalidArgument("theta must be non-negative");
    if (kl_interval < 1) throw InvalidArgument("kl_interval must be positive");
}

double s_low(const ManifoldPoint& yi, const ManifoldPoint& yj, const TargetSpace& target) {
    target.validate();
    if (!(yi.descriptor == target.descriptor) || !(yj.descriptor == target.descriptor)) {
        throw InvalidArgument("points are not on the target manifold");
    }
    return detail::Kernel(target).similarity(yi.coords, yj.coords);
}

namespace {

void check_state(const EmbeddingState& state, const TargetSpace& target) {
    target.validate();
    if (!(state.descriptor == target.descriptor)) throw InvalidArgument("embedding state is not on the target manifold");
    if (static_cast<std::size_t>(state.points.cols()) != target.descriptor.coord_size()) {
        throw InvalidArgument("embedding coordinates have the wrong width");
    }
}

void check_p(const AffinityMatrix& p, const EmbeddingState& state) {
    if (p.n() != state.size()) throw InvalidArgument("P and the embedding differ in size");
    if (state.size() < 2) throw InvalidArgument("need at least two points");
}

// Row normalizers Z_a = sum_{j != a} s_aj.
Eigen::VectorXd exact_normalizers(const detail::Kernel& kernel, const detail::RowMatrix& y, int threads) {
    const auto n = y.rows();
    Eigen::VectorXd z(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ai) {
        const auto a = static_cast<Eigen::Index>(ai);
        double sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != a) sum += kernel.similarity(y.row(a).data(), y.row(j).data());
        }
        z[a] = sum;
    });
    return z;
}

}  // namespace

namespace detail {

Eigen::VectorXd support_weights(const AffinityMatrix& p, const Kernel& kernel, const RowMatrix& y,
                                const Eigen::VectorXd& z, double p_scale, int threads) {
    const auto n = y.rows();
    const double two_n = 2.0 * static_cast<double>(n);
    Eigen::VectorXd a_w(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ai) {
        const auto a = static_cast<Eigen::Index>(ai);
        double acc = 0.0;
        p.for_each_in_row(ai, [&](std::size_t jj, double pij) {
            const auto j = static_cast<Eigen::Index>(jj);
            const double s = kernel.similarity(y.row(a).data(), y.row(j).data());
            const double q = (s / z[a] + s / z[j]) / two_n;
            acc += p_scale * std::max(pij, kProbabilityFloor) * (s / z[a]) / q;
        });
        a_w[a] = acc;
    });
    return a_w;
}

void add_attraction(const AffinityMatrix& p, const Kernel& kernel, const RowMatrix& y, double p_scale,
                    RowMatrix& grad, int threads) {
    parallel_for(static_cast<std::size_t>(y.rows()), threads, [&](std::size_t ai) {
        const auto a = static_cast<Eigen::Index>(ai);
        p.for_each_in_row(ai, [&](std::size_t jj, double pij) {
            kernel.add_dlog(y.row(a).data(), y.row(static_cast<Eigen::Index>(jj)).data(),
                            -2.0 * p_scale * std::max(pij, kProbabilityFloor), grad.row(a).data());
        });
    });
}

}  // namespace detail

namespace {

void project_rows(const TargetSpace& target, const detail::RowMatrix& y, detail::RowMatrix& grad) {
    if (target.descriptor.family != ManifoldFamily::Sphere) return;
    for (Eigen::Index a = 0; a < y.rows(); ++a) {
        grad.row(a) -= grad.row(a).dot(y.row(a)) * y.row(a);
    }
}

}  // namespace

AffinityMatrix build_q(const EmbeddingState& state, const TargetSpace& target) {
    check_state(state, target);
    const auto n = static_cast<Eigen::Index>(state.size());
    if (n < 2) throw InvalidArgument("build_q needs at least two points");
    const detail::Kernel kernel(target);
    const detail::RowMatrix y = state.points;
    Eigen::MatrixXd cond = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) cond(i, j) = kernel.similarity(y.row(i).data(), y.row(j).data());
        }
        cond.row(i) /= cond.row(i).sum();
    }
    Eigen::MatrixXd q = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
    return AffinityMatrix(std::move(q), AffinityKind::JointQ);
}

double kl_cost(const AffinityMatrix& p, const AffinityMatrix& q) {
    if (p.n() != q.n()) throw InvalidArgument("P and Q differ in size");
    double c = 0.0;
    for (std::size_t i = 0; i < p.n(); ++i) {
        p.for_each_in_row(i, [&](std::size_t j, double pij) {
            const double pf = std::max(pij, kProbabilityFloor);
            c += pf * std::log(pf / std::max(q.value(i, j), kProbabilityFloor));
        });
    }
    return c;
}

double kl_cost(const AffinityMatrix& p, const EmbeddingState& state, const TargetSpace& target, double p_scale) {
    check_state(state, target);
    check_p(p, state);
    const detail::Kernel kernel(target);
    const detail::RowMatrix y = state.points;
    const Eigen::VectorXd z = exact_normalizers(kernel, y, 1);
    const double two_n = 2.0 * static_cast<double>(state.size());
    double c = 0.0;
    for (std::size_t ai = 0; ai < state.size(); ++ai) {
        const auto a = static_cast<Eigen::Index>(ai);
        p.for_each_in_row(ai, [&](std::size_t jj, double pij) {
            const auto j = static_cast<Eigen::Index>(jj);
            const double s = kernel.similarity(y.row(a).data(), y.row(j).data());
            const double q = (s / z[a] + s / z[j]) / two_n;
            const double pf = p_scale * std::max(pij, kProbabilityFloor);
            c += pf * std::log(pf / q);
        });
    }
    return c;
}

Eigen::MatrixXd kl_gradient_exact(const AffinityMatrix& p, const EmbeddingState& state, const TargetSpace& target,
                                  double p_scale, int threads) {
    check_state(state, target);
    check_p(p, state);
    const detail::Kernel kernel(target);
    const detail::RowMatrix y = state.points;
    const auto n = y.rows();
    const double inv_n = 1.0 / static_cast<double>(n);

    const Eigen::VectorXd z = exact_normalizers(kernel, y, threads);
    const Eigen::VectorXd w = detail::support_weights(p, kernel, y, z, p_scale, threads).cwiseQuotient(z);

    detail::RowMatrix grad = detail::RowMatrix::Zero(n, y.cols());
    detail::add_attraction(p, kernel, y, p_scale, grad, threads);
    // Repulsion, (1/n) sum_j s_aj (w_a + w_j) dlog s_aj with w = A / Z.
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ai) {
        const auto a = static_cast<Eigen::Index>(ai);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == a) continue;
            const double s = kernel.similarity(y.row(a).data(), y.row(j).data());
            kernel.add_dlog(y.row(a).data(), y.row(j).data(), inv_n * s * (w[a] + w[j]), grad.row(a).data());
        }
    });
    project_rows(target, y, grad);
    return grad;
}

EmbeddingState init_embedding(std::size_t n, const TargetSpace& target, std::uint64_t seed) {
    target.validate();
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(target.descriptor.coord_size());
    std::mt19937_64 rng(seed);
    const bool sphere = target.descriptor.family == ManifoldFamily::Sphere;
    std::normal_distribution<double> normal(0.0, sphere ? 1.0 : 1e-4);

    EmbeddingState state;
    state.descriptor = target.descriptor;
    state.points.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index k = 0; k < cols; ++k) state.points(i, k) = normal(rng);
        if (sphere) {
            while (state.points.row(i).norm() == 0.0) {
                for (Eigen::Index k = 0; k < cols; ++k) state.points(i, k) = normal(rng);
            }
            state.points.row(i).normalize();
        }
    }
    state.velocity = Eigen::MatrixXd::Zero(rows, cols);
    return state;
}

OptimizeResult optimize(const AffinityMatrix& p, const TargetSpace& target, const OptimizerConfig& config,
                        std::optional<EmbeddingState> initial) {
    config.validate();
    target.validate();
    const std::size_t n = p.n();
    OptimizeResult result;
    result.state = initial ? std::move(*initial) : init_embedding(n, target, config.seed);
    EmbeddingState& state = result.state;
    check_state(state, target);
    check_p(p, state);
    if (state.velocity.rows() != state.points.rows() || state.velocity.cols() != state.points.cols()) {
        state.velocity = Eigen::MatrixXd::Zero(state.points.rows(), state.points.cols());
    }

    const bool sphere = target.descriptor.family == ManifoldFamily::Sphere;
    const bool use_bh = config.gradient == GradientMethod::BarnesHut;

    result.kl_history.push_back({state.iteration, kl_cost(p, state, target)});
    for (int it = 0; it < config.iters; ++it) {
        const bool exaggerate = it < config.exaggeration_iters;
        state.exaggeration_active = exaggerate;
        const double scale = exaggerate ? config.exaggeration_factor : 1.0;
        const double momentum = exaggerate ? config.momentum_early : config.momentum_late;

        const Eigen::MatrixXd grad = use_bh ? kl_gradient_bh(p, state, target, config.bh_theta, scale, config.threads)
                                            : kl_gradient_exact(p, state, target, scale, config.threads);
        state.velocity = momentum * state.velocity - config.learning_rate * grad;

        if (!sphere) {
            state.points += state.velocity;
        } else {
            for (Eigen::Index a = 0; a < state.points.rows(); ++a) {
                Eigen::VectorXd y = state.points.row(a).transpose();
                Eigen::VectorXd v = state.velocity.row(a).transpose();
                v -= v.dot(y) * y;
                if (config.sphere_step == SphereStep::ExpMap) {
                    const double theta = v.norm();
                    if (theta > 0.0) y = std::cos(theta) * y + (std::sin(theta) / theta) * v;
                } else {
                    y += v;
                }
                y.normalize();
                v -= v.dot(y) * y;
                state.points.row(a) = y.transpose();
                state.velocity.row(a) = v.transpose();
            }
        }
        ++state.iteration;

        if (!state.points.allFinite()) {
            throw NumericError("embedding diverged (non-finite coordinate) at iteration " + std::to_string(it));
        }
        if ((it + 1) % config.kl_interval == 0 || it + 1 == config.iters) {
            result.kl_history.push_back({state.iteration, kl_cost(p, state, target)});
        }
    }
    state.exaggeration_active = false;
    return result;
}

}  // namespace riesne
