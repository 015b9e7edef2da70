#include "riesne/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "riesne/errors.hpp"

namespace riesne::synthetic {

DatasetTable random_points(const ManifoldDescriptor& m, std::size_t n, std::uint64_t seed, double spread) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DatasetTable t;
    t.manifold = m;
    const auto size = static_cast<Eigen::Index>(m.coord_size());
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd v(size);
        switch (m.family) {
            case ManifoldFamily::Euclidean:
                for (Eigen::Index k = 0; k < size; ++k) v[k] = normal(rng);
                break;
            case ManifoldFamily::Sphere:
                do {
                    for (Eigen::Index k = 0; k < size; ++k) v[k] = normal(rng);
                } while (v.norm() == 0.0);
                v.normalize();
                break;
            case ManifoldFamily::SPD: {
                const auto side = static_cast<Eigen::Index>(m.ambient_dim);
                Eigen::MatrixXd s(side, side);
                for (Eigen::Index a = 0; a < side; ++a) {
                    for (Eigen::Index b = a; b < side; ++b) s(a, b) = s(b, a) = spread * normal(rng);
                }
                v = spd::flatten(spd::sym_exp(s));
                break;
            }
        }
        t.points.push_back({m, std::move(v)});
        t.ids.push_back(std::to_string(i));
    }
    return t;
}

DatasetTable two_blobs(std::size_t n, std::size_t d, double separation, std::uint64_t seed) {
    if (d < 1) throw InvalidArgument("two_blobs needs d >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DatasetTable t;
    t.manifold = ManifoldDescriptor::euclidean(d);
    t.labels.emplace();
    for (std::size_t i = 0; i < n; ++i) {
        const int blob = i < n / 2 ? 0 : 1;
        Eigen::VectorXd v(static_cast<Eigen::Index>(d));
        for (auto& x : v) x = normal(rng);
        v[0] += (blob == 0 ? -0.5 : 0.5) * separation;
        t.points.push_back({t.manifold, std::move(v)});
        t.labels->push_back(blob);
        t.ids.push_back(std::to_string(i));
    }
    return t;
}

TimeSeries drifting_prices(std::size_t days, std::size_t assets, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<double> base_vol(assets), phase(assets), beta0(assets), beta1(assets);
    for (std::size_t k = 0; k < assets; ++k) {
        base_vol[k] = 0.01 + 0.03 * unif(rng);
        phase[k] = 2.0 * std::numbers::pi * unif(rng);
        beta0[k] = -0.2 + 0.4 * unif(rng);
        beta1[k] = 0.5 + 0.5 * unif(rng);
    }

    TimeSeries ts;
    ts.values.resize(static_cast<Eigen::Index>(days), static_cast<Eigen::Index>(assets));
    Eigen::VectorXd log_price = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(assets), std::log(100.0));
    for (std::size_t day = 0; day < days; ++day) {
        const double s = static_cast<double>(day) / static_cast<double>(std::max<std::size_t>(days - 1, 1));
        const double market = normal(rng);
        for (std::size_t k = 0; k < assets; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double vol = base_vol[k] * std::exp(0.7 * std::sin(2.0 * std::numbers::pi * s + phase[k]));
            const double beta = (1.0 - s) * beta0[k] + s * beta1[k];
            const double idio = std::sqrt(std::max(1.0 - beta * beta, 0.05));
            log_price[kk] += vol * (beta * market + idio * normal(rng));
            ts.values(static_cast<Eigen::Index>(day), kk) = std::exp(log_price[kk]);
        }
        ts.timestamps.push_back("d" + std::to_string(day));
    }
    return ts;
}

}  // namespace riesne::synthetic
