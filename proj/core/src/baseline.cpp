#include "riesne/baseline.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "riesne/errors.hpp"

namespace riesne {

TangentPcaModel fit_tangent_pca(const DatasetTable& data, std::size_t d) {
    data.validate();
    const std::size_t dim = data.manifold.intrinsic_dim();
    if (d < 1 || d > dim) throw InvalidArgument("number of components must lie in [1, intrinsic dimension]");
    if (data.size() == 0) throw InvalidArgument("tangent PCA of an empty dataset");

    const MeanResult mean = intrinsic_mean(data.points);
    const Eigen::MatrixXd t = tangent_coords(mean.mean, data.points);
    const auto n = t.rows();
    const Eigen::RowVectorXd center = t.colwise().mean();
    const Eigen::MatrixXd centered = t.rowwise() - center;
    const Eigen::MatrixXd cov =
        n > 1 ? Eigen::MatrixXd((centered.transpose() * centered) / static_cast<double>(n - 1))
              : Eigen::MatrixXd::Zero(t.cols(), t.cols());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");

    // Eigen returns ascending eigenvalues; take them in descending order.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(cov.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return es.eigenvalues()[a] > es.eigenvalues()[b]; });

    TangentPcaModel model;
    model.base_point = mean.mean;
    model.mean_converged = mean.converged;
    model.components.resize(static_cast<Eigen::Index>(d), cov.cols());
    model.explained_variance.resize(static_cast<Eigen::Index>(d));
    for (std::size_t c = 0; c < d; ++c) {
        const auto src = order[c];
        Eigen::VectorXd v = es.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0.0) v = -v;
        model.components.row(static_cast<Eigen::Index>(c)) = v.transpose();
        model.explained_variance[static_cast<Eigen::Index>(c)] = std::max(0.0, es.eigenvalues()[src]);
    }
    return model;
}

Eigen::MatrixXd transform(const TangentPcaModel& model, const DatasetTable& data) {
    data.validate();
    if (!(data.manifold == model.base_point.descriptor)) throw InvalidArgument("data is not on the model's manifold");
    return tangent_coords(model.base_point, data.points) * model.components.transpose();
}

}  // namespace riesne
