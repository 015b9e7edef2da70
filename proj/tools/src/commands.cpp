#include "commands.hpp"

#include <fstream>
#include <iostream>

#include "riesne/affinity.hpp"
#include "riesne/baseline.hpp"
#include "riesne/embedding.hpp"
#include "riesne/errors.hpp"
#include "riesne/io.hpp"
#include "riesne/metrics.hpp"

namespace riesne::cli {

namespace {

TargetSpace make_target(const std::string& target, const std::string& family, int dim) {
    TargetSpace t;
    const auto d = static_cast<std::size_t>(dim);
    t.descriptor = target == "sphere" ? ManifoldDescriptor::sphere(d + 1) : ManifoldDescriptor::euclidean(d);
    if (family == "auto") {
        t.family = target == "sphere" ? SimilarityFamily::VonMisesFisher : SimilarityFamily::StudentT;
    } else {
        t.family = parse_similarity_family(family);
    }
    t.validate();
    return t;
}

void check_sparse_size(double perplexity, std::size_t n) {
    const std::size_t tau = sparse_neighbor_count(perplexity);
    if (tau > n - 1) {
        throw InvalidArgument("--sparse needs floor(3 * perplexity) <= n - 1; perplexity " + format_double(perplexity) +
                              " gives " + std::to_string(tau) + " neighbors but there are " + std::to_string(n) +
                              " points");
    }
}

void warn_unconverged(const AffinityBuild& built) {
    if (built.unconverged == 0) return;
    std::cerr << "warning: " << built.unconverged << " of " << built.rows.size()
              << " rows did not reach the target perplexity within " << kCalibrationSteps
              << " bisection steps; their last iterate is used\n";
}

}  // namespace

int run_embed(const EmbedOptions& o) {
    const TargetSpace target = make_target(o.target, o.family, o.dim);
    const DatasetTable data = ingest_csv(o.input, parse_family(o.manifold), o.project);
    if (data.size() < 4) throw DataError("embedding needs at least 4 rows, found " + std::to_string(data.size()));
    if (o.sparse) check_sparse_size(o.perplexity, data.size());

    const AffinityBuild built =
        build_p(data, o.perplexity, o.sparse ? PMode::Sparse : PMode::Dense, {o.seed, o.threads, parse_volume_ratio(o.volume_ratio)});
    warn_unconverged(built);

    OptimizerConfig cfg;
    cfg.iters = o.iters;
    cfg.learning_rate = o.learning_rate;
    cfg.momentum_early = o.momentum_early;
    cfg.momentum_late = o.momentum_late;
    cfg.exaggeration_factor = o.exaggeration;
    cfg.exaggeration_iters = std::min(o.exaggeration_iters, o.iters);
    cfg.bh_theta = o.theta;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.sphere_step = o.sphere_step == "expmap" ? SphereStep::ExpMap : SphereStep::Retraction;
    const bool bh_capable = target.family == SimilarityFamily::StudentT && (o.dim == 2 || o.dim == 3);
    if (o.gradient == "bh") {
        if (!bh_capable) throw InvalidArgument("--gradient bh needs student-t on R^2 or R^3");
        cfg.gradient = GradientMethod::BarnesHut;
    } else if (o.gradient == "auto" && o.sparse && bh_capable) {
        cfg.gradient = GradientMethod::BarnesHut;
    }

    const OptimizeResult result = optimize(built.p, target, cfg);
    emit_outputs(result, data, {o.output, o.svg, o.kl_history});
    std::cerr << "embedded " << data.size() << " points; KL " << format_double(result.kl_history.front().kl) << " -> "
              << format_double(result.kl_history.back().kl) << "\n";
    return 0;
}

int run_baseline(const BaselineOptions& o) {
    const DatasetTable data = ingest_csv(o.input, parse_family(o.manifold), o.project);
    const auto d = static_cast<std::size_t>(o.dim);
    if (d > data.manifold.intrinsic_dim()) {
        throw InvalidArgument("--dim " + std::to_string(d) + " exceeds the manifold dimension " +
                              std::to_string(data.manifold.intrinsic_dim()));
    }
    const TangentPcaModel model = fit_tangent_pca(data, d);
    if (!model.mean_converged) std::cerr << "warning: intrinsic mean did not converge; using the best iterate\n";
    const Eigen::MatrixXd coords = transform(model, data);
    write_embedding_csv(o.output, data.ids, data.labels, coords);
    if (!o.svg.empty()) write_svg(o.svg, coords, data.labels, false);
    return 0;
}

int run_eval(const EvalOptions& o) {
    const DatasetTable data = ingest_csv(o.input, parse_family(o.manifold), o.project);
    const EmbeddingTable emb = read_embedding_csv(o.embedding);
    if (emb.ids != data.ids) {
        throw DataError("embedding rows do not match the input rows (ids differ or are out of order)");
    }
    const auto dim = static_cast<int>(emb.coords.cols()) - (o.target == "sphere" ? 1 : 0);
    if (dim < 1) throw DataError("embedding has too few coordinate columns for the target");
    const TargetSpace target = make_target(o.target, o.family, dim);

    EmbeddingState state;
    state.descriptor = target.descriptor;
    state.points = emb.coords;
    state.velocity = Eigen::MatrixXd::Zero(emb.coords.rows(), emb.coords.cols());
    const DatasetTable emb_table = state.to_table();
    emb_table.validate();
    for (const auto& p : emb_table.points) validate_point(p, 1e-6);

    const auto k = static_cast<std::size_t>(o.k);
    nlohmann::json report;
    const auto& labels = data.labels ? data.labels : emb.labels;
    if (labels) {
        report["knn_accuracy"] = knn_label_accuracy(emb_table, *labels, k);
    } else {
        report["knn_accuracy"] = nullptr;
    }
    report["trustworthiness"] = trustworthiness(data, emb_table, k);

    if (o.sparse) check_sparse_size(o.perplexity, data.size());
    const AffinityBuild built =
        build_p(data, o.perplexity, o.sparse ? PMode::Sparse : PMode::Dense, {o.seed, o.threads, parse_volume_ratio(o.volume_ratio)});
    warn_unconverged(built);
    report["final_kl"] = kl_cost(built.p, state, target);

    const std::string text = report.dump(2) + "\n";
    if (o.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(o.output);
        if (!(out << text)) throw IoError("failed writing '" + o.output + "'");
    }
    return 0;
}

int run_ingest_cov(const IngestCovOptions& o) {
    TimeSeries series = read_series_csv(o.input);
    if (o.log_returns) series = log_returns(series);
    const auto window = static_cast<std::size_t>(o.window);
    if (static_cast<std::size_t>(series.values.rows()) < window) {
        throw DataError("series has " + std::to_string(series.values.rows()) + " rows" +
                        (o.log_returns ? " of returns" : "") + ", fewer than the window of " +
                        std::to_string(window));
    }
    const DatasetTable covs = rolling_covariance(series.values, window, series.timestamps);
    write_dataset_csv(covs, o.output);
    std::cerr << "wrote " << covs.size() << " covariance matrices of size " << covs.manifold.ambient_dim << "\n";
    return 0;
}

}  // namespace riesne::cli
