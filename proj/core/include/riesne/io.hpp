#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "riesne/dataset.hpp"
#include "riesne/embedding.hpp"

namespace riesne {

/// Reads observations from a CSV file with a header row.
///
/// An `id` column and an integer `label` column are optional; every other
/// column is a numeric feature. SPD data is given as the row-major upper
/// triangle of each matrix, so the feature count must be n(n+1)/2. With
/// `project`, rows are projected onto the manifold; otherwise rows that
/// violate the manifold invariants are rejected.
DatasetTable ingest_csv(const std::string& path, ManifoldFamily family, bool project);

/// Writes a dataset in the format read by ingest_csv.
void write_dataset_csv(const DatasetTable& data, const std::string& path);

/// A T x m numeric table with one timestamp per row.
struct TimeSeries {
    Eigen::MatrixXd values;
    std::vector<std::string> timestamps;
};

/// Reads a series CSV. A leading `date`, `time`, `timestamp` or `id` column is
/// used for the timestamps; otherwise rows are numbered from 0.
TimeSeries read_series_csv(const std::string& path);

/// Element-wise log returns log(x_t / x_{t-1}); the result has T-1 rows.
TimeSeries log_returns(const TimeSeries& prices);

/// Sample covariances (1/(window-1)) over sliding windows, each regularized
/// by +kSpdEpsilon * I. Ids are the timestamps of each window's last row.
DatasetTable rolling_covariance(const Eigen::MatrixXd& series, std::size_t window,
                                const std::vector<std::string>& timestamps = {});

/// Embedding coordinates as read back from an `id,label,y1..yd` file.
struct EmbeddingTable {
    std::vector<std::string> ids;
    std::optional<std::vector<int>> labels;
    Eigen::MatrixXd coords;
};

void write_embedding_csv(const std::string& path, const std::vector<std::string>& ids,
                         const std::optional<std::vector<int>>& labels, const Eigen::MatrixXd& coords);
EmbeddingTable read_embedding_csv(const std::string& path);

void write_kl_history_csv(const std::string& path, const std::vector<KlRecord>& history);

/// Static scatter plot with one circle per point, colored by label. Sphere
/// embeddings in R^3 are drawn in longitude/latitude.
void write_svg(const std::string& path, const Eigen::MatrixXd& coords, const std::optional<std::vector<int>>& labels,
               bool spherical);

struct OutputPaths {
    std::string coordinates;
    std::string svg;
    std::string kl_history;
};

/// Writes the coordinates CSV and, when their paths are non-empty, the SVG
/// scatter and the KL history.
void emit_outputs(const OptimizeResult& result, const DatasetTable& table, const OutputPaths& paths);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace riesne
