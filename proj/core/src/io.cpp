#include "riesne/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "riesne/errors.hpp"

namespace riesne {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(field);
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;
};

CsvTable read_csv(const std::string& path) {
    auto in = open_in(path);
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw DataError("expected " + std::to_string(t.header.size()) + " fields, found " +
                                std::to_string(fields.size()),
                            lineno);
        }
        t.rows.push_back(std::move(fields));
        t.lines.push_back(lineno);
    }
    if (t.header.empty()) throw DataError("'" + path + "' has no header row");
    return t;
}

std::size_t spd_side_from_entries(std::size_t entries) {
    std::size_t n = 1;
    while (n * (n + 1) / 2 < entries) ++n;
    if (n * (n + 1) / 2 != entries) {
        throw DataError(std::to_string(entries) + " feature columns is not an upper triangle n(n+1)/2");
    }
    return n;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

DatasetTable ingest_csv(const std::string& path, ManifoldFamily family, bool project) {
    const CsvTable csv = read_csv(path);
    std::optional<std::size_t> id_col, label_col;
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
        if (csv.header[c] == "id") {
            id_col = c;
        } else if (csv.header[c] == "label") {
            label_col = c;
        } else {
            feature_cols.push_back(c);
        }
    }
    if (feature_cols.empty()) throw DataError("'" + path + "' has no feature columns");

    ManifoldDescriptor m{family, feature_cols.size()};
    if (family == ManifoldFamily::SPD) m.ambient_dim = spd_side_from_entries(feature_cols.size());
    if (family == ManifoldFamily::Sphere && m.ambient_dim < 2) throw DataError("sphere data needs at least 2 columns");

    DatasetTable table;
    table.manifold = m;
    if (label_col) table.labels.emplace();
    Eigen::VectorXd raw(static_cast<Eigen::Index>(m.coord_size()));
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::size_t line = csv.lines[r];
        std::vector<double> values(feature_cols.size());
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            if (!parse_double(row[feature_cols[f]], values[f])) {
                throw DataError("column '" + csv.header[feature_cols[f]] + "' is not a finite number", line);
            }
        }
        if (family == ManifoldFamily::SPD) {
            const auto n = static_cast<Eigen::Index>(m.ambient_dim);
            std::size_t e = 0;
            for (Eigen::Index k = 0; k < n; ++k) {
                for (Eigen::Index l = k; l < n; ++l, ++e) raw[k * n + l] = raw[l * n + k] = values[e];
            }
        } else {
            for (std::size_t f = 0; f < values.size(); ++f) raw[static_cast<Eigen::Index>(f)] = values[f];
        }

        ManifoldPoint p;
        if (project) {
            try {
                p = project_to_manifold(raw, m);
            } catch (const std::exception& e) {
                throw DataError(e.what(), line);
            }
        } else {
            p = {m, raw};
            try {
                validate_point(p);
            } catch (const DataError& e) {
                throw DataError(e.what(), line);
            }
        }
        table.points.push_back(std::move(p));
        table.ids.push_back(id_col ? row[*id_col] : std::to_string(r));
        if (label_col) {
            int label = 0;
            if (!parse_int(row[*label_col], label)) throw DataError("label is not an integer", line);
            table.labels->push_back(label);
        }
    }
    if (table.points.empty()) throw DataError("'" + path + "' has no data rows");
    return table;
}

void write_dataset_csv(const DatasetTable& data, const std::string& path) {
    auto out = open_out(path);
    const auto& m = data.manifold;
    out << "id";
    if (data.labels) out << ",label";
    if (m.family == ManifoldFamily::SPD) {
        for (std::size_t k = 0; k < m.ambient_dim; ++k) {
            for (std::size_t l = k; l < m.ambient_dim; ++l) out << ",c" << k << '_' << l;
        }
    } else {
        for (std::size_t k = 0; k < m.ambient_dim; ++k) out << ",x" << k;
    }
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << (data.ids.empty() ? std::to_string(i) : data.ids[i]);
        if (data.labels) out << ',' << (*data.labels)[i];
        const auto& c = data.points[i].coords;
        if (m.family == ManifoldFamily::SPD) {
            const auto n = static_cast<Eigen::Index>(m.ambient_dim);
            for (Eigen::Index k = 0; k < n; ++k) {
                for (Eigen::Index l = k; l < n; ++l) out << ',' << format_double(c[k * n + l]);
            }
        } else {
            for (Eigen::Index k = 0; k < c.size(); ++k) out << ',' << format_double(c[k]);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

TimeSeries read_series_csv(const std::string& path) {
    const CsvTable csv = read_csv(path);
    static const std::array<std::string, 4> time_names{"date", "time", "timestamp", "id"};
    const bool has_time = std::find(time_names.begin(), time_names.end(), csv.header.front()) != time_names.end();
    const std::size_t first = has_time ? 1 : 0;
    if (csv.header.size() <= first) throw DataError("'" + path + "' has no value columns");

    TimeSeries ts;
    ts.values.resize(static_cast<Eigen::Index>(csv.rows.size()), static_cast<Eigen::Index>(csv.header.size() - first));
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        for (std::size_t c = first; c < csv.header.size(); ++c) {
            double v = 0.0;
            if (!parse_double(csv.rows[r][c], v)) {
                throw DataError("column '" + csv.header[c] + "' is not a finite number", csv.lines[r]);
            }
            ts.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - first)) = v;
        }
        ts.timestamps.push_back(has_time ? csv.rows[r][0] : std::to_string(r));
    }
    return ts;
}

TimeSeries log_returns(const TimeSeries& prices) {
    const auto t = prices.values.rows();
    if (t < 2) throw DataError("log returns need at least two rows");
    if ((prices.values.array() <= 0.0).any()) throw DataError("log returns need positive prices");
    TimeSeries out;
    out.values = (prices.values.bottomRows(t - 1).array() / prices.values.topRows(t - 1).array()).log().matrix();
    out.timestamps.assign(prices.timestamps.begin() + 1, prices.timestamps.end());
    return out;
}

DatasetTable rolling_covariance(const Eigen::MatrixXd& series, std::size_t window,
                                const std::vector<std::string>& timestamps) {
    const auto t = static_cast<std::size_t>(series.rows());
    const auto m = static_cast<std::size_t>(series.cols());
    if (window < 2) throw InvalidArgument("window must be at least 2");
    if (t < window) throw InvalidArgument("series has fewer rows than the window");
    if (m < 1) throw InvalidArgument("series has no columns");
    if (!timestamps.empty() && timestamps.size() != t) throw InvalidArgument("timestamp count does not match series");

    DatasetTable table;
    table.manifold = ManifoldDescriptor::spd(m);
    const auto w = static_cast<Eigen::Index>(window);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t end = window; end <= t; ++end) {
        const auto block = series.middleRows(static_cast<Eigen::Index>(end - window), w);
        const Eigen::MatrixXd centered = block.rowwise() - block.colwise().mean();
        Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(window - 1);
        cov = 0.5 * (cov + cov.transpose()) + kSpdEpsilon * eye;
        ManifoldPoint p{table.manifold, spd::flatten(cov)};
        try {
            validate_point(p);
        } catch (const DataError& e) {
            throw NumericError(std::string("covariance window ending at row ") + std::to_string(end - 1) + ": " +
                               e.what());
        }
        table.points.push_back(std::move(p));
        table.ids.push_back(timestamps.empty() ? std::to_string(end - 1) : timestamps[end - 1]);
    }
    return table;
}

void write_embedding_csv(const std::string& path, const std::vector<std::string>& ids,
                         const std::optional<std::vector<int>>& labels, const Eigen::MatrixXd& coords) {
    auto out = open_out(path);
    out << "id,label";
    for (Eigen::Index k = 0; k < coords.cols(); ++k) out << ",y" << (k + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        out << (ui < ids.size() ? ids[ui] : std::to_string(i)) << ',';
        if (labels) out << (*labels)[ui];
        for (Eigen::Index k = 0; k < coords.cols(); ++k) out << ',' << format_double(coords(i, k));
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

EmbeddingTable read_embedding_csv(const std::string& path) {
    const CsvTable csv = read_csv(path);
    if (csv.header.size() < 3 || csv.header[0] != "id" || csv.header[1] != "label") {
        throw DataError("'" + path + "' is not an embedding file (expected id,label,y1..yd)");
    }
    EmbeddingTable t;
    const auto d = static_cast<Eigen::Index>(csv.header.size() - 2);
    t.coords.resize(static_cast<Eigen::Index>(csv.rows.size()), d);
    bool any_label = false;
    std::vector<int> labels;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        t.ids.push_back(row[0]);
        if (!row[1].empty()) {
            int label = 0;
            if (!parse_int(row[1], label)) throw DataError("label is not an integer", csv.lines[r]);
            labels.push_back(label);
            any_label = true;
        } else if (any_label) {
            throw DataError("missing label", csv.lines[r]);
        }
        for (Eigen::Index k = 0; k < d; ++k) {
            double v = 0.0;
            if (!parse_double(row[static_cast<std::size_t>(k) + 2], v)) {
                throw DataError("coordinate is not a finite number", csv.lines[r]);
            }
            t.coords(static_cast<Eigen::Index>(r), k) = v;
        }
    }
    if (any_label) {
        if (labels.size() != csv.rows.size()) throw DataError("labels present on only some rows");
        t.labels = std::move(labels);
    }
    return t;
}

void write_kl_history_csv(const std::string& path, const std::vector<KlRecord>& history) {
    auto out = open_out(path);
    out << "iteration,kl\n";
    for (const auto& r : history) out << r.iteration << ',' << format_double(r.kl) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

void write_svg(const std::string& path, const Eigen::MatrixXd& coords, const std::optional<std::vector<int>>& labels,
               bool spherical) {
    static const std::array<const char*, 10> palette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const auto n = coords.rows();
    Eigen::MatrixXd xy(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (spherical && coords.cols() == 3) {
            xy(i, 0) = std::atan2(coords(i, 1), coords(i, 0));
            xy(i, 1) = std::asin(std::clamp(coords(i, 2), -1.0, 1.0));
        } else {
            xy(i, 0) = coords(i, 0);
            xy(i, 1) = coords.cols() > 1 ? coords(i, 1) : 0.0;
        }
    }
    constexpr double size = 600.0, margin = 20.0;
    Eigen::Vector2d lo = Eigen::Vector2d::Zero(), hi = Eigen::Vector2d::Ones();
    if (n > 0) {
        lo = xy.colwise().minCoeff().transpose();
        hi = xy.colwise().maxCoeff().transpose();
    }
    const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
    const double scale = (size - 2.0 * margin) / span;

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        const double cx = margin + (xy(i, 0) - lo.x()) * scale;
        const double cy = size - margin - (xy(i, 1) - lo.y()) * scale;
        const int label = labels ? (*labels)[static_cast<std::size_t>(i)] : 0;
        const auto color = palette[static_cast<std::size_t>(((label % 10) + 10) % 10)];
        char buf[160];
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"2.5\" fill=\"%s\"/>\n", cx, cy, color);
        out << buf;
    }
    out << "</svg>\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

void emit_outputs(const OptimizeResult& result, const DatasetTable& table, const OutputPaths& paths) {
    if (table.size() != result.state.size()) throw InvalidArgument("table and embedding differ in size");
    write_embedding_csv(paths.coordinates, table.ids, table.labels, result.state.points);
    if (!paths.svg.empty()) {
        write_svg(paths.svg, result.state.points, table.labels,
                  result.state.descriptor.family == ManifoldFamily::Sphere);
    }
    if (!paths.kl_history.empty()) write_kl_history_csv(paths.kl_history, result.kl_history);
}

}  // namespace riesne
