#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riesne/geometry.hpp"

namespace riesne {

/// A set of observations on one manifold, with optional integer labels.
struct DatasetTable {
    ManifoldDescriptor manifold;
    std::vector<ManifoldPoint> points;
    std::optional<std::vector<int>> labels;
    std::vector<std::string> ids;

    std::size_t size() const { return points.size(); }

    /// Checks the shared-descriptor and label/id length invariants.
    void validate() const;

    static DatasetTable from_points(std::vector<ManifoldPoint> points);
};

}  // namespace riesne
