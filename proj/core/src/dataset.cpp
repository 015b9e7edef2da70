#include "riesne/dataset.hpp"

#include "riesne/errors.hpp"

namespace riesne {

void DatasetTable::validate() const {
    for (const auto& p : points) {
        if (!(p.descriptor == manifold)) throw DataError("dataset mixes points from different manifolds");
    }
    if (labels && labels->size() != points.size()) throw DataError("label count does not match point count");
    if (!ids.empty() && ids.size() != points.size()) throw DataError("id count does not match point count");
}

DatasetTable DatasetTable::from_points(std::vector<ManifoldPoint> points) {
    DatasetTable t;
    if (!points.empty()) t.manifold = points.front().descriptor;
    t.points = std::move(points);
    t.ids.reserve(t.points.size());
    for (std::size_t i = 0; i < t.points.size(); ++i) t.ids.push_back(std::to_string(i));
    t.validate();
    return t;
}

}  // namespace riesne
