#include "pdeforge/grid.hpp"

#include "pdeforge/errors.hpp"

#include <cmath>
#include <set>

namespace pdeforge {

std::size_t Grid::size() const {
    std::size_t m = 1;
    for (std::size_t s : shape) m *= s;
    return m;
}

std::vector<std::size_t> Grid::strides() const {
    std::vector<std::size_t> st(rank(), 1);
    for (std::size_t a = rank(); a-- > 1;) st[a - 1] = st[a] * shape[a];
    return st;
}

std::size_t Grid::flat_index(std::span<const std::size_t> idx) const {
    const auto st = strides();
    std::size_t flat = 0;
    for (std::size_t a = 0; a < rank(); ++a) flat += idx[a] * st[a];
    return flat;
}

std::vector<std::size_t> Grid::unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(rank());
    const auto st = strides();
    for (std::size_t a = 0; a < rank(); ++a) {
        idx[a] = flat / st[a];
        flat %= st[a];
    }
    return idx;
}

std::size_t Grid::axis_index(const std::string& name) const {
    for (std::size_t a = 0; a < dim_names.size(); ++a)
        if (dim_names[a] == name) return a;
    throw ConfigError("unknown axis name: " + name);
}

void Grid::validate() const {
    if (rank() == 0) throw ConfigError("grid must have at least one axis");
    if (dim_names.size() != shape.size() || origins.size() != shape.size() ||
        steps.size() != shape.size())
        throw ConfigError("grid axis metadata lengths disagree");
    std::set<std::string> names(dim_names.begin(), dim_names.end());
    if (names.size() != dim_names.size()) throw ConfigError("duplicate axis name");
    for (std::size_t a = 0; a < rank(); ++a) {
        if (shape[a] < 3)
            throw ConfigError("axis '" + dim_names[a] + "' has fewer than 3 points");
        if (!(steps[a] > 0.0) || !std::isfinite(steps[a]))
            throw ConfigError("axis '" + dim_names[a] + "' has non-positive step");
        if (!std::isfinite(origins[a]))
            throw ConfigError("axis '" + dim_names[a] + "' has non-finite origin");
    }
}

const DataField* Dataset::find(const std::string& name) const {
    for (const auto& f : fields)
        if (f.name == name) return &f;
    return nullptr;
}

std::vector<std::string> Dataset::variable_names() const {
    std::vector<std::string> names;
    names.reserve(fields.size());
    for (const auto& f : fields) names.push_back(f.name);
    return names;
}

void Dataset::validate() const {
    grid.validate();
    if (fields.empty()) throw DataError("dataset has no fields");
    std::set<std::string> names;
    const std::size_t m = grid.size();
    for (const auto& f : fields) {
        if (!names.insert(f.name).second) throw DataError("duplicate field name: " + f.name);
        if (f.values.size() != m)
            throw DataError("field '" + f.name + "' has " + std::to_string(f.values.size()) +
                            " values, grid has " + std::to_string(m) + " points");
        for (std::size_t i = 0; i < f.values.size(); ++i)
            if (!std::isfinite(f.values[i]))
                throw DataError("field '" + f.name + "' has non-finite value at flat index " +
                                std::to_string(i));
    }
}

double field_l2_norm(std::span<const double> values) {
    if (values.empty()) throw DataError("l2 norm of empty array");
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return std::sqrt(acc);
}

} // namespace pdeforge
