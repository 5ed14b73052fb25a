#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pdeforge {

/// Uniform rectilinear grid. By convention the first axis is time.
struct Grid {
    std::vector<std::string> dim_names;
    std::vector<std::size_t> shape;   // points per axis, each >= 3
    std::vector<double> origins;      // physical start of each axis
    std::vector<double> steps;        // uniform spacing, > 0

    std::size_t rank() const { return shape.size(); }

    /// Total number of grid points M.
    std::size_t size() const;

    /// Row-major strides (last axis contiguous).
    std::vector<std::size_t> strides() const;

    std::size_t flat_index(std::span<const std::size_t> idx) const;
    std::vector<std::size_t> unflatten(std::size_t flat) const;

    double coordinate(std::size_t axis, std::size_t i) const {
        return origins[axis] + steps[axis] * static_cast<double>(i);
    }

    std::size_t axis_index(const std::string& name) const; // throws ConfigError

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    bool operator==(const Grid&) const = default;
};

struct DataField {
    std::string name;
    std::vector<double> values; // row-major, length grid.size()

    bool operator==(const DataField&) const = default;
};

/// Gridded multi-variable observations; fields are the dependent variables.
struct Dataset {
    Grid grid;
    std::vector<DataField> fields;

    const DataField* find(const std::string& name) const;
    std::vector<std::string> variable_names() const;

    /// Grid validity, matching lengths, unique names, finite values.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// EPDE-GRID v1 reader. Throws FormatError / DataError.
Dataset load_dataset(const std::filesystem::path& path);

/// EPDE-GRID v1 writer; values printed with 17 significant digits.
/// `header_comments` lines are emitted as leading `# ` comments.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  const std::vector<std::string>& header_comments = {});

std::string dataset_to_string(const Dataset& dataset,
                              const std::vector<std::string>& header_comments = {});
Dataset dataset_from_string(const std::string& text);

/// sqrt(sum v_i^2); throws DataError on empty input.
double field_l2_norm(std::span<const double> values);

} // namespace pdeforge
