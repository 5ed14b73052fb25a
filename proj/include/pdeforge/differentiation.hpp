#pragma once

#include "pdeforge/grid.hpp"

#include <map>
#include <string>
#include <vector>

namespace pdeforge {

/// Local polynomial fit settings for numerical differentiation.
struct DiffConfig {
    int window = 9;    // points per 1-D fit window, odd, > degree
    int degree = 5;    // polynomial degree, >= 2
    int max_order = 3; // highest derivative order per axis

    void validate() const; // throws ConfigError
};

/// Differentiates by fitting a least-squares polynomial of cfg.degree to the
/// cfg.window nearest points along `axis` (windows shift, never shrink, at
/// the boundaries) and evaluating its order-th analytic derivative.
std::vector<double> differentiate(const Grid& grid, std::span<const double> values,
                                  std::size_t axis, int order, const DiffConfig& cfg);

DataField differentiate(const Grid& grid, const DataField& field, std::size_t axis, int order,
                        const DiffConfig& cfg);

/// Evaluated token fields over one grid: raw dependent variables plus every
/// pure derivative up to max_order along every axis. Immutable once built,
/// except through rebuild_derivatives after a variable change.
struct TokenCache {
    struct DerivEntry {
        std::string var;
        std::size_t axis;
        int order;
        std::string signature;
    };

    Grid grid;
    DiffConfig diff_cfg;
    std::vector<std::string> variables; // dependent variables, dataset order
    std::map<std::string, std::vector<double>> arrays;
    std::vector<DerivEntry> derivatives;

    const std::vector<double>* find(const std::string& signature) const;
    const std::vector<double>& at(const std::string& signature) const; // throws MissingTokenError

    /// Recompute every derivative entry from the (possibly modified) raw
    /// variable arrays using diff_cfg.
    void rebuild_derivatives();
};

TokenCache build_token_cache(const Dataset& dataset, const DiffConfig& cfg);

} // namespace pdeforge
