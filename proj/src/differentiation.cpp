#include "pdeforge/differentiation.hpp"

#include "pdeforge/errors.hpp"
#include "pdeforge/kernels.hpp"
#include "pdeforge/signature.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace pdeforge {

void DiffConfig::validate() const {
    if (degree < 2) throw ConfigError("diff degree must be >= 2");
    if (window % 2 == 0) throw ConfigError("diff window must be odd");
    if (window <= degree) throw ConfigError("diff window must exceed the degree");
    if (max_order < 1) throw ConfigError("diff max_order must be >= 1");
    if (max_order > degree) throw ConfigError("diff max_order cannot exceed the degree");
}

namespace {

// Filter weights for one evaluation position inside the window: fit a degree-d
// polynomial in the offset xi = i - center via normal equations (long double
// against the 1/h^order amplification), then evaluate the o-th analytic
// derivative at the evaluation point. Dividing by h^o happens at application
// time through a premultiplied copy of the table.
std::vector<std::vector<std::vector<double>>> weight_table(const DiffConfig& cfg) {
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const int w = cfg.window;
    const int p = cfg.degree + 1;
    const int center = (w - 1) / 2;
    std::vector<std::vector<std::vector<double>>> table(
        w, std::vector<std::vector<double>>(cfg.max_order + 1, std::vector<double>(w, 0.0)));

    LMatrix v(w, p);
    for (int i = 0; i < w; ++i) {
        const long double xi = static_cast<long double>(i - center);
        long double acc = 1.0L;
        for (int q = 0; q < p; ++q) {
            v(i, q) = acc;
            acc *= xi;
        }
    }
    // rows of (V^T V)^-1 V^T sample the polynomial coefficients
    const LMatrix pinv = (v.transpose() * v).ldlt().solve(v.transpose());

    for (int pos = 0; pos < w; ++pos) {
        const long double xe = static_cast<long double>(pos - center);
        for (int o = 0; o <= cfg.max_order; ++o) {
            std::vector<long double> weights(w, 0.0L);
            long double fall = 1.0L; // q!/(q-o)!
            for (int q = o; q < p; ++q) {
                if (q == o) {
                    fall = 1.0L;
                    for (int j = 2; j <= o; ++j) fall *= j;
                } else {
                    fall *= static_cast<long double>(q) / static_cast<long double>(q - o);
                }
                long double xpow = 1.0L;
                for (int j = 0; j < q - o; ++j) xpow *= xe;
                for (int i = 0; i < w; ++i) weights[i] += fall * xpow * pinv(q, i);
            }
            // derivatives of order >= 1 must annihilate constants exactly
            if (o >= 1) {
                long double mean = 0.0L;
                for (long double x : weights) mean += x;
                mean /= static_cast<long double>(w);
                for (auto& x : weights) x -= mean;
            }
            for (int i = 0; i < w; ++i) table[pos][o][i] = static_cast<double>(weights[i]);
        }
    }
    return table;
}

} // namespace

std::vector<double> differentiate(const Grid& grid, std::span<const double> values,
                                  std::size_t axis, int order, const DiffConfig& cfg) {
    cfg.validate();
    grid.validate();
    if (axis >= grid.rank()) throw std::invalid_argument("differentiate: axis out of range");
    if (order < 1 || order > cfg.max_order)
        throw std::invalid_argument("differentiate: order out of range");
    if (values.size() != grid.size())
        throw DataError("differentiate: field length does not match grid");
    if (grid.shape[axis] < static_cast<std::size_t>(cfg.window))
        throw ConfigError("axis '" + grid.dim_names[axis] + "' too short for window " +
                          std::to_string(cfg.window));

    static thread_local DiffConfig cached_cfg{0, 0, 0};
    static thread_local std::vector<std::vector<std::vector<double>>> cached_table;
    if (cached_cfg.window != cfg.window || cached_cfg.degree != cfg.degree ||
        cached_cfg.max_order != cfg.max_order) {
        cached_table = weight_table(cfg);
        cached_cfg = cfg;
    }

    const double h = grid.steps[axis];
    const double scale = 1.0 / std::pow(h, order);
    std::vector<std::vector<double>> weights(cfg.window, std::vector<double>(cfg.window));
    for (int pos = 0; pos < cfg.window; ++pos)
        for (int i = 0; i < cfg.window; ++i) weights[pos][i] = cached_table[pos][order][i] * scale;

    std::vector<double> out(values.size());
    kernels::apply_axis_filter(values, out, grid.shape, axis, weights);
    return out;
}

DataField differentiate(const Grid& grid, const DataField& field, std::size_t axis, int order,
                        const DiffConfig& cfg) {
    DataField out;
    out.name = derivative_signature(field.name, grid.dim_names[axis], order);
    out.values = differentiate(grid, field.values, axis, order, cfg);
    return out;
}

const std::vector<double>* TokenCache::find(const std::string& signature) const {
    const auto it = arrays.find(signature);
    return it == arrays.end() ? nullptr : &it->second;
}

const std::vector<double>& TokenCache::at(const std::string& signature) const {
    const auto it = arrays.find(signature);
    if (it == arrays.end()) throw MissingTokenError("token not in cache: " + signature);
    return it->second;
}

void TokenCache::rebuild_derivatives() {
    for (const auto& d : derivatives)
        arrays[d.signature] = differentiate(grid, arrays.at(d.var), d.axis, d.order, diff_cfg);
}

TokenCache build_token_cache(const Dataset& dataset, const DiffConfig& cfg) {
    dataset.validate();
    cfg.validate();
    TokenCache cache;
    cache.grid = dataset.grid;
    cache.diff_cfg = cfg;
    for (const auto& field : dataset.fields) {
        cache.variables.push_back(field.name);
        cache.arrays[field.name] = field.values;
        for (std::size_t axis = 0; axis < dataset.grid.rank(); ++axis)
            for (int order = 1; order <= cfg.max_order; ++order)
                cache.derivatives.push_back(
                    {field.name, axis, order,
                     derivative_signature(field.name, dataset.grid.dim_names[axis], order)});
    }
    cache.rebuild_derivatives();
    return cache;
}

} // namespace pdeforge
