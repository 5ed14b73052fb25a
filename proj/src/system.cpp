#include "pdeforge/system.hpp"

#include "pdeforge/errors.hpp"
#include "pdeforge/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace pdeforge {

namespace {

// splitmix64, used to derive independent per-slot EA seeds
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

TokenCache apply_variable_change(const TokenCache& cache, const Equation& equation) {
    const std::vector<double> residual = equation_residual_field(equation, cache);
    if (residual.size() != cache.grid.size())
        throw std::invalid_argument("variable change: residual does not match the cache grid");
    const bool all_zero = std::all_of(residual.begin(), residual.end(),
                                      [](double v) { return v == 0.0; });
    TokenCache out = cache;
    if (all_zero) return out;
    for (const auto& var : out.variables)
        kernels::add_scaled(out.arrays.at(var), residual, -1.0);
    out.rebuild_derivatives();
    return out;
}

EquationSystem discover_system_on_cache(const TokenCache& cache, const TokenPool& pool,
                                        const SparsityVector& lambdas, const EAConfig& cfg,
                                        SystemTrace* trace) {
    const std::size_t k = cache.variables.size();
    if (lambdas.size() != k)
        throw ConfigError("sparsity vector length " + std::to_string(lambdas.size()) +
                          " does not match " + std::to_string(k) + " dependent variables");

    EquationSystem system;
    system.lambdas = lambdas;
    TabooSet taboo;
    TokenCache working = cache;

    for (std::size_t slot = 0; slot < k; ++slot) {
        EAConfig slot_cfg = cfg;
        slot_cfg.rng_seed = mix_seed(cfg.rng_seed, slot);
        Equation eq = run_equation_ea(slot_cfg, pool, lambdas.lambdas[slot], working, taboo);
        if (eq.taboo_penalized) system.degenerate = true;

        const std::vector<double> residual = equation_residual_field(eq, working);
        if (trace != nullptr) trace->residuals.push_back(residual);

        const bool all_zero =
            std::all_of(residual.begin(), residual.end(), [](double v) { return v == 0.0; });
        if (!all_zero) {
            for (const auto& var : working.variables)
                kernels::add_scaled(working.arrays.at(var), residual, -1.0);
            working.rebuild_derivatives();
        }

        const auto described = describes_variables(eq);
        if (described.size() == 1) taboo.insert(*described.begin());

        system.quality.push_back(eq.residual_norm);
        system.complexity.push_back(eq.complexity());
        system.described.push_back(described);
        system.equations.push_back(std::move(eq));
    }
    if (trace != nullptr) trace->final_cache = std::move(working);
    return system;
}

EquationSystem discover_system(const Dataset& dataset, const TokenPool& pool,
                               const SparsityVector& lambdas, const EAConfig& cfg,
                               const DiffConfig& diff_cfg) {
    const TokenCache cache = build_token_cache(dataset, diff_cfg);
    return discover_system_on_cache(cache, pool, lambdas, cfg);
}

std::vector<double> objective_vector(const EquationSystem& system) {
    std::vector<double> obj;
    obj.reserve(2 * system.equations.size());
    for (std::size_t i = 0; i < system.equations.size(); ++i) {
        obj.push_back(system.quality[i]);
        obj.push_back(static_cast<double>(system.complexity[i]));
    }
    return obj;
}

std::string render_system(const EquationSystem& system) {
    std::string out;
    for (std::size_t i = 0; i < system.equations.size(); ++i) {
        out += render_equation(system.equations[i]);
        if (i + 1 < system.equations.size()) out += "\n";
    }
    return out;
}

} // namespace pdeforge
