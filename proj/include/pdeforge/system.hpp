#pragma once

#include "pdeforge/equation.hpp"

#include <optional>

namespace pdeforge {

/// Per-equation LASSO constants: the genotype of the meta-optimizer.
struct SparsityVector {
    std::vector<double> lambdas;

    std::size_t size() const { return lambdas.size(); }
    bool operator==(const SparsityVector&) const = default;
};

struct EquationSystem {
    std::vector<Equation> equations; // one per dependent-variable slot
    SparsityVector lambdas;
    std::vector<double> quality;   // residual L2 norm per equation
    std::vector<int> complexity;   // active structural terms (intercept excluded)
    std::vector<std::set<std::string>> described;
    bool degenerate = false; // some slot only produced taboo-penalized equations
};

/// Optional record of the sequential discovery: the per-slot residual fields
/// and the working cache after all variable changes.
struct SystemTrace {
    std::vector<std::vector<double>> residuals;
    std::optional<TokenCache> final_cache;
};

/// Subtracts the equation's residual field from every raw dependent-variable
/// array and recomputes the derivative entries. A residual that is exactly
/// zero leaves the cache untouched.
TokenCache apply_variable_change(const TokenCache& cache, const Equation& equation);

EquationSystem discover_system_on_cache(const TokenCache& cache, const TokenPool& pool,
                                        const SparsityVector& lambdas, const EAConfig& cfg,
                                        SystemTrace* trace = nullptr);

/// Builds the token cache from the dataset, then runs one equation search per
/// dependent variable, chaining the variable change and the duplicate-variable
/// taboo between slots.
EquationSystem discover_system(const Dataset& dataset, const TokenPool& pool,
                               const SparsityVector& lambdas, const EAConfig& cfg,
                               const DiffConfig& diff_cfg);

/// (Q(L1), C(L1), ..., Q(Lk), C(Lk)).
std::vector<double> objective_vector(const EquationSystem& system);

std::string render_system(const EquationSystem& system);

} // namespace pdeforge
