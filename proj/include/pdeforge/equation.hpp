#pragma once

#include "pdeforge/sparse_solver.hpp"
#include "pdeforge/token.hpp"

#include <cstdint>
#include <set>
#include <string>

namespace pdeforge {

struct EAConfig {
    int population_size = 32;
    int epochs = 50;
    int tournament_size = 4;
    double p_term_mutation = 0.2;
    double p_param_mutation = 0.3;
    double p_factor_swap = 0.5;
    double sigma_param = 0.1; // Gaussian step as a fraction of the parameter range
    double eps_fit = 1e-9;    // residual floor: fitness = 1/max(r, eps_fit)
    double lasso_tol = 1e-6;
    int lasso_max_iter = 10000;
    std::uint64_t rng_seed = 0;
    PoolConfig pool;

    void validate() const; // throws ConfigError
};

/// Variables whose singleton described-set has already been claimed by an
/// earlier equation of the system.
using TabooSet = std::set<std::string>;

/// A fitted candidate equation: sum_i alpha_i * term_i + intercept
/// approximates the term at right_part_idx.
struct Equation {
    Chromosome chromosome;
    std::size_t right_part_idx = 0;
    std::vector<double> alpha;          // per non-target term, chromosome order
    std::vector<std::size_t> support;   // positions into alpha with live coefficients
    double intercept = 0.0;
    double fitness = 0.0;
    double residual_norm = 0.0;
    double lambda = 0.0;
    bool taboo_penalized = false;
    bool lasso_converged = true;
    bool rank_deficient = false;
    std::string tie_key; // structure_key(), cached by evaluate_equation

    const Term& target_term() const { return chromosome.terms[right_part_idx]; }

    /// Chromosome indices of the feature terms, in order (alpha aligns).
    std::vector<std::size_t> feature_term_indices() const;

    /// Active structural terms: the target plus the supported features.
    int complexity() const { return 1 + static_cast<int>(support.size()); }

    /// Deterministic ordering key over (target, active features); used to
    /// break exact fitness ties in favor of structurally simplest equations.
    std::string structure_key() const;

    /// Signatures of the active terms (target first), for structural checks.
    std::vector<std::string> active_signatures() const;
};

/// Best left/right split of the chromosome under LASSO + OLS: fits every
/// candidate target term and keeps the split with maximal fitness (ties go to
/// the lowest term index). Applies the duplicate-variable taboo penalty after
/// selection.
Equation evaluate_equation(const Chromosome& chromosome, double lambda, const TokenCache& cache,
                           const TabooSet& taboo, const EAConfig& cfg);

/// Dependent variables appearing in the target term or any supported term.
std::set<std::string> describes_variables(const Equation& eq);

/// Fig-style three-group recombination: shared terms copy unchanged, terms
/// with matching families blend their parameters convexly, unique terms swap
/// with probability p_factor_swap.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng,
                                            const EAConfig& cfg);

Chromosome mutate(const Chromosome& chromosome, Rng& rng, const EAConfig& cfg,
                  const TokenPool& pool);

/// true when a should be preferred over b (higher fitness; equal fitness
/// resolved by the smaller structure key).
bool equation_better(const Equation& a, const Equation& b);

Equation run_equation_ea(const EAConfig& cfg, const TokenPool& pool, double lambda,
                         const TokenCache& cache, const TabooSet& taboo);

/// sum_i alpha_i * term_i + intercept - target, evaluated over the grid.
std::vector<double> equation_residual_field(const Equation& eq, const TokenCache& cache);

/// `<signed coefficient terms> = <target> [+ const(...)]`, 6-decimal coefficients.
std::string render_equation(const Equation& eq);

} // namespace pdeforge
