#pragma once

#include "pdeforge/system.hpp"

#include <functional>

namespace pdeforge {

struct WeightVector {
    std::vector<double> weights;        // non-negative, sums to 1
    std::vector<std::size_t> neighbors; // K nearest weight indices, self included
};

struct MOEADDConfig {
    int divisions = 0; // simplex-lattice parameter H; 0 = auto (~50-100 weights)
    int neighborhood = 5;
    int epochs = 20;
    double p_mut = 0.3;
    double p_xover = 0.9;
    double sigma_mut = 0.1; // Gaussian step as a fraction of the lambda range
    double p_local = 0.9;   // probability of picking parents inside the subregion neighborhood
    double lambda_lo = 1e-6;
    double lambda_hi = 1.0;
    double pbi_theta = 5.0;
    std::uint64_t rng_seed = 0;
    std::size_t max_weights = 100000;

    void validate() const; // throws ConfigError
};

struct Individual {
    SparsityVector genotype;
    EquationSystem system;
    std::vector<double> objectives;
    std::size_t level = 0;
    std::size_t subregion = 0;
};

struct ParetoArchive {
    std::vector<Individual> individuals; // mutually non-dominated
    std::vector<double> ideal_point;
};

/// Simplex-lattice weight vectors for n_obj objectives with H divisions,
/// count C(H+n_obj-1, n_obj-1); errors out above `guard` vectors.
std::vector<WeightVector> generate_weights(std::size_t n_obj, int divisions, int k_neighbors,
                                           std::size_t guard = 100000);

/// Smallest H whose lattice has at least `target` points.
int auto_divisions(std::size_t n_obj, std::size_t target = 50);

/// a dominates b: <= in every coordinate, < in at least one (minimization).
bool dominates(const std::vector<double>& a, const std::vector<double>& b);

/// Non-domination level per point (level 0 = Pareto front).
std::vector<std::size_t> nondominated_sort(const std::vector<std::vector<double>>& points);

/// Index of the weight vector with the smallest angle to (objectives - ideal),
/// components clamped at zero; an all-zero translation maps to index 0.
std::size_t assign_subregion(const std::vector<double>& objectives,
                             const std::vector<WeightVector>& weights,
                             const std::vector<double>& ideal);

SparsityVector random_genotype(Rng& rng, const MOEADDConfig& cfg, std::size_t k); // log-uniform
SparsityVector mutate_lambda(const SparsityVector& genotype, const MOEADDConfig& cfg, Rng& rng);
std::pair<SparsityVector, SparsityVector> crossover_lambda(const SparsityVector& a,
                                                           const SparsityVector& b,
                                                           const MOEADDConfig& cfg, Rng& rng);

double pbi_value(const std::vector<double>& objectives, const std::vector<double>& weights,
                 const std::vector<double>& ideal, double theta);

/// Pilot estimate of the best reachable objective values: complexity
/// components are 0, quality components come from a short discovery run at
/// lambda_lo, scaled by a 0.9 safety factor. Refined online during the run.
std::vector<double> estimate_ideal_point(const Dataset& dataset, const TokenPool& pool,
                                         const MOEADDConfig& cfg, const EAConfig& ea_cfg,
                                         const DiffConfig& diff_cfg);
std::vector<double> estimate_ideal_point_on_cache(const TokenCache& cache, const TokenPool& pool,
                                                  const MOEADDConfig& cfg, const EAConfig& ea_cfg);

struct MoeaddHooks {
    std::function<void(int epoch, const ParetoArchive&, const std::vector<Individual>&)> on_epoch;
};

ParetoArchive run_moeadd_on_cache(const TokenCache& cache, const TokenPool& pool,
                                  const MOEADDConfig& cfg, const EAConfig& ea_cfg,
                                  const MoeaddHooks* hooks = nullptr);
ParetoArchive run_moeadd(const Dataset& dataset, const TokenPool& pool, const MOEADDConfig& cfg,
                         const EAConfig& ea_cfg, const DiffConfig& diff_cfg,
                         const MoeaddHooks* hooks = nullptr);

struct FrontierRow {
    int total_complexity = 0;
    double total_error = 0.0;
    bool dominated_2d = false; // dominated within the 2-D aggregate projection
    std::size_t archive_index = 0;
};

/// Fig-5-style aggregation: (sum of complexities, sum of residual norms) per
/// archive individual, sorted by total complexity ascending.
std::vector<FrontierRow> aggregate_frontier(const ParetoArchive& archive);

} // namespace pdeforge
