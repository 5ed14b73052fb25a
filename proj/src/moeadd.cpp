#include "pdeforge/moeadd.hpp"

#include "pdeforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace pdeforge {

void MOEADDConfig::validate() const {
    if (neighborhood < 1) throw ConfigError("neighborhood must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    for (double p : {p_mut, p_xover, p_local})
        if (p < 0.0 || p > 1.0) throw ConfigError("probability out of [0,1]");
    if (!(lambda_lo > 0.0)) throw ConfigError("lambda_lo must be positive");
    if (lambda_hi <= lambda_lo) throw ConfigError("lambda_hi must exceed lambda_lo");
    if (sigma_mut <= 0.0) throw ConfigError("sigma_mut must be positive");
    if (pbi_theta <= 0.0) throw ConfigError("pbi_theta must be positive");
}

namespace {

double lattice_count(std::size_t n_obj, int h) {
    // C(h + n_obj - 1, n_obj - 1)
    double c = 1.0;
    for (std::size_t i = 1; i < n_obj; ++i)
        c *= static_cast<double>(h + i) / static_cast<double>(i);
    return c;
}

} // namespace

int auto_divisions(std::size_t n_obj, std::size_t target) {
    for (int h = 1;; ++h) {
        if (lattice_count(n_obj, h) >= static_cast<double>(target)) return h;
        if (h > 1000000) throw ConfigError("auto_divisions failed");
    }
}

std::vector<WeightVector> generate_weights(std::size_t n_obj, int divisions, int k_neighbors,
                                           std::size_t guard) {
    if (n_obj < 2) throw ConfigError("need at least two objectives");
    if (divisions < 1) throw ConfigError("divisions must be >= 1");
    const double count = lattice_count(n_obj, divisions);
    if (count > static_cast<double>(guard))
        throw ConfigError("weight lattice would have " + std::to_string(count) +
                          " vectors, above the guard of " + std::to_string(guard));

    std::vector<WeightVector> weights;
    std::vector<int> stack(n_obj, 0);
    // enumerate all compositions of `divisions` into n_obj parts, lexicographic
    std::function<void(std::size_t, int)> recurse = [&](std::size_t pos, int remaining) {
        if (pos + 1 == n_obj) {
            stack[pos] = remaining;
            WeightVector wv;
            wv.weights.resize(n_obj);
            for (std::size_t i = 0; i < n_obj; ++i)
                wv.weights[i] = static_cast<double>(stack[i]) / static_cast<double>(divisions);
            weights.push_back(std::move(wv));
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            stack[pos] = v;
            recurse(pos + 1, remaining - v);
        }
    };
    recurse(0, divisions);

    const std::size_t n = weights.size();
    const std::size_t k = std::min<std::size_t>(std::max(k_neighbors, 1), n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(n);
        for (std::size_t j = 0; j < n; ++j) {
            double d = 0.0;
            for (std::size_t a = 0; a < n_obj; ++a) {
                const double diff = weights[i].weights[a] - weights[j].weights[a];
                d += diff * diff;
            }
            dist.emplace_back(d, j);
        }
        std::stable_sort(dist.begin(), dist.end(),
                         [](const auto& x, const auto& y) { return x.first < y.first; });
        for (std::size_t j = 0; j < k; ++j) weights[i].neighbors.push_back(dist[j].second);
    }
    return weights;
}

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

std::vector<std::size_t> nondominated_sort(const std::vector<std::vector<double>>& points) {
    const std::size_t n = points.size();
    std::vector<std::size_t> level(n, 0);
    std::vector<int> dominated_by(n, 0);
    std::vector<std::vector<std::size_t>> dominating(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominating[i].push_back(j);
                ++dominated_by[j];
            } else if (dominates(points[j], points[i])) {
                dominating[j].push_back(i);
                ++dominated_by[i];
            }
        }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dominated_by[i] == 0) current.push_back(i);
    std::size_t lvl = 0;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            level[i] = lvl;
            for (std::size_t j : dominating[i])
                if (--dominated_by[j] == 0) next.push_back(j);
        }
        current = std::move(next);
        ++lvl;
    }
    return level;
}

std::size_t assign_subregion(const std::vector<double>& objectives,
                             const std::vector<WeightVector>& weights,
                             const std::vector<double>& ideal) {
    std::vector<double> f(objectives.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = std::max(objectives[i] - ideal[i], 0.0);
        norm += f[i] * f[i];
    }
    if (norm == 0.0) return 0;
    norm = std::sqrt(norm);
    std::size_t best = 0;
    double best_cos = -2.0;
    for (std::size_t w = 0; w < weights.size(); ++w) {
        double dot = 0.0, wnorm = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            dot += f[i] * weights[w].weights[i];
            wnorm += weights[w].weights[i] * weights[w].weights[i];
        }
        const double c = dot / (norm * std::sqrt(wnorm));
        if (c > best_cos) {
            best_cos = c;
            best = w;
        }
    }
    return best;
}

SparsityVector random_genotype(Rng& rng, const MOEADDConfig& cfg, std::size_t k) {
    std::uniform_real_distribution<double> logu(std::log(cfg.lambda_lo), std::log(cfg.lambda_hi));
    SparsityVector g;
    g.lambdas.resize(k);
    for (auto& v : g.lambdas) v = std::exp(logu(rng));
    return g;
}

SparsityVector mutate_lambda(const SparsityVector& genotype, const MOEADDConfig& cfg, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, cfg.sigma_mut * (cfg.lambda_hi - cfg.lambda_lo));
    SparsityVector out = genotype;
    for (auto& v : out.lambdas)
        if (unit(rng) < cfg.p_mut)
            v = std::clamp(v + gauss(rng), cfg.lambda_lo, cfg.lambda_hi);
    return out;
}

std::pair<SparsityVector, SparsityVector> crossover_lambda(const SparsityVector& a,
                                                           const SparsityVector& b,
                                                           const MOEADDConfig& cfg, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SparsityVector c1 = a, c2 = b;
    for (std::size_t i = 0; i < a.lambdas.size(); ++i) {
        if (unit(rng) >= cfg.p_xover) continue;
        const double mix = unit(rng);
        c1.lambdas[i] = mix * a.lambdas[i] + (1.0 - mix) * b.lambdas[i];
        c2.lambdas[i] = mix * b.lambdas[i] + (1.0 - mix) * a.lambdas[i];
    }
    return {std::move(c1), std::move(c2)};
}

double pbi_value(const std::vector<double>& objectives, const std::vector<double>& weights,
                 const std::vector<double>& ideal, double theta) {
    double wnorm = 0.0;
    for (double w : weights) wnorm += w * w;
    wnorm = std::sqrt(wnorm);
    double d1 = 0.0;
    for (std::size_t i = 0; i < objectives.size(); ++i)
        d1 += (objectives[i] - ideal[i]) * weights[i];
    d1 /= wnorm;
    double d2sq = 0.0;
    for (std::size_t i = 0; i < objectives.size(); ++i) {
        const double r = objectives[i] - ideal[i] - d1 * weights[i] / wnorm;
        d2sq += r * r;
    }
    return d1 + theta * std::sqrt(d2sq);
}

namespace {

// 6-significant-digit quantization; one evaluated system per distinct key
std::string genotype_key(const SparsityVector& g) {
    std::string key;
    char buf[32];
    for (double v : g.lambdas) {
        std::snprintf(buf, sizeof buf, "%.6g,", v);
        key += buf;
    }
    return key;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) {
    std::uint64_t h = 1469598103934665603ULL ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct Evaluator {
    const TokenCache& cache;
    const TokenPool& pool;
    const EAConfig& ea_cfg;
    std::uint64_t base_seed;
    std::map<std::string, EquationSystem> memo;

    EquationSystem operator()(const SparsityVector& genotype) {
        const std::string key = genotype_key(genotype);
        const auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        EAConfig cfg = ea_cfg;
        cfg.rng_seed = fnv1a(key, base_seed);
        EquationSystem sys = discover_system_on_cache(cache, pool, genotype, cfg);
        memo.emplace(key, sys);
        return sys;
    }
};

void archive_insert(ParetoArchive& archive, const Individual& ind) {
    for (const auto& a : archive.individuals) {
        if (a.objectives == ind.objectives) return; // duplicate objective vector
        if (dominates(a.objectives, ind.objectives)) return;
    }
    std::erase_if(archive.individuals, [&](const Individual& a) {
        return dominates(ind.objectives, a.objectives);
    });
    archive.individuals.push_back(ind);
}

} // namespace

std::vector<double> estimate_ideal_point_on_cache(const TokenCache& cache, const TokenPool& pool,
                                                  const MOEADDConfig& cfg, const EAConfig& ea_cfg) {
    EAConfig pilot = ea_cfg;
    pilot.epochs = std::max(2, ea_cfg.epochs / 5);
    pilot.population_size = std::max(8, ea_cfg.population_size / 2);
    pilot.tournament_size = std::min(pilot.tournament_size, pilot.population_size);
    SparsityVector lam;
    lam.lambdas.assign(cache.variables.size(), cfg.lambda_lo);
    const EquationSystem sys = discover_system_on_cache(cache, pool, lam, pilot);
    std::vector<double> ideal(2 * cache.variables.size(), 0.0);
    for (std::size_t i = 0; i < sys.quality.size(); ++i) ideal[2 * i] = 0.9 * sys.quality[i];
    return ideal;
}

std::vector<double> estimate_ideal_point(const Dataset& dataset, const TokenPool& pool,
                                         const MOEADDConfig& cfg, const EAConfig& ea_cfg,
                                         const DiffConfig& diff_cfg) {
    const TokenCache cache = build_token_cache(dataset, diff_cfg);
    return estimate_ideal_point_on_cache(cache, pool, cfg, ea_cfg);
}

ParetoArchive run_moeadd_on_cache(const TokenCache& cache, const TokenPool& pool,
                                  const MOEADDConfig& cfg, const EAConfig& ea_cfg,
                                  const MoeaddHooks* hooks) {
    cfg.validate();
    const std::size_t k = cache.variables.size();
    const std::size_t n_obj = 2 * k;
    const int divisions = cfg.divisions > 0 ? cfg.divisions : auto_divisions(n_obj);
    std::vector<WeightVector> weights =
        generate_weights(n_obj, divisions, cfg.neighborhood, cfg.max_weights);
    const std::size_t n = weights.size();

    Rng rng(cfg.rng_seed);
    Evaluator evaluate{cache, pool, ea_cfg, cfg.rng_seed, {}};

    ParetoArchive archive;
    archive.ideal_point = estimate_ideal_point_on_cache(cache, pool, cfg, ea_cfg);

    auto refine_ideal = [&](const std::vector<double>& obj) {
        for (std::size_t i = 0; i < n_obj; i += 2)
            archive.ideal_point[i] = std::min(archive.ideal_point[i], 0.9 * obj[i]);
    };
    auto reassign = [&](std::vector<Individual>& pop) {
        for (auto& ind : pop)
            ind.subregion = assign_subregion(ind.objectives, weights, archive.ideal_point);
    };

    std::vector<Individual> pop;
    pop.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Individual ind;
        ind.genotype = random_genotype(rng, cfg, k);
        ind.system = evaluate(ind.genotype);
        ind.objectives = objective_vector(ind.system);
        refine_ideal(ind.objectives);
        pop.push_back(std::move(ind));
    }
    reassign(pop);
    {
        std::vector<std::vector<double>> pts;
        for (const auto& ind : pop) pts.push_back(ind.objectives);
        const auto levels = nondominated_sort(pts);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            pop[i].level = levels[i];
            archive_insert(archive, pop[i]);
        }
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t wi = 0; wi < n; ++wi) {
            // parent selection: neighborhood subregions with probability
            // p_local, otherwise the whole population
            std::vector<std::size_t> candidates;
            if (unit(rng) < cfg.p_local) {
                for (std::size_t i = 0; i < pop.size(); ++i)
                    for (std::size_t nb : weights[wi].neighbors)
                        if (pop[i].subregion == nb) {
                            candidates.push_back(i);
                            break;
                        }
            }
            if (candidates.empty())
                for (std::size_t i = 0; i < pop.size(); ++i) candidates.push_back(i);
            std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
            const Individual& pa = pop[candidates[pick(rng)]];
            const Individual& pb = pop[candidates[pick(rng)]];

            auto [c1, c2] = crossover_lambda(pa.genotype, pb.genotype, cfg, rng);
            (void)c2; // one offspring per subproblem visit
            Individual child;
            child.genotype = mutate_lambda(c1, cfg, rng);
            child.system = evaluate(child.genotype);
            child.objectives = objective_vector(child.system);
            refine_ideal(child.objectives);
            archive_insert(archive, child);

            // population update: drop the PBI-worst member of the most
            // crowded subregion within the worst non-domination level
            pop.push_back(std::move(child));
            reassign(pop);
            std::vector<std::vector<double>> pts;
            for (const auto& ind : pop) pts.push_back(ind.objectives);
            const auto levels = nondominated_sort(pts);
            for (std::size_t i = 0; i < pop.size(); ++i) pop[i].level = levels[i];
            const std::size_t worst = *std::max_element(levels.begin(), levels.end());

            std::map<std::size_t, std::size_t> region_count;
            for (const auto& ind : pop) ++region_count[ind.subregion];
            std::size_t crowded_region = 0, crowded_count = 0;
            for (std::size_t i = 0; i < pop.size(); ++i) {
                if (pop[i].level != worst) continue;
                const std::size_t c = region_count[pop[i].subregion];
                if (c > crowded_count) {
                    crowded_count = c;
                    crowded_region = pop[i].subregion;
                }
            }
            std::size_t remove_idx = pop.size();
            double worst_pbi = -1.0;
            for (std::size_t i = 0; i < pop.size(); ++i) {
                if (pop[i].level != worst || pop[i].subregion != crowded_region) continue;
                const double v = pbi_value(pop[i].objectives, weights[pop[i].subregion].weights,
                                           archive.ideal_point, cfg.pbi_theta);
                if (v > worst_pbi) {
                    worst_pbi = v;
                    remove_idx = i;
                }
            }
            pop.erase(pop.begin() + static_cast<std::ptrdiff_t>(remove_idx));
        }
        if (hooks != nullptr && hooks->on_epoch) hooks->on_epoch(epoch, archive, pop);
    }
    return archive;
}

ParetoArchive run_moeadd(const Dataset& dataset, const TokenPool& pool, const MOEADDConfig& cfg,
                         const EAConfig& ea_cfg, const DiffConfig& diff_cfg,
                         const MoeaddHooks* hooks) {
    const TokenCache cache = build_token_cache(dataset, diff_cfg);
    return run_moeadd_on_cache(cache, pool, cfg, ea_cfg, hooks);
}

std::vector<FrontierRow> aggregate_frontier(const ParetoArchive& archive) {
    if (archive.individuals.empty()) throw DataError("cannot aggregate an empty archive");
    std::vector<FrontierRow> rows;
    rows.reserve(archive.individuals.size());
    for (std::size_t i = 0; i < archive.individuals.size(); ++i) {
        FrontierRow row;
        row.archive_index = i;
        const auto& sys = archive.individuals[i].system;
        for (int c : sys.complexity) row.total_complexity += c;
        for (double q : sys.quality) row.total_error += q;
        rows.push_back(row);
    }
    for (auto& r : rows)
        for (const auto& o : rows)
            if ((o.total_complexity <= r.total_complexity && o.total_error < r.total_error) ||
                (o.total_complexity < r.total_complexity && o.total_error <= r.total_error))
                r.dominated_2d = true;
    std::stable_sort(rows.begin(), rows.end(), [](const FrontierRow& a, const FrontierRow& b) {
        if (a.total_complexity != b.total_complexity)
            return a.total_complexity < b.total_complexity;
        return a.total_error < b.total_error;
    });
    return rows;
}

} // namespace pdeforge
