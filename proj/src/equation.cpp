#include "pdeforge/equation.hpp"

#include "pdeforge/errors.hpp"
#include "pdeforge/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>

namespace pdeforge {

namespace {
constexpr double kSupportEps = 1e-9; // |beta| above this keeps a term active
}

void EAConfig::validate() const {
    pool.validate();
    if (population_size < 2) throw ConfigError("population_size must be >= 2");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (tournament_size < 1 || tournament_size > population_size)
        throw ConfigError("tournament_size must be in [1, population_size]");
    for (double p : {p_term_mutation, p_param_mutation, p_factor_swap})
        if (p < 0.0 || p > 1.0) throw ConfigError("probability out of [0,1]");
    if (eps_fit <= 0.0) throw ConfigError("eps_fit must be positive");
    if (sigma_param < 0.0) throw ConfigError("sigma_param must be non-negative");
    if (lasso_tol <= 0.0 || lasso_max_iter < 1) throw ConfigError("bad lasso settings");
}

std::vector<std::size_t> Equation::feature_term_indices() const {
    std::vector<std::size_t> idx;
    idx.reserve(chromosome.terms.size() - 1);
    for (std::size_t i = 0; i < chromosome.terms.size(); ++i)
        if (i != right_part_idx) idx.push_back(i);
    return idx;
}

namespace {

std::string term_key_string(const Term& t) {
    char buf[32];
    const auto key = t.key();
    std::snprintf(buf, sizeof buf, "%03zu|%03d|", key.n_factors, key.total_power);
    return buf + key.sig;
}

} // namespace

std::string Equation::structure_key() const {
    std::string key = term_key_string(target_term());
    const auto features = feature_term_indices();
    for (std::size_t pos : support) {
        key += ";";
        key += term_key_string(chromosome.terms[features[pos]]);
    }
    return key;
}

std::vector<std::string> Equation::active_signatures() const {
    std::vector<std::string> sigs{target_term().signature()};
    const auto features = feature_term_indices();
    for (std::size_t pos : support) sigs.push_back(chromosome.terms[features[pos]].signature());
    return sigs;
}

std::set<std::string> describes_variables(const Equation& eq) {
    std::set<std::string> vars = eq.target_term().variables();
    const auto features = eq.feature_term_indices();
    for (std::size_t pos : eq.support) {
        const auto tv = eq.chromosome.terms[features[pos]].variables();
        vars.insert(tv.begin(), tv.end());
    }
    return vars;
}

Equation evaluate_equation(const Chromosome& chromosome, double lambda, const TokenCache& cache,
                           const TabooSet& taboo, const EAConfig& cfg) {
    const std::size_t n = chromosome.terms.size();
    if (n < 2) throw DataError("chromosome with a single term cannot be split into sides");

    // evaluate all terms once, then share one Gram matrix across every split;
    // plain derivative tokens borrow the cached array instead of copying
    std::vector<std::vector<double>> fields(n);
    std::vector<const double*> cols(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Term& term = chromosome.terms[i];
        if (term.factors.size() == 1 && term.factors[0].power() == 1 &&
            term.factors[0].family->kind == TokenKind::derivative) {
            cols[i] = cache.at(term.factors[0].cache_key()).data();
        } else {
            fields[i] = evaluate_term(term, cache);
            cols[i] = fields[i].data();
        }
    }
    const GramSystem gs = GramSystem::from_columns(cols, cache.grid.size());

    Equation best;
    bool have_best = false;
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<std::size_t> features;
        features.reserve(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            if (i != t) features.push_back(i);

        const LassoResult lres =
            lasso_gram(gs, t, features, lambda, cfg.lasso_tol, cfg.lasso_max_iter);
        std::vector<std::size_t> support;
        for (std::size_t j = 0; j < lres.beta.size(); ++j)
            if (std::abs(lres.beta[j]) > kSupportEps) support.push_back(j);

        const OlsResult ols = ols_gram(gs, t, features, support);
        std::vector<double> alpha(features.size(), 0.0);
        for (std::size_t a = 0; a < support.size(); ++a) alpha[support[a]] = ols.alpha[a];

        Equation eq;
        eq.chromosome = chromosome;
        eq.right_part_idx = t;
        eq.alpha = std::move(alpha);
        eq.support = support;
        eq.intercept = ols.intercept;
        eq.residual_norm = std::sqrt(residual_sq_norm(gs, t, features, eq.alpha, eq.intercept));
        eq.fitness = 1.0 / std::max(eq.residual_norm, cfg.eps_fit);
        eq.lambda = lambda;
        eq.lasso_converged = lres.converged;
        eq.rank_deficient = ols.rank_deficient;
        if (!have_best || eq.fitness > best.fitness) {
            best = std::move(eq);
            have_best = true;
        }
    }

    const auto described = describes_variables(best);
    if (described.size() == 1 && taboo.count(*described.begin())) {
        best.fitness = 0.0;
        best.taboo_penalized = true;
    }
    best.tie_key = best.structure_key();
    return best;
}

// ---------------------------------------------------------------------------
// variation operators
// ---------------------------------------------------------------------------

namespace {

std::multiset<std::string> family_profile(const Term& t) {
    std::multiset<std::string> prof;
    for (const auto& f : t.factors) prof.insert(f.family->family_name);
    return prof;
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Clamp a derivative factor back into its family's allowed (axis, order, power)
// box after a convex parameter blend.
void repair_factor(Factor& f) {
    const TokenFamily& fam = *f.family;
    f.params["power"] = clamp(std::round(f.params["power"]), 1.0, fam.max_power);
    int axis = static_cast<int>(
        clamp(std::round(f.params["axis"]), 0.0, static_cast<double>(fam.axis_names.size() - 1)));
    if (fam.kind == TokenKind::derivative) {
        if (!fam.axis_orders[axis].allowed()) {
            for (std::size_t a = 0; a < fam.axis_orders.size(); ++a)
                if (fam.axis_orders[a].allowed()) {
                    axis = static_cast<int>(a);
                    break;
                }
        }
        const auto& ao = fam.axis_orders[axis];
        int order = static_cast<int>(clamp(std::round(f.params["order"]),
                                           static_cast<double>(ao.lo), static_cast<double>(ao.hi)));
        f.params["order"] = order;
        f.params["axis"] = order == 0 ? 0 : axis;
    } else {
        f.params["axis"] = axis;
        for (const auto& spec : fam.extra_params)
            f.params[spec.name] = spec.integral
                                      ? clamp(std::round(f.params[spec.name]), spec.lo, spec.hi)
                                      : clamp(f.params[spec.name], spec.lo, spec.hi);
    }
}

std::pair<Term, Term> blend_terms(const Term& ta, const Term& tb, Rng& rng) {
    // factors matched by family name after sorting
    auto by_family = [](const Factor& x, const Factor& y) {
        return x.family->family_name < y.family->family_name;
    };
    std::vector<Factor> fa = ta.factors, fb = tb.factors;
    std::stable_sort(fa.begin(), fa.end(), by_family);
    std::stable_sort(fb.begin(), fb.end(), by_family);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Factor> child1, child2;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        Factor c1 = fa[i], c2 = fb[i];
        for (auto& [name, va] : c1.params) {
            const double vb = fb[i].params.at(name);
            const double mix = unit(rng);
            const double x1 = mix * va + (1.0 - mix) * vb;
            const double x2 = mix * vb + (1.0 - mix) * va;
            va = x1;
            c2.params[name] = x2;
        }
        repair_factor(c1);
        repair_factor(c2);
        child1.push_back(std::move(c1));
        child2.push_back(std::move(c2));
    }
    return {make_term(std::move(child1)), make_term(std::move(child2))};
}

// Insert `term` into `terms` unless its signature collides; fall back to the
// original parent slot, then give up on the slot.
void insert_term(std::vector<Term>& terms, std::set<std::string>& sigs, Term term,
                 const Term* fallback) {
    if (sigs.insert(term.signature()).second) {
        terms.push_back(std::move(term));
        return;
    }
    if (fallback != nullptr && sigs.insert(fallback->signature()).second)
        terms.push_back(*fallback);
}

} // namespace

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng,
                                            const EAConfig& cfg) {
    std::map<std::string, const Term*> sig_a, sig_b;
    for (const auto& t : a.terms) sig_a[t.signature()] = &t;
    for (const auto& t : b.terms) sig_b[t.signature()] = &t;

    std::vector<Term> out1, out2;
    std::set<std::string> sigs1, sigs2;

    // group 1: identical signatures pass through untouched
    std::vector<const Term*> only_a, only_b;
    for (const auto& t : a.terms) {
        if (sig_b.count(t.signature())) {
            sigs1.insert(t.signature());
            out1.push_back(t);
            sigs2.insert(t.signature());
            out2.push_back(t);
        } else {
            only_a.push_back(&t);
        }
    }
    for (const auto& t : b.terms)
        if (!sig_a.count(t.signature())) only_b.push_back(&t);

    // group 2: same token families, different parameters -> convex blend
    std::vector<bool> used_b(only_b.size(), false);
    std::vector<const Term*> unique_a;
    std::vector<const Term*> unique_b;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const Term* ta : only_a) {
        std::size_t match = only_b.size();
        const auto prof_a = family_profile(*ta);
        for (std::size_t j = 0; j < only_b.size(); ++j) {
            if (used_b[j]) continue;
            if (only_b[j]->factors.size() == ta->factors.size() &&
                family_profile(*only_b[j]) == prof_a) {
                match = j;
                break;
            }
        }
        if (match == only_b.size()) {
            unique_a.push_back(ta);
            continue;
        }
        used_b[match] = true;
        auto [c1, c2] = blend_terms(*ta, *only_b[match], rng);
        insert_term(out1, sigs1, std::move(c1), ta);
        insert_term(out2, sigs2, std::move(c2), only_b[match]);
    }
    for (std::size_t j = 0; j < only_b.size(); ++j)
        if (!used_b[j]) unique_b.push_back(only_b[j]);

    // group 3: unique terms may swap between the offspring
    const std::size_t pairs = std::min(unique_a.size(), unique_b.size());
    for (std::size_t i = 0; i < pairs; ++i) {
        const bool swap = unit(rng) < cfg.p_factor_swap;
        const Term* to1 = swap ? unique_b[i] : unique_a[i];
        const Term* to2 = swap ? unique_a[i] : unique_b[i];
        insert_term(out1, sigs1, *to1, unique_a[i]);
        insert_term(out2, sigs2, *to2, unique_b[i]);
    }
    for (std::size_t i = pairs; i < unique_a.size(); ++i)
        insert_term(out1, sigs1, *unique_a[i], nullptr);
    for (std::size_t i = pairs; i < unique_b.size(); ++i)
        insert_term(out2, sigs2, *unique_b[i], nullptr);

    Chromosome c1 = make_chromosome(std::move(out1));
    Chromosome c2 = make_chromosome(std::move(out2));
    if (!c1.valid(cfg.pool)) c1 = a;
    if (!c2.valid(cfg.pool)) c2 = b;
    return {std::move(c1), std::move(c2)};
}

namespace {

Term param_mutate_term(const Term& term, Rng& rng, const EAConfig& cfg, const TokenPool& pool) {
    std::vector<Factor> factors = term.factors;
    const std::size_t fi =
        std::uniform_int_distribution<std::size_t>(0, factors.size() - 1)(rng);
    Factor& f = factors[fi];
    const TokenFamily& fam = *f.family;

    enum class Move { continuous, axis_order, insert };
    std::vector<Move> moves;
    if (fam.kind == TokenKind::parametric && !fam.extra_params.empty())
        moves.push_back(Move::continuous);
    if (fam.kind == TokenKind::derivative) moves.push_back(Move::axis_order);
    if (factors.size() < static_cast<std::size_t>(cfg.pool.max_factors_per_term) && !pool.empty())
        moves.push_back(Move::insert);
    if (moves.empty()) return term;

    switch (moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)]) {
    case Move::continuous: {
        const auto& spec =
            fam.extra_params[std::uniform_int_distribution<std::size_t>(
                0, fam.extra_params.size() - 1)(rng)];
        const double step =
            std::normal_distribution<double>(0.0, cfg.sigma_param * (spec.hi - spec.lo))(rng);
        double v = f.params.at(spec.name) + step;
        f.params[spec.name] = clamp(spec.integral ? std::round(v) : v, spec.lo, spec.hi);
        break;
    }
    case Move::axis_order: {
        std::vector<int> axes;
        for (std::size_t a = 0; a < fam.axis_orders.size(); ++a)
            if (fam.axis_orders[a].allowed()) axes.push_back(static_cast<int>(a));
        const int axis = axes[std::uniform_int_distribution<std::size_t>(0, axes.size() - 1)(rng)];
        const auto& ao = fam.axis_orders[axis];
        const int order = std::uniform_int_distribution<int>(ao.lo, ao.hi)(rng);
        f.params["axis"] = static_cast<double>(order == 0 ? 0 : axis);
        f.params["order"] = static_cast<double>(order);
        break;
    }
    case Move::insert: {
        const auto& famp =
            pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
        factors.push_back(random_factor(rng, famp, cfg.pool));
        break;
    }
    }
    return make_term(std::move(factors));
}

} // namespace

Chromosome mutate(const Chromosome& chromosome, Rng& rng, const EAConfig& cfg,
                  const TokenPool& pool) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Term> terms = chromosome.terms;
    std::set<std::string> sigs;
    for (const auto& t : terms) sigs.insert(t.signature());

    for (auto& term : terms) {
        const std::string old_sig = term.signature();
        Term candidate = term;
        if (unit(rng) < cfg.p_term_mutation) {
            candidate = random_term(rng, pool, cfg.pool);
        } else if (unit(rng) < cfg.p_param_mutation) {
            candidate = param_mutate_term(term, rng, cfg, pool);
        } else {
            continue;
        }
        const std::string new_sig = candidate.signature();
        if (new_sig == old_sig) continue;
        if (sigs.count(new_sig)) continue; // collision: keep the original term
        sigs.erase(old_sig);
        sigs.insert(new_sig);
        term = std::move(candidate);
    }
    return make_chromosome(std::move(terms));
}

bool equation_better(const Equation& a, const Equation& b) {
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    const std::string& ka = a.tie_key.empty() ? a.structure_key() : a.tie_key;
    const std::string& kb = b.tie_key.empty() ? b.structure_key() : b.tie_key;
    return ka < kb;
}

namespace {

const Equation& tournament_pick(const std::vector<Equation>& pop, Rng& rng, int size) {
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    std::size_t best = pick(rng);
    for (int i = 1; i < size; ++i) {
        const std::size_t c = pick(rng);
        if (equation_better(pop[c], pop[best])) best = c;
    }
    return pop[best];
}

// Evaluation is pure, so offspring parallelism cannot change results; only
// the wall time depends on the thread count.
std::vector<Equation> evaluate_all(const std::vector<Chromosome>& chromosomes, double lambda,
                                   const TokenCache& cache, const TabooSet& taboo,
                                   const EAConfig& cfg) {
    std::vector<Equation> out(chromosomes.size());
    std::exception_ptr error;
    const std::int64_t n = static_cast<std::int64_t>(chromosomes.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            out[i] = evaluate_equation(chromosomes[i], lambda, cache, taboo, cfg);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

} // namespace

Equation run_equation_ea(const EAConfig& cfg, const TokenPool& pool, double lambda,
                         const TokenCache& cache, const TabooSet& taboo) {
    cfg.validate();
    Rng rng(cfg.rng_seed);

    std::vector<Chromosome> seeds;
    seeds.reserve(cfg.population_size);
    for (int i = 0; i < cfg.population_size; ++i)
        seeds.push_back(random_chromosome(rng, pool, cfg.pool));
    std::vector<Equation> pop = evaluate_all(seeds, lambda, cache, taboo, cfg);

    Equation best = pop.front();
    for (const auto& eq : pop)
        if (equation_better(eq, best)) best = eq;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::stable_sort(pop.begin(), pop.end(), equation_better);
        if (pop.size() > static_cast<std::size_t>(cfg.population_size))
            pop.resize(cfg.population_size);

        std::vector<Chromosome> offspring;
        offspring.reserve(cfg.population_size);
        while (static_cast<int>(offspring.size()) < cfg.population_size) {
            const Equation& pa = tournament_pick(pop, rng, cfg.tournament_size);
            const Equation& pb = tournament_pick(pop, rng, cfg.tournament_size);
            auto [c1, c2] = crossover(pa.chromosome, pb.chromosome, rng, cfg);
            offspring.push_back(mutate(c1, rng, cfg, pool));
            if (static_cast<int>(offspring.size()) < cfg.population_size)
                offspring.push_back(mutate(c2, rng, cfg, pool));
        }

        std::vector<Equation> evaluated = evaluate_all(offspring, lambda, cache, taboo, cfg);
        for (auto& eq : evaluated) {
            if (equation_better(eq, best)) best = eq;
            pop.push_back(std::move(eq));
        }
    }
    return best;
}

std::vector<double> equation_residual_field(const Equation& eq, const TokenCache& cache) {
    std::vector<double> out(cache.grid.size(), eq.intercept);
    const auto features = eq.feature_term_indices();
    for (std::size_t pos : eq.support) {
        const auto field = evaluate_term(eq.chromosome.terms[features[pos]], cache);
        kernels::add_scaled(out, field, eq.alpha[pos]);
    }
    const auto target = evaluate_term(eq.target_term(), cache);
    kernels::add_scaled(out, target, -1.0);
    return out;
}

std::string render_equation(const Equation& eq) {
    char buf[64];
    std::string lhs;
    const auto features = eq.feature_term_indices();
    for (std::size_t i = 0; i < eq.support.size(); ++i) {
        const double c = eq.alpha[eq.support[i]];
        if (i == 0) {
            std::snprintf(buf, sizeof buf, "%.6f", c);
            lhs += buf;
        } else {
            std::snprintf(buf, sizeof buf, "%.6f", std::abs(c));
            lhs += c < 0.0 ? " - " : " + ";
            lhs += buf;
        }
        lhs += " * " + eq.chromosome.terms[features[eq.support[i]]].signature();
    }
    if (lhs.empty()) lhs = "0";
    std::string out = lhs + " = " + eq.target_term().signature();
    if (eq.intercept != 0.0) {
        // printed on the target side, so the sign flips
        std::snprintf(buf, sizeof buf, "%.6f", -eq.intercept);
        out += " + const(";
        out += buf;
        out += ")";
    }
    return out;
}

} // namespace pdeforge
