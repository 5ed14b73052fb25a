#include "pdeforge/token.hpp"

#include "pdeforge/errors.hpp"
#include "pdeforge/kernels.hpp"
#include "pdeforge/signature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace pdeforge {

void TokenFamily::validate() const {
    if (family_name.empty()) throw ConfigError("token family needs a name");
    if (axis_names.empty()) throw ConfigError("token family needs axis names");
    if (max_power < 1) throw ConfigError("token family max_power must be >= 1");
    if (kind == TokenKind::derivative) {
        if (variable.empty()) throw ConfigError("derivative family needs a variable");
        if (axis_orders.size() != axis_names.size())
            throw ConfigError("derivative family axis_orders size mismatch");
        bool any = false;
        for (const auto& ao : axis_orders) any = any || ao.allowed();
        if (!any) throw ConfigError("derivative family excludes every axis");
    } else {
        if (function != "sin") throw ConfigError("unsupported parametric function: " + function);
        for (const auto& p : extra_params)
            if (p.lo > p.hi) throw ConfigError("parametric bound disorder for " + p.name);
    }
}

std::vector<ParamSpec> TokenFamily::param_schema() const {
    std::vector<ParamSpec> schema;
    schema.push_back({"axis", 0.0, static_cast<double>(axis_names.size() - 1), true});
    if (kind == TokenKind::derivative) {
        int lo = 1 << 20, hi = -1;
        for (const auto& ao : axis_orders)
            if (ao.allowed()) {
                lo = std::min(lo, ao.lo);
                hi = std::max(hi, ao.hi);
            }
        schema.push_back({"order", static_cast<double>(lo), static_cast<double>(hi), true});
    } else {
        for (const auto& p : extra_params) schema.push_back(p);
    }
    schema.push_back({"power", 1.0, static_cast<double>(max_power), true});
    return schema;
}

std::string Factor::cache_key() const {
    if (family->kind == TokenKind::derivative) {
        const int order = param_int("order");
        const std::string axis =
            order == 0 ? family->axis_names.front() : family->axis_names[param_int("axis")];
        return derivative_signature(family->variable, axis, order);
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", params.at("freq"));
    return family->function + "(" + buf + "*" + family->axis_names[param_int("axis")] + ")";
}

std::string Factor::signature() const {
    std::string sig = cache_key();
    if (power() > 1) sig += "^" + std::to_string(power());
    return sig;
}

std::string Factor::variable() const {
    return family->kind == TokenKind::derivative ? family->variable : std::string();
}

void Factor::validate() const {
    if (!family) throw ConfigError("factor without a family");
    if (!params.count("axis") || !params.count("power"))
        throw ConfigError("factor missing axis/power parameter");
    const int axis = param_int("axis");
    if (axis < 0 || axis >= static_cast<int>(family->axis_names.size()))
        throw ConfigError("factor axis out of range");
    const int p = power();
    if (p < 1 || p > family->max_power) throw ConfigError("factor power out of range");
    if (family->kind == TokenKind::derivative) {
        const int order = param_int("order");
        if (order == 0) {
            if (axis != 0) throw ConfigError("order-0 factor must use canonical axis 0");
            bool raw_allowed = false;
            for (const auto& ao : family->axis_orders)
                raw_allowed = raw_allowed || (ao.allowed() && ao.lo == 0);
            if (!raw_allowed) throw ConfigError("order-0 token not in this family");
            return;
        }
        const auto& ao = family->axis_orders[axis];
        if (!ao.allowed() || order < ao.lo || order > ao.hi)
            throw ConfigError("factor order out of range for axis");
    } else {
        for (const auto& spec : family->extra_params) {
            const auto it = params.find(spec.name);
            if (it == params.end()) throw ConfigError("factor missing param " + spec.name);
            if (it->second < spec.lo || it->second > spec.hi)
                throw ConfigError("factor param " + spec.name + " out of bounds");
        }
    }
}

std::string factor_signature(const Factor& factor) { return factor.signature(); }

std::string Term::signature() const {
    std::string sig;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) sig += "*";
        sig += factors[i].signature();
    }
    return sig;
}

int Term::total_power() const {
    int p = 0;
    for (const auto& f : factors) p += f.power();
    return p;
}

Term::Key Term::key() const { return {factors.size(), total_power(), signature()}; }

std::set<std::string> Term::variables() const {
    std::set<std::string> vars;
    for (const auto& f : factors) {
        const std::string v = f.variable();
        if (!v.empty()) vars.insert(v);
    }
    return vars;
}

Term make_term(std::vector<Factor> factors) {
    if (factors.empty()) throw ConfigError("term needs at least one factor");
    // canonicalize order-0 derivative factors: the axis is meaningless
    for (auto& f : factors)
        if (f.family->kind == TokenKind::derivative && f.param_int("order") == 0)
            f.params["axis"] = 0.0;
    // merge factors with identical cache keys into powers
    std::sort(factors.begin(), factors.end(),
              [](const Factor& a, const Factor& b) { return a.cache_key() < b.cache_key(); });
    std::vector<Factor> merged;
    for (auto& f : factors) {
        if (!merged.empty() && merged.back().cache_key() == f.cache_key()) {
            const int p = std::min(merged.back().power() + f.power(), f.family->max_power);
            merged.back().params["power"] = static_cast<double>(p);
        } else {
            merged.push_back(std::move(f));
        }
    }
    Term term{std::move(merged)};
    for (const auto& f : term.factors) f.validate();
    return term;
}

void PoolConfig::validate() const {
    if (max_factors_per_term < 1) throw ConfigError("max_factors_per_term must be >= 1");
    if (n_terms_min < 2) throw ConfigError("n_terms_min must be >= 2 (left and right parts)");
    if (n_terms_max < n_terms_min) throw ConfigError("n_terms_max below n_terms_min");
    if (max_power < 1) throw ConfigError("max_power must be >= 1");
}

bool Chromosome::valid(const PoolConfig& cfg) const {
    if (terms.size() < static_cast<std::size_t>(cfg.n_terms_min) ||
        terms.size() > static_cast<std::size_t>(cfg.n_terms_max))
        return false;
    std::set<std::string> sigs;
    for (const auto& t : terms) {
        if (t.factors.empty() ||
            t.factors.size() > static_cast<std::size_t>(cfg.max_factors_per_term))
            return false;
        if (!sigs.insert(t.signature()).second) return false;
    }
    return true;
}

Chromosome make_chromosome(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.key() < b.key(); });
    for (std::size_t i = 1; i < terms.size(); ++i)
        if (terms[i].signature() == terms[i - 1].signature())
            throw ConfigError("duplicate term signature in chromosome: " + terms[i].signature());
    return Chromosome{std::move(terms)};
}

namespace {

std::vector<double> parametric_field(const Factor& f, const TokenCache& cache) {
    const Grid& grid = cache.grid;
    const std::size_t axis = static_cast<std::size_t>(f.param_int("axis"));
    const double freq = f.params.at("freq");
    const auto strides = grid.strides();
    std::vector<double> coord(grid.shape[axis]);
    for (std::size_t i = 0; i < coord.size(); ++i)
        coord[i] = std::sin(freq * grid.coordinate(axis, i));
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = coord[(i / strides[axis]) % grid.shape[axis]];
    return out;
}

} // namespace

std::vector<double> evaluate_term(const Term& term, const TokenCache& cache) {
    if (term.factors.empty()) throw ConfigError("cannot evaluate empty term");
    std::vector<double> out(cache.grid.size());
    bool first = true;
    std::vector<double> scratch;
    for (const auto& f : term.factors) {
        const std::vector<double>* field = nullptr;
        if (f.family->kind == TokenKind::derivative) {
            field = cache.find(f.cache_key());
            if (field == nullptr) throw MissingTokenError("token not in cache: " + f.cache_key());
        } else {
            scratch = parametric_field(f, cache);
            field = &scratch;
        }
        if (first) {
            kernels::fill_pow(out, *field, f.power());
            first = false;
        } else {
            kernels::multiply_pow(out, *field, f.power());
        }
    }
    return out;
}

Factor random_factor(Rng& rng, const TokenFamilyPtr& family, const PoolConfig& cfg) {
    Factor f;
    f.family = family;
    const int max_power = std::min(cfg.max_power, family->max_power);
    f.params["power"] = static_cast<double>(std::uniform_int_distribution<int>(1, max_power)(rng));
    if (family->kind == TokenKind::derivative) {
        std::vector<int> axes;
        for (std::size_t a = 0; a < family->axis_orders.size(); ++a)
            if (family->axis_orders[a].allowed()) axes.push_back(static_cast<int>(a));
        const int axis = axes[std::uniform_int_distribution<std::size_t>(0, axes.size() - 1)(rng)];
        const auto& ao = family->axis_orders[axis];
        const int order = std::uniform_int_distribution<int>(ao.lo, ao.hi)(rng);
        f.params["axis"] = static_cast<double>(order == 0 ? 0 : axis);
        f.params["order"] = static_cast<double>(order);
    } else {
        f.params["axis"] = static_cast<double>(std::uniform_int_distribution<int>(
            0, static_cast<int>(family->axis_names.size()) - 1)(rng));
        for (const auto& spec : family->extra_params)
            f.params[spec.name] =
                spec.integral
                    ? static_cast<double>(std::uniform_int_distribution<int>(
                          static_cast<int>(spec.lo), static_cast<int>(spec.hi))(rng))
                    : std::uniform_real_distribution<double>(spec.lo, spec.hi)(rng);
    }
    return f;
}

Term random_term(Rng& rng, const TokenPool& pool, const PoolConfig& cfg) {
    if (pool.empty()) throw ConfigError("token pool is empty");
    const int n = std::uniform_int_distribution<int>(1, cfg.max_factors_per_term)(rng);
    std::vector<Factor> factors;
    for (int i = 0; i < n; ++i) {
        const auto& fam = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
        factors.push_back(random_factor(rng, fam, cfg));
    }
    return make_term(std::move(factors));
}

Chromosome random_chromosome(Rng& rng, const TokenPool& pool, const PoolConfig& cfg) {
    cfg.validate();
    const int n = std::uniform_int_distribution<int>(cfg.n_terms_min, cfg.n_terms_max)(rng);
    std::vector<Term> terms;
    std::set<std::string> sigs;
    int retries = 0;
    const int retry_cap = 64 * cfg.n_terms_max;
    while (static_cast<int>(terms.size()) < n) {
        Term t = random_term(rng, pool, cfg);
        if (sigs.insert(t.signature()).second) {
            terms.push_back(std::move(t));
        } else if (++retries > retry_cap) {
            if (static_cast<int>(terms.size()) >= cfg.n_terms_min) break;
            throw ConfigError("token pool too small to draw distinct terms");
        }
    }
    return make_chromosome(std::move(terms));
}

TokenFamilyPtr derivative_family(const std::string& variable,
                                 const std::vector<std::string>& axis_names,
                                 std::vector<TokenFamily::AxisOrders> axis_orders, int max_power) {
    TokenFamily fam;
    fam.family_name = variable;
    fam.kind = TokenKind::derivative;
    fam.variable = variable;
    fam.axis_names = axis_names;
    fam.axis_orders = std::move(axis_orders);
    fam.max_power = max_power;
    fam.validate();
    return std::make_shared<const TokenFamily>(std::move(fam));
}

TokenPool derivative_pool(const Dataset& dataset, int order_lo, int order_hi, int max_power) {
    TokenPool pool;
    std::vector<TokenFamily::AxisOrders> orders(dataset.grid.rank(), {order_lo, order_hi});
    for (const auto& f : dataset.fields)
        pool.push_back(derivative_family(f.name, dataset.grid.dim_names, orders, max_power));
    return pool;
}

TokenFamilyPtr sine_family(const std::vector<std::string>& axis_names, double freq_lo,
                           double freq_hi, int max_power) {
    TokenFamily fam;
    fam.family_name = "sin";
    fam.kind = TokenKind::parametric;
    fam.function = "sin";
    fam.axis_names = axis_names;
    fam.max_power = max_power;
    fam.extra_params.push_back({"freq", freq_lo, freq_hi, false});
    fam.validate();
    return std::make_shared<const TokenFamily>(std::move(fam));
}

} // namespace pdeforge
