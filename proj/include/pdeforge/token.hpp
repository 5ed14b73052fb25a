#pragma once

#include "pdeforge/differentiation.hpp"

#include <compare>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace pdeforge {

using Rng = std::mt19937_64;

enum class TokenKind { derivative, parametric };

struct ParamSpec {
    std::string name;
    double lo;
    double hi;
    bool integral;
};

/// One class of tokens the search may draw from: the pure derivatives of one
/// dependent variable (with per-axis order bounds), or a parametric function
/// such as a sine with tunable frequency.
struct TokenFamily {
    struct AxisOrders {
        int lo = 0;
        int hi = -1; // hi < lo: axis excluded
        bool allowed() const { return hi >= lo; }
    };

    std::string family_name;
    TokenKind kind = TokenKind::derivative;
    std::string variable;                // derivative kind
    std::string function;                // parametric kind, e.g. "sin"
    std::vector<std::string> axis_names; // grid axes, indexable by the axis param
    std::vector<AxisOrders> axis_orders; // derivative kind, one per axis
    int max_power = 2;
    std::vector<ParamSpec> extra_params; // parametric kind, e.g. {"freq", lo, hi, false}

    void validate() const; // throws ConfigError
    std::vector<ParamSpec> param_schema() const;
};

using TokenFamilyPtr = std::shared_ptr<const TokenFamily>;
using TokenPool = std::vector<TokenFamilyPtr>;

/// A concrete token: family plus fixed parameter values.
struct Factor {
    TokenFamilyPtr family;
    std::map<std::string, double> params; // deterministic iteration order

    int power() const { return static_cast<int>(params.at("power")); }
    int param_int(const std::string& name) const { return static_cast<int>(params.at(name)); }

    /// Key into the token cache: the signature with the power stripped.
    std::string cache_key() const;
    std::string signature() const;

    /// Dependent variable this factor involves ("" for parametric tokens).
    std::string variable() const;

    void validate() const;
};

std::string factor_signature(const Factor& factor);

/// Product of factors, canonically ordered; identical tokens merge into one
/// factor with summed (clamped) power.
struct Term {
    std::vector<Factor> factors;

    std::string signature() const;
    int total_power() const;

    struct Key {
        std::size_t n_factors;
        int total_power;
        std::string sig;
        auto operator<=>(const Key&) const = default;
    };
    Key key() const;

    std::set<std::string> variables() const;
};

Term make_term(std::vector<Factor> factors);

struct PoolConfig {
    int max_factors_per_term = 2;
    int n_terms_min = 2;
    int n_terms_max = 6;
    int max_power = 2;

    void validate() const;
};

/// Candidate equation structure: a list of terms with distinct signatures,
/// kept sorted by Term::Key.
struct Chromosome {
    std::vector<Term> terms;

    bool valid(const PoolConfig& cfg) const;
};

Chromosome make_chromosome(std::vector<Term> terms);

/// Pointwise product over the grid of each factor's field raised to its power.
std::vector<double> evaluate_term(const Term& term, const TokenCache& cache);

Term random_term(Rng& rng, const TokenPool& pool, const PoolConfig& cfg);
Chromosome random_chromosome(Rng& rng, const TokenPool& pool, const PoolConfig& cfg);

Factor random_factor(Rng& rng, const TokenFamilyPtr& family, const PoolConfig& cfg);

/// Derivative families for every dataset variable with uniform order bounds
/// [order_lo, order_hi] on every axis.
TokenPool derivative_pool(const Dataset& dataset, int order_lo, int order_hi, int max_power);

TokenFamilyPtr derivative_family(const std::string& variable,
                                 const std::vector<std::string>& axis_names,
                                 std::vector<TokenFamily::AxisOrders> axis_orders, int max_power);

TokenFamilyPtr sine_family(const std::vector<std::string>& axis_names, double freq_lo,
                           double freq_hi, int max_power);

} // namespace pdeforge
