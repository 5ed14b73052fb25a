#pragma once

#include <cstddef>
#include <vector>

namespace pdeforge {

/// LASSO input: feature columns (the evaluated terms minus the target term),
/// the target term values, and the sparsity constant.
struct RegressionProblem {
    std::vector<std::vector<double>> columns;
    std::vector<double> target;
    double lambda = 0.0;

    std::size_t rows() const { return target.size(); }
    void validate() const; // throws DataError / ConfigError
};

struct LassoResult {
    std::vector<double> beta; // normalized space, one per feature column
    bool converged = false;
    bool degenerate_target = false; // zero-variance target, beta forced to 0
    int sweeps = 0;
    std::vector<double> objective_trace; // per-sweep penalized objective when traced
};

/// sign(z) * max(|z| - gamma, 0).
double soft_threshold(double z, double gamma);

/// Minimizes (1/(2M))||X b - y||^2 + lambda*||b||_1 by cyclic coordinate
/// descent, with columns and target centered and scaled to unit population
/// standard deviation internally. Constant columns get beta = 0.
LassoResult lasso(const RegressionProblem& problem, double tol = 1e-6, int max_iter = 10000,
                  bool trace = false);

struct OlsResult {
    std::vector<double> alpha; // one per support entry
    double intercept = 0.0;
    bool rank_deficient = false; // solved via minimum-norm pseudoinverse
};

/// Least squares with intercept on the raw columns restricted to `support`.
OlsResult ols_fit(const std::vector<std::vector<double>>& columns,
                  const std::vector<double>& target, const std::vector<std::size_t>& support);

// ---------------------------------------------------------------------------
// Gram-space engine. Equation evaluation computes one Gram matrix per
// chromosome and reuses it for every left/right split, so the per-split cost
// does not scale with the number of grid points.
// ---------------------------------------------------------------------------

struct GramSystem {
    std::size_t rows = 0;
    std::size_t n = 0;
    std::vector<double> gram; // n*n raw inner products
    std::vector<double> sums; // column sums

    static GramSystem from_columns(const std::vector<const double*>& cols, std::size_t rows);

    double mean(std::size_t i) const { return sums[i] / static_cast<double>(rows); }
    double cov(std::size_t i, std::size_t j) const {
        return gram[i * n + j] / static_cast<double>(rows) - mean(i) * mean(j);
    }
    double variance(std::size_t i) const {
        const double v = cov(i, i);
        return v > 0.0 ? v : 0.0;
    }
    bool constant(std::size_t i) const;
};

LassoResult lasso_gram(const GramSystem& gs, std::size_t target,
                       const std::vector<std::size_t>& features, double lambda, double tol,
                       int max_iter, bool trace = false);

OlsResult ols_gram(const GramSystem& gs, std::size_t target,
                   const std::vector<std::size_t>& features,
                   const std::vector<std::size_t>& support_positions);

/// ||sum_j alpha_j col_j + intercept - col_target||^2 computed from the Gram
/// matrix (clamped at zero against cancellation).
double residual_sq_norm(const GramSystem& gs, std::size_t target,
                        const std::vector<std::size_t>& features,
                        const std::vector<double>& alpha, double intercept);

} // namespace pdeforge
