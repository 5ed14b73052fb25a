#include "pdeforge/sparse_solver.hpp"

#include "pdeforge/errors.hpp"
#include "pdeforge/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iostream>

namespace pdeforge {

namespace {
constexpr double kVarEps = 1e-12; // relative variance floor for "constant"
}

void RegressionProblem::validate() const {
    if (columns.empty()) throw ConfigError("regression problem needs at least one column");
    if (target.empty()) throw DataError("regression problem has empty target");
    if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
    for (const auto& col : columns)
        if (col.size() != target.size())
            throw DataError("regression column length does not match target");
    for (double v : target)
        if (!std::isfinite(v)) throw DataError("non-finite value in regression target");
    for (const auto& col : columns)
        for (double v : col)
            if (!std::isfinite(v)) throw DataError("non-finite value in regression column");
    if (target.size() <= columns.size())
        std::cerr << "pdeforge: warning: regression with M=" << target.size()
                  << " rows and p=" << columns.size() << " columns\n";
}

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

GramSystem GramSystem::from_columns(const std::vector<const double*>& cols, std::size_t rows) {
    GramSystem gs;
    gs.rows = rows;
    gs.n = cols.size();
    kernels::gram_and_sums(cols, rows, gs.gram, gs.sums);
    return gs;
}

bool GramSystem::constant(std::size_t i) const {
    const double msq = gram[i * n + i] / static_cast<double>(rows);
    return variance(i) <= kVarEps * std::max(msq, 1e-300);
}

LassoResult lasso_gram(const GramSystem& gs, std::size_t target,
                       const std::vector<std::size_t>& features, double lambda, double tol,
                       int max_iter, bool trace) {
    if (tol <= 0.0) throw ConfigError("lasso tol must be positive");
    const std::size_t p = features.size();
    LassoResult res;
    res.beta.assign(p, 0.0);

    if (gs.constant(target)) {
        res.degenerate_target = true;
        res.converged = true;
        return res;
    }
    const double std_t = std::sqrt(gs.variance(target));

    // usable features: constant columns are dropped (beta stays 0)
    std::vector<std::size_t> active;
    std::vector<double> inv_std(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        if (gs.constant(features[j])) continue;
        active.push_back(j);
        inv_std[j] = 1.0 / std::sqrt(gs.variance(features[j]));
    }

    // correlations with the normalized target and among normalized features
    std::vector<double> cy(p, 0.0);
    for (std::size_t j : active) cy[j] = gs.cov(features[j], target) * inv_std[j] / std_t;
    std::vector<double> corr(p * p, 0.0);
    for (std::size_t a : active)
        for (std::size_t b : active)
            corr[a * p + b] = gs.cov(features[a], features[b]) * inv_std[a] * inv_std[b];

    auto objective = [&]() {
        double quad = 1.0, l1 = 0.0;
        for (std::size_t a : active) {
            quad -= 2.0 * res.beta[a] * cy[a];
            l1 += std::abs(res.beta[a]);
            for (std::size_t b : active) quad += res.beta[a] * corr[a * p + b] * res.beta[b];
        }
        return 0.5 * quad + lambda * l1;
    };

    for (int sweep = 0; sweep < max_iter; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t j : active) {
            double z = cy[j];
            for (std::size_t k : active)
                if (k != j) z -= corr[j * p + k] * res.beta[k];
            const double next = soft_threshold(z, lambda);
            max_delta = std::max(max_delta, std::abs(next - res.beta[j]));
            res.beta[j] = next;
        }
        res.sweeps = sweep + 1;
        if (trace) res.objective_trace.push_back(objective());
        if (max_delta < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

OlsResult ols_gram(const GramSystem& gs, std::size_t target,
                   const std::vector<std::size_t>& features,
                   const std::vector<std::size_t>& support_positions) {
    OlsResult res;
    const std::size_t s = support_positions.size();
    if (s == 0) {
        res.intercept = gs.mean(target);
        return res;
    }
    Eigen::MatrixXd cov(s, s);
    Eigen::VectorXd rhs(s);
    for (std::size_t a = 0; a < s; ++a) {
        const std::size_t ia = features[support_positions[a]];
        rhs(a) = gs.cov(ia, target);
        for (std::size_t b = 0; b < s; ++b) cov(a, b) = gs.cov(ia, features[support_positions[b]]);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(cov);
    if (cod.rank() < static_cast<Eigen::Index>(s)) res.rank_deficient = true;
    const Eigen::VectorXd alpha = cod.solve(rhs);
    res.alpha.assign(alpha.data(), alpha.data() + s);
    double mean_shift = 0.0;
    for (std::size_t a = 0; a < s; ++a)
        mean_shift += res.alpha[a] * gs.mean(features[support_positions[a]]);
    res.intercept = gs.mean(target) - mean_shift;
    return res;
}

double residual_sq_norm(const GramSystem& gs, std::size_t target,
                        const std::vector<std::size_t>& features,
                        const std::vector<double>& alpha, double intercept) {
    const double m = static_cast<double>(gs.rows);
    double rss = gs.gram[target * gs.n + target];
    rss += intercept * intercept * m;
    rss -= 2.0 * intercept * gs.sums[target];
    for (std::size_t a = 0; a < features.size(); ++a) {
        if (alpha[a] == 0.0) continue;
        const std::size_t ia = features[a];
        rss -= 2.0 * alpha[a] * gs.gram[ia * gs.n + target];
        rss += 2.0 * alpha[a] * intercept * gs.sums[ia];
        for (std::size_t b = 0; b < features.size(); ++b) {
            if (alpha[b] == 0.0) continue;
            rss += alpha[a] * alpha[b] * gs.gram[ia * gs.n + features[b]];
        }
    }
    return rss > 0.0 ? rss : 0.0;
}

namespace {

GramSystem gram_of_problem(const std::vector<std::vector<double>>& columns,
                           const std::vector<double>& target) {
    std::vector<const double*> cols;
    cols.reserve(columns.size() + 1);
    for (const auto& c : columns) cols.push_back(c.data());
    cols.push_back(target.data());
    return GramSystem::from_columns(cols, target.size());
}

} // namespace

LassoResult lasso(const RegressionProblem& problem, double tol, int max_iter, bool trace) {
    problem.validate();
    const GramSystem gs = gram_of_problem(problem.columns, problem.target);
    std::vector<std::size_t> features(problem.columns.size());
    for (std::size_t j = 0; j < features.size(); ++j) features[j] = j;
    return lasso_gram(gs, problem.columns.size(), features, problem.lambda, tol, max_iter, trace);
}

OlsResult ols_fit(const std::vector<std::vector<double>>& columns,
                  const std::vector<double>& target, const std::vector<std::size_t>& support) {
    if (target.empty()) throw DataError("ols_fit: empty target");
    for (std::size_t j : support)
        if (j >= columns.size()) throw ConfigError("ols_fit: support index out of range");
    if (support.size() >= target.size())
        throw ConfigError("ols_fit: support larger than the number of rows");
    const GramSystem gs = gram_of_problem(columns, target);
    std::vector<std::size_t> features(columns.size());
    for (std::size_t j = 0; j < features.size(); ++j) features[j] = j;
    return ols_gram(gs, columns.size(), features, support);
}

} // namespace pdeforge
