// Times the OpenMP kernels against their serial reference implementations.
// Usage: pdeforge_bench [points]

#include "pdeforge/differentiation.hpp"
#include "pdeforge/kernels.hpp"
#include "pdeforge/parallel.hpp"
#include "pdeforge/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

using namespace pdeforge;
using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

template <typename F> double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clock_type::now();
        fn();
        best = std::min(best, ms_since(t0));
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-22s serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main(int argc, char** argv) {
    std::size_t side = 192;
    if (argc > 1) side = static_cast<std::size_t>(std::strtoull(argv[1], nullptr, 10));

    Grid grid;
    grid.dim_names = {"t", "x", "y"};
    grid.shape = {side / 4, side, side};
    grid.origins = {0.0, 0.0, 0.0};
    grid.steps = {0.01, 0.05, 0.05};
    const std::size_t m = grid.size();

    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> field(m);
    for (auto& v : field) v = gauss(rng);

    std::printf("grid %zux%zux%zu (%zu points), %d threads\n", grid.shape[0], grid.shape[1],
                grid.shape[2], m, parallel::max_threads());

    DiffConfig cfg;
    std::vector<double> out(m);

    // differentiation along the contiguous axis
    const double d_ser = time_best_of(3, [&] {
        parallel::set_max_threads(1);
        out = differentiate(grid, field, 2, 1, cfg);
    });
    const double d_par = time_best_of(3, [&] {
        parallel::set_max_threads(0);
        out = differentiate(grid, field, 2, 1, cfg);
    });
    report("differentiate", d_ser, d_par);

    // pointwise term product
    std::vector<double> acc(m, 1.0);
    const double p_ser = time_best_of(5, [&] {
        parallel::set_max_threads(1);
        kernels::fill_pow(acc, field, 2);
        kernels::multiply_pow(acc, out, 1);
    });
    const double p_par = time_best_of(5, [&] {
        parallel::set_max_threads(0);
        kernels::fill_pow(acc, field, 2);
        kernels::multiply_pow(acc, out, 1);
    });
    report("term product", p_ser, p_par);

    // gram matrix of six term columns
    std::vector<std::vector<double>> cols(6, field);
    for (std::size_t i = 1; i < cols.size(); ++i)
        for (std::size_t j = 0; j < m; ++j) cols[i][j] = std::sin(0.1 * i + cols[i - 1][j]);
    std::vector<const double*> ptrs;
    for (const auto& c : cols) ptrs.push_back(c.data());
    std::vector<double> gram, sums;
    const double g_ser = time_best_of(5, [&] {
        parallel::set_max_threads(1);
        kernels::gram_and_sums(ptrs, m, gram, sums);
    });
    const double g_par = time_best_of(5, [&] {
        parallel::set_max_threads(0);
        kernels::gram_and_sums(ptrs, m, gram, sums);
    });
    report("gram (6 columns)", g_ser, g_par);

    parallel::set_max_threads(0);
    return 0;
}
