#include "pdeforge/kernels.hpp"

#include "pdeforge/parallel.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>

namespace pdeforge::kernels {

namespace {

inline double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

// Walks the 1-D lines of a row-major array along one axis.
struct AxisLines {
    std::size_t len;    // points per line
    std::size_t stride; // element stride along the axis
    std::size_t count;  // number of lines
    std::size_t inner;  // product of dims after `axis`

    AxisLines(const std::vector<std::size_t>& shape, std::size_t axis) {
        len = shape[axis];
        std::size_t outer = 1, in = 1;
        for (std::size_t a = 0; a < axis; ++a) outer *= shape[a];
        for (std::size_t a = axis + 1; a < shape.size(); ++a) in *= shape[a];
        inner = in;
        stride = in;
        count = outer * in;
    }

    std::size_t base(std::size_t line) const {
        const std::size_t o = line / inner;
        const std::size_t i = line % inner;
        return o * inner * len + i;
    }
};

void filter_line(const double* in, double* out, std::size_t len, std::size_t stride,
                 const std::vector<std::vector<double>>& weights) {
    const std::size_t w = weights.front().size();
    for (std::size_t j = 0; j < len; ++j) {
        std::size_t start = 0;
        if (j > w / 2) start = std::min(j - w / 2, len - w);
        const std::size_t pos = j - start;
        const std::vector<double>& wv = weights[pos];
        double acc = 0.0;
        const double* p = in + start * stride;
        for (std::size_t i = 0; i < w; ++i) acc += wv[i] * p[i * stride];
        out[j * stride] = acc;
    }
}

} // namespace

namespace serial {

void fill_pow(std::span<double> out, std::span<const double> src, int power) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ipow(src[i], power);
}

void multiply_pow(std::span<double> acc, std::span<const double> src, int power) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] *= ipow(src[i], power);
}

void add_scaled(std::span<double> acc, std::span<const double> src, double c) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * src[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double sum(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
}

void gram_and_sums(const std::vector<const double*>& cols, std::size_t rows,
                   std::vector<double>& gram, std::vector<double>& sums) {
    const std::size_t n = cols.size();
    gram.assign(n * n, 0.0);
    sums.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        sums[i] = sum({cols[i], rows});
        for (std::size_t j = i; j < n; ++j) {
            const double g = dot({cols[i], rows}, {cols[j], rows});
            gram[i * n + j] = g;
            gram[j * n + i] = g;
        }
    }
}

void apply_axis_filter(std::span<const double> in, std::span<double> out,
                       const std::vector<std::size_t>& shape, std::size_t axis,
                       const std::vector<std::vector<double>>& weights) {
    const AxisLines lines(shape, axis);
    for (std::size_t l = 0; l < lines.count; ++l) {
        const std::size_t b = lines.base(l);
        filter_line(in.data() + b, out.data() + b, lines.len, lines.stride, weights);
    }
}

} // namespace serial

void fill_pow(std::span<double> out, std::span<const double> src, int power) {
    if (parallel::serial_mode()) return serial::fill_pow(out, src, power);
    const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = ipow(src[i], power);
}

void multiply_pow(std::span<double> acc, std::span<const double> src, int power) {
    if (parallel::serial_mode()) return serial::multiply_pow(acc, src, power);
    const std::int64_t n = static_cast<std::int64_t>(acc.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) acc[i] *= ipow(src[i], power);
}

void add_scaled(std::span<double> acc, std::span<const double> src, double c) {
    if (parallel::serial_mode()) return serial::add_scaled(acc, src, c);
    const std::int64_t n = static_cast<std::int64_t>(acc.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) acc[i] += c * src[i];
}

// Reductions stay serial on purpose: chunked OpenMP reductions change the
// summation order and the result would depend on the thread count.
double dot(std::span<const double> a, std::span<const double> b) {
    return serial::dot(a, b);
}

double sum(std::span<const double> v) { return serial::sum(v); }

void gram_and_sums(const std::vector<const double*>& cols, std::size_t rows,
                   std::vector<double>& gram, std::vector<double>& sums) {
    if (parallel::serial_mode()) return serial::gram_and_sums(cols, rows, gram, sums);
    const std::size_t n = cols.size();
    gram.assign(n * n, 0.0);
    sums.assign(n, 0.0);
    // One task per (i, j) pair; each inner product is summed serially so the
    // values match the reference bit for bit.
    const std::int64_t pairs = static_cast<std::int64_t>(n * (n + 1) / 2);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < pairs; ++t) {
        // unrank t -> (i, j), i <= j
        std::size_t i = 0;
        std::int64_t rem = t;
        while (rem >= static_cast<std::int64_t>(n - i)) {
            rem -= static_cast<std::int64_t>(n - i);
            ++i;
        }
        const std::size_t j = i + static_cast<std::size_t>(rem);
        const double g = serial::dot({cols[i], rows}, {cols[j], rows});
        gram[i * n + j] = g;
        gram[j * n + i] = g;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        sums[i] = serial::sum({cols[i], rows});
}

void apply_axis_filter(std::span<const double> in, std::span<double> out,
                       const std::vector<std::size_t>& shape, std::size_t axis,
                       const std::vector<std::vector<double>>& weights) {
    if (parallel::serial_mode()) return serial::apply_axis_filter(in, out, shape, axis, weights);
    const AxisLines lines(shape, axis);
    const std::int64_t count = static_cast<std::int64_t>(lines.count);
#pragma omp parallel for schedule(static)
    for (std::int64_t l = 0; l < count; ++l) {
        const std::size_t b = lines.base(static_cast<std::size_t>(l));
        filter_line(in.data() + b, out.data() + b, lines.len, lines.stride, weights);
    }
}

} // namespace pdeforge::kernels
