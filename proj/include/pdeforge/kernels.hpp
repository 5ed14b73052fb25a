#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Data-parallel inner loops shared by differentiation, term evaluation and the
// regression front-end. Every kernel exists twice: the OpenMP version used in
// production and a plain serial reference in kernels::serial used by the test
// suite and the benchmark. Both must produce bitwise-identical results: the
// parallel versions never split a single reduction across threads, they only
// distribute independent output elements.

namespace pdeforge::kernels {

namespace serial {

/// out[i] = src[i]^power (power >= 1).
void fill_pow(std::span<double> out, std::span<const double> src, int power);

/// acc[i] *= src[i]^power.
void multiply_pow(std::span<double> acc, std::span<const double> src, int power);

/// acc[i] += c * src[i].
void add_scaled(std::span<double> acc, std::span<const double> src, double c);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> v);

/// Raw inner products and column sums of n columns of length rows:
/// gram[i*n+j] = <col_i, col_j>, sums[i] = sum(col_i).
void gram_and_sums(const std::vector<const double*>& cols, std::size_t rows,
                   std::vector<double>& gram, std::vector<double>& sums);

/// Apply a length-w filter along `axis` of a row-major array with the given
/// shape. For each 1-D line, out[j] = sum_i weights[pos][i] * in[start+i]
/// where start = clamp(j - w/2, 0, len - w) and pos = j - start.
void apply_axis_filter(std::span<const double> in, std::span<double> out,
                       const std::vector<std::size_t>& shape, std::size_t axis,
                       const std::vector<std::vector<double>>& weights);

} // namespace serial

void fill_pow(std::span<double> out, std::span<const double> src, int power);
void multiply_pow(std::span<double> acc, std::span<const double> src, int power);
void add_scaled(std::span<double> acc, std::span<const double> src, double c);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> v);
void gram_and_sums(const std::vector<const double*>& cols, std::size_t rows,
                   std::vector<double>& gram, std::vector<double>& sums);
void apply_axis_filter(std::span<const double> in, std::span<double> out,
                       const std::vector<std::size_t>& shape, std::size_t axis,
                       const std::vector<std::vector<double>>& weights);

} // namespace pdeforge::kernels
