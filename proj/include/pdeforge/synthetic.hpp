#pragma once

#include "pdeforge/differentiation.hpp"
#include "pdeforge/grid.hpp"

#include <map>
#include <random>
#include <string>

namespace pdeforge {

enum class SynthKind { heat1d, advection1d, taylor_green };

/// Desk-scale datasets with known governing equations.
///
/// heat1d:      u(t,x) = e^{-a k^2 t} sin(kx) + amp2 e^{-a k2^2 t} sin(k2 x)
/// advection1d: u(t,x) = sin(k (x - c t))     + amp2 sin(k2 (x - c t))
/// taylor_green (exact incompressible Navier-Stokes solution):
///   u = -cos x sin y e^{-2 nu t}
///   v =  sin x cos y e^{-2 nu t}
///   p = -(rho/4)(cos 2x + cos 2y) e^{-4 nu t}
struct SynthSpec {
    SynthKind kind = SynthKind::heat1d;
    std::map<std::string, double> params;
    Grid grid;
    double noise_std = 0.0; // relative, multiplicative Gaussian

    double param(const std::string& name, double fallback) const;
    void validate() const; // throws ConfigError

    static SynthSpec heat1d_default();
    static SynthSpec advection1d_default();
    static SynthSpec taylor_green_default();
};

SynthKind synth_kind_from_string(const std::string& name); // throws ConfigError
std::string to_string(SynthKind kind);

Dataset generate(const SynthSpec& spec, std::mt19937_64& rng);

/// Exact derivative fields up to max_order per axis, noise-free.
TokenCache analytic_derivatives(const SynthSpec& spec, int max_order = 3);

/// Human-readable statement of the governing system, for file headers.
std::vector<std::string> ground_truth_comments(const SynthSpec& spec);

} // namespace pdeforge
