#include "pdeforge/synthetic.hpp"

#include "pdeforge/errors.hpp"
#include "pdeforge/signature.hpp"

#include <cmath>
#include <numbers>

namespace pdeforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// o-th derivative of sin / cos, exact sign-flip cycle (keeps analytic
// identities like incompressibility exact in floating point)
double dsin(double th, int o) {
    switch (o & 3) {
    case 0: return std::sin(th);
    case 1: return std::cos(th);
    case 2: return -std::sin(th);
    default: return -std::cos(th);
    }
}
double dcos(double th, int o) { return dsin(th, o + 1); }

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

Grid uniform_grid(std::vector<std::string> names, std::vector<std::size_t> shape,
                  std::vector<double> lo, std::vector<double> hi) {
    Grid g;
    g.dim_names = std::move(names);
    g.shape = std::move(shape);
    g.origins = std::move(lo);
    for (std::size_t a = 0; a < g.shape.size(); ++a)
        g.steps.push_back((hi[a] - g.origins[a]) / static_cast<double>(g.shape[a] - 1));
    g.validate();
    return g;
}

// value of the order-th pure derivative along `axis` (order 0 = raw field);
// coords are physical coordinates in grid axis order
double analytic_value(const SynthSpec& spec, const std::string& var, std::size_t axis, int order,
                      const std::vector<double>& c) {
    switch (spec.kind) {
    case SynthKind::heat1d: {
        const double a = spec.param("alpha", 1.0);
        const double k1 = spec.param("k", 2.0), a1 = 1.0;
        const double k2 = spec.param("k2", 3.0), a2 = spec.param("amp2", 0.0);
        double out = 0.0;
        for (const auto& [amp, k] : {std::pair{a1, k1}, std::pair{a2, k2}}) {
            if (amp == 0.0) continue;
            const double env = amp * std::exp(-a * k * k * c[0]);
            if (order == 0 || axis == 0)
                out += env * ipow(-a * k * k, order) * std::sin(k * c[1]);
            else
                out += env * ipow(k, order) * dsin(k * c[1], order);
        }
        return out;
    }
    case SynthKind::advection1d: {
        const double v = spec.param("c", 1.0);
        const double k1 = spec.param("k", 2.0), a1 = 1.0;
        const double k2 = spec.param("k2", 3.0), a2 = spec.param("amp2", 0.0);
        double out = 0.0;
        for (const auto& [amp, k] : {std::pair{a1, k1}, std::pair{a2, k2}}) {
            if (amp == 0.0) continue;
            const double phase = k * (c[1] - v * c[0]);
            if (order == 0)
                out += amp * std::sin(phase);
            else if (axis == 0)
                out += amp * ipow(-k * v, order) * dsin(phase, order);
            else
                out += amp * ipow(k, order) * dsin(phase, order);
        }
        return out;
    }
    case SynthKind::taylor_green: {
        const double nu = spec.param("nu", 0.1);
        const double rho = spec.param("rho", 1.0);
        const double x = c[1], y = c[2];
        const double e2 = std::exp(-2.0 * nu * c[0]);
        const double e4 = std::exp(-4.0 * nu * c[0]);
        if (var == "u") {
            if (order == 0) return -std::cos(x) * std::sin(y) * e2;
            if (axis == 0) return ipow(-2.0 * nu, order) * (-std::cos(x) * std::sin(y) * e2);
            if (axis == 1) return -dcos(x, order) * std::sin(y) * e2;
            return -std::cos(x) * dsin(y, order) * e2;
        }
        if (var == "v") {
            if (order == 0) return std::sin(x) * std::cos(y) * e2;
            if (axis == 0) return ipow(-2.0 * nu, order) * (std::sin(x) * std::cos(y) * e2);
            if (axis == 1) return dsin(x, order) * std::cos(y) * e2;
            return std::sin(x) * dcos(y, order) * e2;
        }
        // pressure
        if (order == 0) return -(rho / 4.0) * (std::cos(2.0 * x) + std::cos(2.0 * y)) * e4;
        if (axis == 0)
            return ipow(-4.0 * nu, order) *
                   (-(rho / 4.0) * (std::cos(2.0 * x) + std::cos(2.0 * y)) * e4);
        if (axis == 1) return -(rho / 4.0) * ipow(2.0, order) * dcos(2.0 * x, order) * e4;
        return -(rho / 4.0) * ipow(2.0, order) * dcos(2.0 * y, order) * e4;
    }
    }
    throw ConfigError("unknown synthetic kind");
}

std::vector<std::string> kind_variables(SynthKind kind) {
    if (kind == SynthKind::taylor_green) return {"u", "v", "p"};
    return {"u"};
}

} // namespace

double SynthSpec::param(const std::string& name, double fallback) const {
    const auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
}

void SynthSpec::validate() const {
    grid.validate();
    if (noise_std < 0.0) throw ConfigError("noise_std must be non-negative");
    const std::size_t want = kind == SynthKind::taylor_green ? 3 : 2;
    if (grid.rank() != want)
        throw ConfigError("synthetic kind needs a rank-" + std::to_string(want) + " grid");
    switch (kind) {
    case SynthKind::heat1d:
        if (param("alpha", 1.0) <= 0.0) throw ConfigError("heat1d needs alpha > 0");
        break;
    case SynthKind::advection1d:
        if (param("k", 2.0) == 0.0) throw ConfigError("advection1d needs k != 0");
        break;
    case SynthKind::taylor_green:
        if (param("nu", 0.1) <= 0.0 || param("rho", 1.0) <= 0.0)
            throw ConfigError("taylor_green needs nu > 0 and rho > 0");
        break;
    }
}

SynthSpec SynthSpec::heat1d_default() {
    SynthSpec s;
    s.kind = SynthKind::heat1d;
    s.params = {{"alpha", 1.0}, {"k", 2.0}, {"amp2", 0.0}, {"k2", 3.0}};
    s.grid = uniform_grid({"t", "x"}, {64, 64}, {0.0, 0.0}, {0.5, kTwoPi});
    return s;
}

SynthSpec SynthSpec::advection1d_default() {
    SynthSpec s;
    s.kind = SynthKind::advection1d;
    s.params = {{"c", 1.0}, {"k", 2.0}, {"amp2", 0.0}, {"k2", 3.0}};
    s.grid = uniform_grid({"t", "x"}, {64, 64}, {0.0, 0.0}, {0.5, kTwoPi});
    return s;
}

SynthSpec SynthSpec::taylor_green_default() {
    SynthSpec s;
    s.kind = SynthKind::taylor_green;
    s.params = {{"nu", 0.1}, {"rho", 1.0}};
    s.grid = uniform_grid({"t", "x", "y"}, {32, 48, 48}, {0.0, 0.0, 0.0}, {1.0, kTwoPi, kTwoPi});
    return s;
}

SynthKind synth_kind_from_string(const std::string& name) {
    if (name == "heat1d") return SynthKind::heat1d;
    if (name == "advection1d") return SynthKind::advection1d;
    if (name == "taylor_green") return SynthKind::taylor_green;
    throw ConfigError("unknown synthetic kind: " + name);
}

std::string to_string(SynthKind kind) {
    switch (kind) {
    case SynthKind::heat1d: return "heat1d";
    case SynthKind::advection1d: return "advection1d";
    default: return "taylor_green";
    }
}

Dataset generate(const SynthSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    Dataset ds;
    ds.grid = spec.grid;
    const std::size_t m = spec.grid.size();
    std::vector<double> coords(spec.grid.rank());
    for (const auto& var : kind_variables(spec.kind)) {
        DataField f;
        f.name = var;
        f.values.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const auto idx = spec.grid.unflatten(i);
            for (std::size_t a = 0; a < coords.size(); ++a)
                coords[a] = spec.grid.coordinate(a, idx[a]);
            f.values[i] = analytic_value(spec, var, 0, 0, coords);
        }
        ds.fields.push_back(std::move(f));
    }
    if (spec.noise_std > 0.0) {
        std::normal_distribution<double> gauss(0.0, spec.noise_std);
        for (auto& f : ds.fields)
            for (auto& v : f.values) v *= 1.0 + gauss(rng);
    }
    ds.validate();
    return ds;
}

TokenCache analytic_derivatives(const SynthSpec& spec, int max_order) {
    spec.validate();
    if (max_order < 1) throw ConfigError("analytic_derivatives: max_order must be >= 1");
    TokenCache cache;
    cache.grid = spec.grid;
    cache.diff_cfg = DiffConfig{};
    cache.diff_cfg.max_order = max_order;
    const std::size_t m = spec.grid.size();
    std::vector<double> coords(spec.grid.rank());
    for (const auto& var : kind_variables(spec.kind)) {
        cache.variables.push_back(var);
        for (int order = 0; order <= max_order; ++order) {
            for (std::size_t axis = 0; axis < spec.grid.rank(); ++axis) {
                if (order == 0 && axis > 0) break;
                const std::string sig =
                    derivative_signature(var, spec.grid.dim_names[axis], order);
                std::vector<double> values(m);
                for (std::size_t i = 0; i < m; ++i) {
                    const auto idx = spec.grid.unflatten(i);
                    for (std::size_t a = 0; a < coords.size(); ++a)
                        coords[a] = spec.grid.coordinate(a, idx[a]);
                    values[i] = analytic_value(spec, var, axis, order, coords);
                }
                cache.arrays[sig] = std::move(values);
                if (order > 0) cache.derivatives.push_back({var, axis, order, sig});
            }
        }
    }
    return cache;
}

std::vector<std::string> ground_truth_comments(const SynthSpec& spec) {
    char buf[160];
    switch (spec.kind) {
    case SynthKind::heat1d:
        std::snprintf(buf, sizeof buf, "truth: d1u/dt1 = %.6f * d2u/dx2", spec.param("alpha", 1.0));
        return {"kind: heat1d", buf};
    case SynthKind::advection1d:
        std::snprintf(buf, sizeof buf, "truth: d1u/dt1 = %.6f * d1u/dx1", -spec.param("c", 1.0));
        return {"kind: advection1d", buf};
    case SynthKind::taylor_green: {
        std::vector<std::string> out{"kind: taylor_green"};
        const double nu = spec.param("nu", 0.1);
        const double rho = spec.param("rho", 1.0);
        std::snprintf(buf, sizeof buf,
                      "truth: d1u/dt1 + u*d1u/dx1 + v*d1u/dy1 = %.6f * (d2u/dx2 + d2u/dy2) - "
                      "%.6f * d1p/dx1",
                      nu, 1.0 / rho);
        out.push_back(buf);
        std::snprintf(buf, sizeof buf,
                      "truth: d1v/dt1 + u*d1v/dx1 + v*d1v/dy1 = %.6f * (d2v/dx2 + d2v/dy2) - "
                      "%.6f * d1p/dy1",
                      nu, 1.0 / rho);
        out.push_back(buf);
        out.push_back("truth: d1u/dx1 + d1v/dy1 = 0");
        return out;
    }
    }
    return {};
}

} // namespace pdeforge
