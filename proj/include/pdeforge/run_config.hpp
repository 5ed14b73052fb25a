#pragma once

#include "pdeforge/equation.hpp"
#include "pdeforge/moeadd.hpp"

#include <filesystem>

namespace pdeforge {

/// Resolved run settings from the flat key-value config file (see README for
/// the key reference). Reports embed the rendered form for provenance.
struct RunConfig {
    struct AxisOrderDecl {
        std::string axis;
        int lo = 0;
        int hi = 0;
    };
    struct VarPoolDecl {
        std::string var;
        std::vector<AxisOrderDecl> axes;
    };
    struct ParametricDecl {
        std::string function; // "sin"
        double freq_lo = 0.5;
        double freq_hi = 5.0;
    };

    std::filesystem::path dataset;
    std::vector<VarPoolDecl> pool_decls; // empty: all variables, orders 0..max_order
    std::vector<ParametricDecl> parametric;
    PoolConfig pool_cfg;
    DiffConfig diff;
    EAConfig ea;
    MOEADDConfig moeadd;
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 0;
};

RunConfig parse_run_config(const std::string& text);     // throws ConfigError
RunConfig load_run_config(const std::filesystem::path&); // throws ConfigError

/// Token families named by the config, validated against the dataset.
TokenPool build_pool(const RunConfig& cfg, const Dataset& dataset);

/// Canonical echo of every resolved setting.
std::string render_config(const RunConfig& cfg);

} // namespace pdeforge
