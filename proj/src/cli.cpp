#include "pdeforge/cli.hpp"

#include "pdeforge/errors.hpp"
#include "pdeforge/moeadd.hpp"
#include "pdeforge/parallel.hpp"
#include "pdeforge/run_config.hpp"
#include "pdeforge/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace pdeforge {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string num17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_lambdas(const std::string& text) {
    std::vector<double> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, ',')) {
        try {
            out.push_back(std::stod(cur));
        } catch (...) {
            throw ConfigError("--lambdas: cannot parse '" + cur + "'");
        }
    }
    if (out.empty()) throw ConfigError("--lambdas: empty list");
    for (double v : out)
        if (!(v > 0.0)) throw ConfigError("--lambdas: entries must be positive");
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write: " + path.string());
    out << text;
    if (!out) throw DataError("I/O failure while writing: " + path.string());
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
    std::string kind;
    std::string out;
    double alpha = 1.0, k = 2.0, amp2 = 0.0, k2 = 3.0;
    double c = 1.0;
    double nu = 0.1, rho = 1.0;
    double noise = 0.0;
    std::vector<std::size_t> shape;
    std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& args) {
    SynthSpec spec;
    switch (synth_kind_from_string(args.kind)) {
    case SynthKind::heat1d: spec = SynthSpec::heat1d_default(); break;
    case SynthKind::advection1d: spec = SynthSpec::advection1d_default(); break;
    case SynthKind::taylor_green: spec = SynthSpec::taylor_green_default(); break;
    }
    spec.params["alpha"] = args.alpha;
    spec.params["k"] = args.k;
    spec.params["amp2"] = args.amp2;
    spec.params["k2"] = args.k2;
    spec.params["c"] = args.c;
    spec.params["nu"] = args.nu;
    spec.params["rho"] = args.rho;
    spec.noise_std = args.noise;
    if (!args.shape.empty()) {
        if (args.shape.size() != spec.grid.rank())
            throw ConfigError("--shape needs " + std::to_string(spec.grid.rank()) + " entries");
        for (std::size_t a = 0; a < spec.grid.rank(); ++a) {
            const double span =
                spec.grid.steps[a] * static_cast<double>(spec.grid.shape[a] - 1);
            spec.grid.shape[a] = args.shape[a];
            spec.grid.steps[a] = span / static_cast<double>(args.shape[a] - 1);
        }
    }
    Rng rng(args.seed);
    const Dataset ds = generate(spec, rng);
    save_dataset(ds, args.out, ground_truth_comments(spec));
    std::cout << "wrote " << args.out << " (" << ds.fields.size() << " fields, "
              << ds.grid.size() << " points)\n";
    return 0;
}

// ----------------------------------------------------------------- diff ----

int cmd_diff(const std::string& data, const std::string& out, const DiffConfig& cfg) {
    const Dataset ds = load_dataset(data);
    const TokenCache cache = build_token_cache(ds, cfg);
    Dataset dump;
    dump.grid = cache.grid;
    for (const auto& var : cache.variables) dump.fields.push_back({var, cache.arrays.at(var)});
    for (const auto& d : cache.derivatives)
        dump.fields.push_back({d.signature, cache.arrays.at(d.signature)});
    save_dataset(dump, out, {"token cache of " + data});
    std::cout << "wrote " << out << " (" << dump.fields.size() << " token fields)\n";
    return 0;
}

// ------------------------------------------------------------- discover ----

int cmd_discover(const std::string& config_path, const std::string& lambdas_text,
                 const std::string& out, const std::string& residual_dump,
                 std::uint64_t seed_override, bool seed_given) {
    RunConfig cfg = load_run_config(config_path);
    if (seed_given) {
        cfg.seed = seed_override;
        cfg.ea.rng_seed = seed_override;
        cfg.moeadd.rng_seed = seed_override;
    }
    const Dataset ds = load_dataset(cfg.dataset);
    const TokenPool pool = build_pool(cfg, ds);

    SparsityVector lambdas{parse_lambdas(lambdas_text)};
    if (lambdas.size() != ds.fields.size())
        throw ConfigError("--lambdas has " + std::to_string(lambdas.size()) + " entries for " +
                          std::to_string(ds.fields.size()) + " dependent variables");

    const TokenCache cache = build_token_cache(ds, cfg.diff);
    SystemTrace trace;
    const EquationSystem sys = discover_system_on_cache(cache, pool, lambdas, cfg.ea, &trace);

    std::ostringstream rep;
    rep << "pdeforge discover report\n";
    rep << "dataset: " << cfg.dataset.string() << "\n";
    rep << "lambdas:";
    for (double v : lambdas.lambdas) rep << " " << num17(v);
    rep << "\nseed: " << cfg.seed << "\n";
    rep << "degenerate: " << (sys.degenerate ? "yes" : "no") << "\n\n";
    for (std::size_t i = 0; i < sys.equations.size(); ++i) {
        rep << "equation " << i << ": " << render_equation(sys.equations[i]) << "\n";
        rep << "  quality: " << num17(sys.quality[i]) << "\n";
        rep << "  complexity: " << sys.complexity[i] << "\n";
        rep << "  fitness: " << num17(sys.equations[i].fitness) << "\n";
        rep << "  describes:";
        for (const auto& v : sys.described[i]) rep << " " << v;
        rep << "\n";
    }
    std::cout << rep.str();
    rep << "\nresolved config:\n" << render_config(cfg);
    write_text(out, rep.str());
    std::cout << "wrote " << out << "\n";

    if (!residual_dump.empty()) {
        Dataset rd;
        rd.grid = ds.grid;
        for (std::size_t i = 0; i < trace.residuals.size(); ++i)
            rd.fields.push_back({"r" + std::to_string(i), trace.residuals[i]});
        save_dataset(rd, residual_dump, {"discover residual fields"});
    }
    return 0;
}

// --------------------------------------------------------------- pareto ----

int cmd_pareto(const std::string& config_path, const std::string& out_dir,
               std::uint64_t seed_override, bool seed_given) {
    RunConfig cfg = load_run_config(config_path);
    if (seed_given) {
        cfg.seed = seed_override;
        cfg.ea.rng_seed = seed_override;
        cfg.moeadd.rng_seed = seed_override;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    std::filesystem::create_directories(cfg.out_dir);

    const Dataset ds = load_dataset(cfg.dataset);
    const TokenPool pool = build_pool(cfg, ds);

    MoeaddHooks hooks;
    hooks.on_epoch = [](int epoch, const ParetoArchive& archive,
                        const std::vector<Individual>& pop) {
        std::cout << "epoch " << epoch << ": archive " << archive.individuals.size()
                  << ", population " << pop.size() << "\n";
    };
    const ParetoArchive archive = run_moeadd(ds, pool, cfg.moeadd, cfg.ea, cfg.diff, &hooks);
    const auto rows = aggregate_frontier(archive);

    ordered_json root;
    root["objective_dimension"] = archive.ideal_point.size();
    root["ideal_point"] = archive.ideal_point;
    root["resolved_config"] = render_config(cfg);
    root["individuals"] = ordered_json::array();
    for (const auto& row : rows) {
        const Individual& ind = archive.individuals[row.archive_index];
        ordered_json j;
        j["lambdas"] = ind.genotype.lambdas;
        j["objectives"] = ind.objectives;
        j["quality"] = ind.system.quality;
        j["complexity"] = ind.system.complexity;
        j["total_complexity"] = row.total_complexity;
        j["total_error"] = row.total_error;
        j["dominated_2d"] = row.dominated_2d;
        j["equations"] = ordered_json::array();
        for (const auto& eq : ind.system.equations) j["equations"].push_back(render_equation(eq));
        root["individuals"].push_back(std::move(j));
    }
    write_text(cfg.out_dir / "frontier.json", root.dump(2) + "\n");

    std::ostringstream csv;
    csv << "total_complexity,total_error\n";
    for (const auto& row : rows) csv << row.total_complexity << "," << num17(row.total_error) << "\n";
    write_text(cfg.out_dir / "frontier.csv", csv.str());

    std::cout << "\n total_complexity   total_error      on_2d_front  equations\n";
    for (const auto& row : rows) {
        const Individual& ind = archive.individuals[row.archive_index];
        char line[128];
        std::snprintf(line, sizeof line, " %16d   %-14.6g   %-11s ", row.total_complexity,
                      row.total_error, row.dominated_2d ? "no" : "yes");
        std::cout << line;
        for (std::size_t e = 0; e < ind.system.equations.size(); ++e)
            std::cout << (e ? " | " : "") << render_equation(ind.system.equations[e]);
        std::cout << "\n";
    }
    std::cout << "wrote " << (cfg.out_dir / "frontier.json").string() << " and "
              << (cfg.out_dir / "frontier.csv").string() << "\n";
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"pdeforge: data-driven discovery of PDE systems"};
    app.require_subcommand(1);

    bool deterministic = false;
    app.add_flag("--deterministic", deterministic, "single-threaded, reproducible evaluation");

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->fallthrough();
    synth_cmd->add_option("kind", synth.kind, "heat1d | advection1d | taylor_green")->required();
    synth_cmd->add_option("--out", synth.out, "output EPDE-GRID file")->required();
    synth_cmd->add_option("--alpha", synth.alpha, "heat1d diffusivity");
    synth_cmd->add_option("--k", synth.k, "primary wavenumber");
    synth_cmd->add_option("--amp2", synth.amp2, "secondary mode amplitude");
    synth_cmd->add_option("--k2", synth.k2, "secondary mode wavenumber");
    synth_cmd->add_option("--c", synth.c, "advection speed");
    synth_cmd->add_option("--nu", synth.nu, "taylor_green viscosity");
    synth_cmd->add_option("--rho", synth.rho, "taylor_green density");
    synth_cmd->add_option("--noise", synth.noise, "relative Gaussian noise std");
    synth_cmd->add_option("--shape", synth.shape, "grid points per axis");
    synth_cmd->add_option("--seed", synth.seed, "noise seed");

    std::string diff_data, diff_out;
    DiffConfig diff_cfg;
    auto* diff_cmd = app.add_subcommand("diff", "precompute the derivative token cache");
    diff_cmd->fallthrough();
    diff_cmd->add_option("--data", diff_data, "input EPDE-GRID file")->required();
    diff_cmd->add_option("--out", diff_out, "output EPDE-GRID file")->required();
    diff_cmd->add_option("--window", diff_cfg.window, "fit window (odd)");
    diff_cmd->add_option("--degree", diff_cfg.degree, "polynomial degree");
    diff_cmd->add_option("--max-order", diff_cfg.max_order, "highest derivative order");

    std::string disc_config, disc_lambdas, disc_out = "report.txt", disc_residuals;
    std::uint64_t seed = 0;
    auto* disc_cmd = app.add_subcommand("discover", "discover one system at fixed lambdas");
    disc_cmd->fallthrough();
    disc_cmd->add_option("--config", disc_config, "run config file")->required();
    disc_cmd->add_option("--lambdas", disc_lambdas, "comma-separated sparsity constants")
        ->required();
    disc_cmd->add_option("--out", disc_out, "report file");
    disc_cmd->add_option("--dump-residuals", disc_residuals, "write residual fields here");
    auto* disc_seed = disc_cmd->add_option("--seed", seed, "run seed (overrides config)");

    std::string par_config, par_out;
    auto* par_cmd = app.add_subcommand("pareto", "build the Pareto frontier of systems");
    par_cmd->fallthrough();
    par_cmd->add_option("--config", par_config, "run config file")->required();
    par_cmd->add_option("--out", par_out, "output directory (overrides config)");
    auto* par_seed = par_cmd->add_option("--seed", seed, "run seed (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    parallel::init_from_env();
    if (deterministic) parallel::set_max_threads(1);

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth);
        if (diff_cmd->parsed()) return cmd_diff(diff_data, diff_out, diff_cfg);
        if (disc_cmd->parsed())
            return cmd_discover(disc_config, disc_lambdas, disc_out, disc_residuals, seed,
                                disc_seed->count() > 0);
        if (par_cmd->parsed()) return cmd_pareto(par_config, par_out, seed, par_seed->count() > 0);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace pdeforge
