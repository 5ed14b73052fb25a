#include "pdeforge/run_config.hpp"

#include "pdeforge/errors.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pdeforge {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw ConfigError("config key '" + key + "': cannot parse number '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("config key '" + key + "': cannot parse integer '" + v + "'");
    return out;
}

// "t:0-1" or "x:3" (shorthand for 0-3)
RunConfig::AxisOrderDecl parse_axis_orders(const std::string& key, const std::string& tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
        throw ConfigError("pool entry '" + key + "': expected axis:orders, got '" + tok + "'");
    RunConfig::AxisOrderDecl decl;
    decl.axis = tok.substr(0, colon);
    const std::string orders = tok.substr(colon + 1);
    const auto dash = orders.find('-');
    if (dash == std::string::npos) {
        decl.lo = 0;
        decl.hi = to_int(key, orders);
    } else {
        decl.lo = to_int(key, orders.substr(0, dash));
        decl.hi = to_int(key, orders.substr(dash + 1));
    }
    if (decl.lo < 0 || decl.hi < decl.lo)
        throw ConfigError("pool entry '" + key + "': bad order range in '" + tok + "'");
    return decl;
}

} // namespace

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": unclosed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");

        if (section == "data") {
            if (key == "dataset") cfg.dataset = value;
            else throw ConfigError("unknown [data] key: " + key);
        } else if (section == "pool") {
            if (key == "max_factors") cfg.pool_cfg.max_factors_per_term = to_int(key, value);
            else if (key == "n_terms_min") cfg.pool_cfg.n_terms_min = to_int(key, value);
            else if (key == "n_terms_max") cfg.pool_cfg.n_terms_max = to_int(key, value);
            else if (key == "max_power") cfg.pool_cfg.max_power = to_int(key, value);
            else {
                RunConfig::VarPoolDecl decl;
                decl.var = key;
                std::istringstream toks(value);
                std::string tok;
                while (toks >> tok) decl.axes.push_back(parse_axis_orders(key, tok));
                if (decl.axes.empty())
                    throw ConfigError("pool entry '" + key + "' declares no axes");
                cfg.pool_decls.push_back(std::move(decl));
            }
        } else if (section == "parametric") {
            if (key != "sin") throw ConfigError("unknown parametric family: " + key);
            RunConfig::ParametricDecl decl;
            decl.function = key;
            const auto colon = value.find(':');
            const auto dash = value.find('-', colon);
            if (value.rfind("freq:", 0) != 0 || dash == std::string::npos)
                throw ConfigError("parametric '" + key + "': expected freq:<lo>-<hi>");
            decl.freq_lo = to_double(key, value.substr(5, dash - 5));
            decl.freq_hi = to_double(key, value.substr(dash + 1));
            cfg.parametric.push_back(decl);
        } else if (section == "diff") {
            if (key == "window") cfg.diff.window = to_int(key, value);
            else if (key == "degree") cfg.diff.degree = to_int(key, value);
            else if (key == "max_order") cfg.diff.max_order = to_int(key, value);
            else throw ConfigError("unknown [diff] key: " + key);
        } else if (section == "ea") {
            if (key == "population") cfg.ea.population_size = to_int(key, value);
            else if (key == "epochs") cfg.ea.epochs = to_int(key, value);
            else if (key == "tournament") cfg.ea.tournament_size = to_int(key, value);
            else if (key == "p_term_mutation") cfg.ea.p_term_mutation = to_double(key, value);
            else if (key == "p_param_mutation") cfg.ea.p_param_mutation = to_double(key, value);
            else if (key == "p_factor_swap") cfg.ea.p_factor_swap = to_double(key, value);
            else if (key == "sigma_param") cfg.ea.sigma_param = to_double(key, value);
            else if (key == "eps_fit") cfg.ea.eps_fit = to_double(key, value);
            else if (key == "lasso_tol") cfg.ea.lasso_tol = to_double(key, value);
            else if (key == "lasso_max_iter") cfg.ea.lasso_max_iter = to_int(key, value);
            else throw ConfigError("unknown [ea] key: " + key);
        } else if (section == "moeadd") {
            if (key == "divisions") cfg.moeadd.divisions = to_int(key, value);
            else if (key == "neighborhood") cfg.moeadd.neighborhood = to_int(key, value);
            else if (key == "epochs") cfg.moeadd.epochs = to_int(key, value);
            else if (key == "p_mut") cfg.moeadd.p_mut = to_double(key, value);
            else if (key == "p_xover") cfg.moeadd.p_xover = to_double(key, value);
            else if (key == "sigma_mut") cfg.moeadd.sigma_mut = to_double(key, value);
            else if (key == "p_local") cfg.moeadd.p_local = to_double(key, value);
            else if (key == "lambda_lo") cfg.moeadd.lambda_lo = to_double(key, value);
            else if (key == "lambda_hi") cfg.moeadd.lambda_hi = to_double(key, value);
            else if (key == "pbi_theta") cfg.moeadd.pbi_theta = to_double(key, value);
            else throw ConfigError("unknown [moeadd] key: " + key);
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = value;
            else throw ConfigError("unknown [output] key: " + key);
        } else if (section == "run") {
            if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
            else throw ConfigError("unknown [run] key: " + key);
        } else {
            throw ConfigError("unknown config section: [" + section + "]");
        }
    }
    if (cfg.dataset.empty()) throw ConfigError("config is missing [data] dataset");
    cfg.pool_cfg.validate();
    cfg.diff.validate();
    cfg.ea.pool = cfg.pool_cfg;
    cfg.ea.rng_seed = cfg.seed;
    cfg.moeadd.rng_seed = cfg.seed;
    cfg.ea.validate();
    cfg.moeadd.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

TokenPool build_pool(const RunConfig& cfg, const Dataset& dataset) {
    TokenPool pool;
    if (cfg.pool_decls.empty()) {
        pool = derivative_pool(dataset, 0, cfg.diff.max_order, cfg.pool_cfg.max_power);
    } else {
        for (const auto& decl : cfg.pool_decls) {
            if (dataset.find(decl.var) == nullptr)
                throw ConfigError("pool variable '" + decl.var + "' is not in the dataset");
            std::vector<TokenFamily::AxisOrders> orders(dataset.grid.rank(), {0, -1});
            for (const auto& ao : decl.axes) {
                const std::size_t axis = dataset.grid.axis_index(ao.axis);
                if (ao.hi > cfg.diff.max_order)
                    throw ConfigError("pool variable '" + decl.var + "' asks for order " +
                                      std::to_string(ao.hi) + " above diff max_order " +
                                      std::to_string(cfg.diff.max_order));
                orders[axis] = {ao.lo, ao.hi};
            }
            pool.push_back(derivative_family(decl.var, dataset.grid.dim_names, orders,
                                             cfg.pool_cfg.max_power));
        }
    }
    for (const auto& pd : cfg.parametric)
        pool.push_back(
            sine_family(dataset.grid.dim_names, pd.freq_lo, pd.freq_hi, cfg.pool_cfg.max_power));
    return pool;
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "[data]\ndataset = " << cfg.dataset.string() << "\n";
    out << "[pool]\n";
    for (const auto& decl : cfg.pool_decls) {
        out << decl.var << " =";
        for (const auto& ao : decl.axes)
            out << " " << ao.axis << ":" << ao.lo << "-" << ao.hi;
        out << "\n";
    }
    out << "max_factors = " << cfg.pool_cfg.max_factors_per_term << "\n"
        << "n_terms_min = " << cfg.pool_cfg.n_terms_min << "\n"
        << "n_terms_max = " << cfg.pool_cfg.n_terms_max << "\n"
        << "max_power = " << cfg.pool_cfg.max_power << "\n";
    if (!cfg.parametric.empty()) {
        out << "[parametric]\n";
        for (const auto& pd : cfg.parametric)
            out << pd.function << " = freq:" << num(pd.freq_lo) << "-" << num(pd.freq_hi) << "\n";
    }
    out << "[diff]\nwindow = " << cfg.diff.window << "\ndegree = " << cfg.diff.degree
        << "\nmax_order = " << cfg.diff.max_order << "\n";
    out << "[ea]\npopulation = " << cfg.ea.population_size << "\nepochs = " << cfg.ea.epochs
        << "\ntournament = " << cfg.ea.tournament_size
        << "\np_term_mutation = " << num(cfg.ea.p_term_mutation)
        << "\np_param_mutation = " << num(cfg.ea.p_param_mutation)
        << "\np_factor_swap = " << num(cfg.ea.p_factor_swap)
        << "\nsigma_param = " << num(cfg.ea.sigma_param) << "\neps_fit = " << num(cfg.ea.eps_fit)
        << "\nlasso_tol = " << num(cfg.ea.lasso_tol)
        << "\nlasso_max_iter = " << cfg.ea.lasso_max_iter << "\n";
    out << "[moeadd]\ndivisions = " << cfg.moeadd.divisions
        << "\nneighborhood = " << cfg.moeadd.neighborhood << "\nepochs = " << cfg.moeadd.epochs
        << "\np_mut = " << num(cfg.moeadd.p_mut) << "\np_xover = " << num(cfg.moeadd.p_xover)
        << "\nsigma_mut = " << num(cfg.moeadd.sigma_mut)
        << "\np_local = " << num(cfg.moeadd.p_local)
        << "\nlambda_lo = " << num(cfg.moeadd.lambda_lo)
        << "\nlambda_hi = " << num(cfg.moeadd.lambda_hi)
        << "\npbi_theta = " << num(cfg.moeadd.pbi_theta) << "\n";
    out << "[output]\ndir = " << cfg.out_dir.string() << "\n";
    out << "[run]\nseed = " << cfg.seed << "\n";
    return out.str();
}

} // namespace pdeforge
