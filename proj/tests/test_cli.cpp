#include "pdeforge/cli.hpp"
#include "pdeforge/errors.hpp"
#include "pdeforge/grid.hpp"
#include "pdeforge/run_config.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdeforge;
namespace fs = std::filesystem;

namespace {

int cli(std::initializer_list<const char*> args) {
    std::vector<const char*> argv{"pdeforge"};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pdeforge_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out);
    out << text;
}

// small heat fixture config; single-token terms over {u, u_t, u_x, u_xx, u_xxx}
std::string heat_config(const std::string& dataset, int ea_pop, int ea_epochs) {
    std::ostringstream cfg;
    cfg << "[data]\ndataset = " << dataset << "\n"
        << "[pool]\nu = t:0-1 x:0-3\nmax_factors = 1\nmax_power = 1\n"
        << "[diff]\nwindow = 9\ndegree = 5\nmax_order = 3\n"
        << "[ea]\npopulation = " << ea_pop << "\nepochs = " << ea_epochs << "\n"
        << "[moeadd]\ndivisions = 8\nepochs = 2\n"
        << "[run]\nseed = 3\n";
    return cfg.str();
}

} // namespace

TEST_CASE("synth writes a loadable heat file with the truth header") {
    TempDir tmp;
    const std::string out = tmp.file("heat.grid");
    CHECK(cli({"synth", "heat1d", "--alpha", "1.0", "--out", out.c_str()}) == 0);
    const Dataset ds = load_dataset(out);
    CHECK(ds.fields.size() == 1);
    CHECK(slurp(out).find("# truth: d1u/dt1 = 1.000000 * d2u/dx2") != std::string::npos);
}

TEST_CASE("synth taylor_green produces a three-variable file") {
    TempDir tmp;
    const std::string out = tmp.file("tg.grid");
    CHECK(cli({"synth", "taylor_green", "--nu", "0.1", "--shape", "6", "12", "12", "--out",
               out.c_str()}) == 0);
    const Dataset ds = load_dataset(out);
    CHECK(ds.variable_names() == std::vector<std::string>{"u", "v", "p"});
}

TEST_CASE("synth rejects unknown kinds with exit code 2") {
    TempDir tmp;
    CHECK(cli({"synth", "kdv", "--out", tmp.file("x.grid").c_str()}) == 2);
}

TEST_CASE("diff emits token signatures as variables") {
    TempDir tmp;
    const std::string data = tmp.file("heat.grid");
    const std::string out = tmp.file("tokens.grid");
    REQUIRE(cli({"synth", "heat1d", "--out", data.c_str()}) == 0);
    CHECK(cli({"diff", "--data", data.c_str(), "--out", out.c_str(), "--max-order", "2"}) == 0);
    const Dataset tokens = load_dataset(out);
    const auto names = tokens.variable_names();
    CHECK(names[0] == "u");
    CHECK(std::find(names.begin(), names.end(), "d2u/dx2") != names.end());
    CHECK(names.size() == 5); // u + 2 axes * 2 orders
}

TEST_CASE("discover finds the heat equation and honors determinism") {
    TempDir tmp;
    const std::string data = tmp.file("heat.grid");
    REQUIRE(cli({"synth", "heat1d", "--amp2", "0.1", "--out", data.c_str()}) == 0);
    const std::string cfg_path = tmp.file("run.cfg");
    write_file(cfg_path, heat_config(data, 24, 15));

    const std::string rep1 = tmp.file("report1.txt");
    const std::string rep2 = tmp.file("report2.txt");
    CHECK(cli({"discover", "--config", cfg_path.c_str(), "--lambdas", "1e-4", "--seed", "11",
               "--deterministic", "--out", rep1.c_str()}) == 0);
    CHECK(cli({"discover", "--config", cfg_path.c_str(), "--lambdas", "1e-4", "--seed", "11",
               "--deterministic", "--out", rep2.c_str()}) == 0);
    const std::string report = slurp(rep1);
    CHECK(report.find("d1u/dt1") != std::string::npos);
    CHECK(report.find("d2u/dx2") != std::string::npos);
    CHECK(report == slurp(rep2)); // byte-identical reruns
}

TEST_CASE("discover rejects a lambda count mismatch with exit 2") {
    TempDir tmp;
    const std::string data = tmp.file("heat.grid");
    REQUIRE(cli({"synth", "heat1d", "--out", data.c_str()}) == 0);
    const std::string cfg_path = tmp.file("run.cfg");
    write_file(cfg_path, heat_config(data, 8, 2));
    CHECK(cli({"discover", "--config", cfg_path.c_str(), "--lambdas", "1e-4,1e-4", "--out",
               tmp.file("r.txt").c_str()}) == 2);
}

TEST_CASE("discover can dump residual fields") {
    TempDir tmp;
    const std::string data = tmp.file("heat.grid");
    REQUIRE(cli({"synth", "heat1d", "--amp2", "0.1", "--out", data.c_str()}) == 0);
    const std::string cfg_path = tmp.file("run.cfg");
    write_file(cfg_path, heat_config(data, 8, 2));
    const std::string dump = tmp.file("residuals.grid");
    CHECK(cli({"discover", "--config", cfg_path.c_str(), "--lambdas", "1e-4", "--out",
               tmp.file("r.txt").c_str(), "--dump-residuals", dump.c_str()}) == 0);
    const Dataset res = load_dataset(dump);
    CHECK(res.fields.size() == 1);
    CHECK(res.grid.shape == std::vector<std::size_t>{64, 64});
}

TEST_CASE("pareto writes sorted deterministic frontier exports") {
    TempDir tmp;
    const std::string data = tmp.file("heat.grid");
    REQUIRE(cli({"synth", "heat1d", "--amp2", "0.1", "--shape", "24", "24", "--out",
                 data.c_str()}) == 0);
    std::ostringstream cfg;
    cfg << "[data]\ndataset = " << data << "\n"
        << "[pool]\nu = t:0-1 x:0-2\nmax_factors = 1\nmax_power = 1\n"
        << "[diff]\nwindow = 9\ndegree = 5\nmax_order = 2\n"
        << "[ea]\npopulation = 8\nepochs = 3\n"
        << "[moeadd]\ndivisions = 8\nepochs = 2\nneighborhood = 3\n"
        << "[run]\nseed = 5\n";
    const std::string cfg_path = tmp.file("run.cfg");
    write_file(cfg_path, cfg.str());

    const std::string out1 = tmp.file("out1");
    CHECK(cli({"pareto", "--config", cfg_path.c_str(), "--deterministic", "--out",
               out1.c_str()}) == 0);
    const std::string csv_first = slurp(out1 + "/frontier.csv");
    const std::string json_first = slurp(out1 + "/frontier.json");
    CHECK(cli({"pareto", "--config", cfg_path.c_str(), "--deterministic", "--out",
               out1.c_str()}) == 0);

    const std::string csv = slurp(out1 + "/frontier.csv");
    CHECK(csv.rfind("total_complexity,total_error\n", 0) == 0);
    // rows sorted by complexity ascending
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    int prev = -1;
    while (std::getline(lines, line)) {
        const int c = std::stoi(line.substr(0, line.find(',')));
        CHECK(c >= prev);
        prev = c;
    }
    CHECK(csv == csv_first);
    CHECK(slurp(out1 + "/frontier.json") == json_first);
}

TEST_CASE("missing subcommand or bad flags exit with code 2") {
    CHECK(cli({}) == 2);
    CHECK(cli({"discover"}) == 2);              // missing required options
    CHECK(cli({"pareto", "--config"}) == 2);    // dangling flag
    TempDir tmp;
    const std::string cfg_path = tmp.file("bad.cfg");
    write_file(cfg_path, "[data]\n"); // missing dataset key
    CHECK(cli({"pareto", "--config", cfg_path.c_str()}) == 2);
}

TEST_CASE("config parser round-trips through render_config") {
    TempDir tmp;
    const std::string text = heat_config("some.grid", 12, 7);
    const RunConfig cfg = parse_run_config(text);
    CHECK(cfg.ea.population_size == 12);
    CHECK(cfg.ea.epochs == 7);
    CHECK(cfg.pool_decls.size() == 1);
    CHECK(cfg.pool_decls[0].axes.size() == 2);
    CHECK(cfg.pool_decls[0].axes[1].hi == 3);
    const RunConfig again = parse_run_config(render_config(cfg));
    CHECK(render_config(again) == render_config(cfg));
}

TEST_CASE("pool variables must exist in the dataset") {
    TempDir tmp;
    const std::string data = tmp.file("heat.grid");
    REQUIRE(cli({"synth", "heat1d", "--out", data.c_str()}) == 0);
    const std::string cfg_path = tmp.file("run.cfg");
    write_file(cfg_path, "[data]\ndataset = " + data + "\n[pool]\nz = t:0-1\n");
    CHECK(cli({"discover", "--config", cfg_path.c_str(), "--lambdas", "1e-4", "--out",
               tmp.file("r.txt").c_str()}) == 2);
}

TEST_CASE("config parser rejects unknown keys") {
    CHECK_THROWS_AS(parse_run_config("[data]\ndataset = x\n[ea]\npopsize = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[data]\ndataset = x\n[nope]\nk = v\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[data]\ndataset = x\n[diff]\nwindow = seven\n"),
                    ConfigError);
}
