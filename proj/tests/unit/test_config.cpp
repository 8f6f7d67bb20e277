#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sdtf/config.hpp"
#include "sdtf/io.hpp"
#include "sdtf/scenarios.hpp"

using namespace sdtf;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("sdtf_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("defaults and simple keys") {
    const RunConfig config = parse_config("nu=1e-3\n");
    CHECK(config.nu == doctest::Approx(0.001));
    CHECK(config.scenario.empty());
    CHECK_THROWS_WITH_AS(config.validate(), "scenario missing", ConfigError);
}

TEST_CASE("theory cap keyword") {
    const RunConfig config = parse_config("tau_cap=theory\n");
    REQUIRE(config.tau_cap.has_value());
    CHECK(*config.tau_cap == doctest::Approx(1.0315));
    CHECK(!parse_config("tau_cap=none\n").tau_cap.has_value());
}

TEST_CASE("comments, blank lines, and line-numbered diagnostics") {
    const std::string good = "# a comment\n\nnu = 0.5  # trailing comment\nscenario=ode_orders\n";
    const RunConfig config = parse_config(good);
    CHECK(config.nu == doctest::Approx(0.5));
    CHECK(config.scenario == "ode_orders");

    try {
        parse_config("nu=0.5\nbogus_key=1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
    try {
        parse_config("\n\nnu=abc\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("constraint violations are reported") {
    RunConfig config = parse_config("scenario=ode_orders\nnu=-1\n");
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    RunConfig bad_scheme = parse_config("scenario=ode_orders\nscheme=BDF9\n");
    CHECK_THROWS_AS(bad_scheme.validate(), ConfigError);
}

TEST_CASE("overrides win over file values") {
    RunConfig config = parse_config("nu=1\nscenario=ode_orders\n");
    apply_override(config, "nu=0.25");
    CHECK(config.nu == doctest::Approx(0.25));
    CHECK_THROWS_AS(apply_override(config, "nope=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(config, "nonsense"), ConfigError);
}

TEST_CASE("csv export is bit-stable and round-trips") {
    TempDir dir;
    const std::string path = dir.file("table.csv");
    const std::vector<std::string> schema{"a", "b", "label"};
    const std::vector<CsvRow> rows{{0.1, -2.5e-17, std::string("x")},
                                   {1.0 / 3.0, 1e300, std::string("y")}};
    export_csv(path, schema, rows);
    const std::string first = read_file(path);
    export_csv(path, schema, rows);
    CHECK(first == read_file(path));  // byte-identical rewrite
    CHECK(first.find("\r") == std::string::npos);

    std::istringstream in(first);
    std::string line;
    std::getline(in, line);
    CHECK(line == "a,b,label");
    std::getline(in, line);
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(0, comma)) == 0.1);  // exact round trip
    std::getline(in, line);
    CHECK(std::stod(line.substr(0, line.find(','))) == 1.0 / 3.0);

    export_csv(path, schema, {});
    CHECK(read_file(path) == "a,b,label\n");  // header-only file
}

TEST_CASE("vtk export structure") {
    TempDir dir;
    const auto mesh = build_rect_union({0, 1, 1, 2}, {0, 0, 1, 1}, 2, 2, 2);
    const FiniteElementSpace space(mesh, Region::porous, 1, 1);
    const FeFunction f = interpolate(
        space, ScalarField([](double x, double y, double) { return x + y; }), 0.0);
    const std::string path = dir.file("mesh.vtk");
    export_vtk(path, mesh, {vtk_field("head", f)});
    const std::string text = read_file(path);
    CHECK(text.find("# vtk DataFile Version 3.0") == 0);
    CHECK(text.find("POINTS " + std::to_string(mesh.vertices.size()) + " double") !=
          std::string::npos);
    const std::size_t n_cells =
        mesh.triangles.size() + mesh.boundary_edges.size() + mesh.interface_edges.size();
    CHECK(text.find("CELL_TYPES " + std::to_string(n_cells)) != std::string::npos);
    CHECK(text.find("SCALARS region int 1") != std::string::npos);
    CHECK(text.find("SCALARS tag int 1") != std::string::npos);
    CHECK(text.find("SCALARS head double 1") != std::string::npos);
}

TEST_CASE("scenario registry and reproducible runs") {
    const auto names = scenario_names();
    CHECK(names.size() == 5);

    TempDir dir;
    RunConfig config;
    config.scenario = "ode_orders";
    config.outdir = dir.file("run1");
    ScenarioResult first = run_scenario(config);
    CHECK(first.exit_code == 0);
    CHECK(first.metrics.count("order_bdf2") == 1);
    REQUIRE(!first.files.empty());
    const std::string csv1 = read_file(first.files.front());

    config.outdir = dir.file("run2");
    ScenarioResult second = run_scenario(config);
    CHECK(read_file(second.files.front()) == csv1);  // byte-identical CSVs

    for (const auto& file : second.files) CHECK(std::filesystem::exists(file));
    CHECK(second.summary.find("SUMMARY scenario=ode_orders status=ok") == 0);
}

TEST_CASE("adaptive runs emit the per-step log with the documented schema") {
    TempDir dir;
    RunConfig config;
    config.scenario = "convergence_2d";
    config.mode = "adaptive";
    config.nx = 4;
    config.k = 0.05;
    config.k_max = 0.25;
    config.outdir = dir.file("adaptive");
    const ScenarioResult result = run_scenario(config);
    REQUIRE(result.exit_code == 0);
    bool found = false;
    for (const auto& file : result.files) {
        if (file.find("adaptive_steps_") == std::string::npos) continue;
        found = true;
        std::istringstream in(read_file(file));
        std::string header;
        std::getline(in, header);
        CHECK(header == "step_index,t,k,tau,est_u,est_phi,status");
        std::string row;
        std::getline(in, row);
        const bool status_ok = row.find("warmup") != std::string::npos ||
                               row.find("accepted") != std::string::npos ||
                               row.find("rejected") != std::string::npos;
        CHECK(status_ok);
    }
    CHECK(found);
}

TEST_CASE("unknown scenario raises a config error") {
    RunConfig config;
    config.scenario = "not_a_scenario";
    CHECK_THROWS_AS(run_scenario(config), ConfigError);
}
