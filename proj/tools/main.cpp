#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdtf/config.hpp"
#include "sdtf/scenarios.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sdtf::ConfigError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

sdtf::RunConfig load_config(const std::string& config_path,
                            const std::vector<std::string>& overrides,
                            const std::string& scenario) {
    sdtf::RunConfig config;
    if (!config_path.empty()) config = sdtf::parse_config(read_file(config_path));
    for (const auto& assignment : overrides) sdtf::apply_override(config, assignment);
    if (!scenario.empty()) config.scenario = scenario;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled Stokes-Darcy solver with variable-step BDF2/BDF3 time filters"};
    app.require_subcommand(1);
    app.footer(sdtf::config_documentation());

    std::string scenario;
    std::string config_path;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "Run a scenario");
    run->add_option("scenario", scenario, "Scenario name")->required();
    run->add_option("--config", config_path, "Flat key=value config file");
    run->add_option("--set", overrides, "Override a config key (key=value), repeatable");

    auto* list = app.add_subcommand("list-scenarios", "List available scenarios");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate-config", "Parse and validate a config file");
    validate->add_option("config", validate_path, "Config file path")->required();
    validate->add_option("--set", overrides, "Override a config key (key=value), repeatable");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& name : sdtf::scenario_names()) std::cout << name << "\n";
            return 0;
        }
        if (validate->parsed()) {
            load_config(validate_path, overrides, "").validate();
            std::cout << "config ok\n";
            return 0;
        }
        sdtf::RunConfig config = load_config(config_path, overrides, scenario);
        const sdtf::ScenarioResult result = sdtf::run_scenario(config);
        for (const auto& file : result.files) std::cout << "wrote " << file << "\n";
        std::cout << result.summary << "\n";
        return result.exit_code;
    } catch (const sdtf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
