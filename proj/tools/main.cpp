// Batch front-end: runs one scenario from a JSON config and writes CSVs.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pathghz/config.hpp"
#include "pathghz/scenarios.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Path-encoded GHZ source simulator"};

    std::string config_path;
    std::string scenario_name;
    std::string out_dir = "out";
    std::uint64_t seed = 12345;

    app.add_option("--config", config_path, "JSON run configuration (see docs/schema.md)")
        ->required();
    app.add_option("--scenario", scenario_name,
                   "one of: bell, ghz, rate, schmidt, oracle-check, sweep")
        ->required();
    app.add_option("--out", out_dir, "output directory for CSV files");
    app.add_option("--seed", seed, "seed for randomized checks");

    CLI11_PARSE(app, argc, argv);

    try {
        pathghz::RunConfig cfg = pathghz::load_config(config_path);
        pathghz::Scenario scenario = pathghz::parse_scenario(scenario_name);
        return pathghz::run_scenario(cfg, scenario, out_dir, seed);
    } catch (const pathghz::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const pathghz::numeric_check_error& e) {
        std::cerr << "numerical check failed: " << e.what() << "\n";
        return 2;
    }
}
