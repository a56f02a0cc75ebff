// Batch experiment runner. All experiment semantics live in the config file
// (see README); the flags here only override reproducibility and output
// plumbing. Exit codes: 0 pass, 2 check failure, 1 config/runtime error.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "roughwalk/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"rough-path lifts of regenerative processes: batch experiment runner"};

    std::string config_path;
    app.add_option("--config", config_path, "experiment config JSON")->required();

    roughwalk::CliOverrides overrides;
    uint64_t seed = 0;
    std::string output;
    std::string formats;
    int workers = 0;
    auto* seed_opt = app.add_option("--seed", seed, "override master seed");
    auto* workers_opt = app.add_option("--workers", workers, "override worker count");
    auto* output_opt = app.add_option("--output", output, "override output directory");
    auto* formats_opt = app.add_option("--format", formats, "comma-separated subset of csv,json");

    CLI11_PARSE(app, argc, argv);

    if (*seed_opt) overrides.seed = seed;
    if (*workers_opt) overrides.workers = workers;
    if (*output_opt) overrides.output = output;
    if (*formats_opt) overrides.formats = formats;

    try {
        return roughwalk::run_experiment_file(config_path, overrides, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
