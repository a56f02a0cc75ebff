#pragma once

// Batch experiment runner behind the CLI: strict-schema JSON config in,
// report artifacts out.
//
// Exit-code contract: 0 = ran and every enabled check passed, 2 = ran but
// some check failed its band, 1 = config or runtime error (the caller maps
// exceptions to 1).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roughwalk/regen.hpp"

namespace roughwalk {

struct ExperimentConfig {
    std::string command;
    nlohmann::json raw;  // normalized effective config; embedded in reports

    uint64_t master_seed = 0;
    int workers = 1;
    std::string output = "out";
    bool format_csv = true;
    bool format_json = true;

    // strict parse: unknown keys anywhere are rejected with their path
    static ExperimentConfig from_json(nlohmann::json doc);
};

struct CliOverrides {
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> output;
    std::optional<std::string> formats;  // comma-separated subset of csv,json
};

// Parses the config file, applies overrides, runs the experiment, writes
// artifacts, prints a summary table to `log`. Returns the exit code.
int run_experiment_file(const std::string& config_path, const CliOverrides& overrides,
                        std::ostream& log);

int run_experiment(const ExperimentConfig& config, std::ostream& log);

// exposed for tests: the deterministic report payload a run would produce
std::string run_to_payload(const ExperimentConfig& config);

// same, additionally stripped of worker-count metadata (must be identical
// for any worker count)
std::string run_to_numeric_payload(const ExperimentConfig& config);

// one execution, both payload flavors
struct PayloadPair {
    std::string payload;  // timestamp-free report
    std::string numeric;  // additionally stripped of worker metadata
};
PayloadPair run_to_payloads(const ExperimentConfig& config);

GeneratorConfig parse_generator(const nlohmann::json& j, const std::string& path);

}  // namespace roughwalk
