#pragma once

// Scenario configurations and the deterministic experiment runner behind the CLI.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "toruslab/io.hpp"

namespace toruslab {

inline constexpr const char* kVersion = "0.1.0";

/// Names accepted in the "scenario" field.
const std::vector<std::string>& scenario_names();

/// Default "system" and "params" blocks of a scenario (ConfigError if unknown).
Json scenario_defaults(const std::string& scenario);

struct ScenarioConfig {
    std::string scenario;
    SystemSpec system;
    /// Scenario parameters with every default filled in.
    Json params;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string output;

    /// Fully resolved configuration; feeding it back reproduces the run.
    /// Worker count and output directory are not part of it.
    Json echo() const;
};

/// Validates a raw config document: unknown keys, types and value ranges.
/// Throws ConfigError.
ScenarioConfig parse_config(const Json& raw);

/// Sets a dotted key ("params.t_max", "seed", "system.epsilon") in a raw
/// config. The value is parsed as JSON when possible, else kept as a string.
void apply_override(Json& raw, const std::string& assignment);

/// In-memory artifacts of one run, keyed by file name.
struct Artifacts {
    std::map<std::string, std::string> files;
    /// Human-readable summary for standard output.
    std::string summary;
};

/// Runs the scenario. Numeric failures propagate as the library's errors.
Artifacts execute(const ScenarioConfig& config);

struct RunOutcome {
    /// 0 success, 2 validation error, 3 numeric failure.
    int exit_code = 0;
    std::string message;
    std::vector<std::string> written;
};

/// execute() plus manifest.json, written to `out_dir` only after the whole
/// scenario succeeded.
RunOutcome run(const ScenarioConfig& config, const std::filesystem::path& out_dir);

} // namespace toruslab
