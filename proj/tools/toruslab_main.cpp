#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toruslab/scenario.hpp"

namespace {

int validation_failure(const std::string& msg)
{
    std::cerr << "toruslab: invalid configuration: " << msg << '\n';
    return 2;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace toruslab;

    CLI::App app{"toruslab: experiments on Hamiltonian flows of T^2 x R^2"};
    std::string command;
    std::string scenario, config_path, out_dir;
    std::vector<std::string> sets;
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;

    app.add_option("command", command, "Optional 'run'");
    app.add_option("--scenario", scenario, "Scenario name")
        ->check(CLI::IsMember(scenario_names()));
    app.add_option("--config", config_path, "JSON scenario config")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (default: $TORUSLAB_OUT, else ./toruslab-out)");
    app.add_option("--set", sets, "Override key=value, e.g. params.t_max=200")->take_all();
    app.add_option("--workers", workers, "Worker threads (0: all cores)");
    app.add_option("--seed", seed, "64-bit seed");
    app.add_option("--epsilon", epsilon, "Perturbation size of a near-integrable system");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (!command.empty() && command != "run")
        return validation_failure("unknown command '" + command + "' (only 'run' is accepted)");

    ScenarioConfig cfg;
    try {
        Json raw = Json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            raw = Json::parse(in, nullptr, false);
            if (raw.is_discarded())
                return validation_failure("cannot parse " + config_path + " as JSON");
            if (!raw.is_object())
                return validation_failure("config root must be an object");
        }
        if (!scenario.empty())
            raw["scenario"] = scenario;
        if (seed)
            raw["seed"] = *seed;
        if (workers)
            raw["workers"] = *workers;
        if (epsilon) {
            if (!raw.contains("scenario") || !raw["scenario"].is_string())
                return validation_failure("--epsilon needs a scenario");
            if (!raw.contains("system"))
                raw["system"] = scenario_defaults(raw["scenario"].get<std::string>()).at("system");
            raw["system"]["epsilon"] = *epsilon;
        }
        for (const auto& s : sets)
            apply_override(raw, s);
        cfg = parse_config(raw);
    } catch (const ConfigError& e) {
        return validation_failure(e.what());
    } catch (const Error& e) {
        return validation_failure(e.what());
    }

    std::string dir = out_dir;
    if (dir.empty())
        dir = cfg.output;
    if (dir.empty()) {
        const char* env = std::getenv("TORUSLAB_OUT");
        dir = env && *env ? env : "toruslab-out";
    }

    const RunOutcome outcome = run(cfg, dir);
    if (outcome.exit_code == 0) {
        std::cout << outcome.message;
        std::cout << "wrote " << outcome.written.size() << " files to " << dir << '\n';
    } else if (outcome.exit_code == 2) {
        std::cerr << "toruslab: invalid configuration: " << outcome.message << '\n';
    } else {
        std::cerr << "toruslab: numeric failure: " << outcome.message << '\n';
    }
    return outcome.exit_code;
}
