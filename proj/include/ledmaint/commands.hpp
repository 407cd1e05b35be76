#pragma once

// Pipeline steps behind the CLI subcommands. Each writes its outputs
// atomically under config.output_dir together with <command>.manifest.json
// (config hash, seed, CRC-32 of every output).

#include "ledmaint/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ledmaint {

struct CommandOutput {
    std::vector<std::filesystem::path> files;
    std::string summary; // human-readable lines for stdout
};

CommandOutput cmd_synth_data(const RunConfig& config);
CommandOutput cmd_calibrate(const RunConfig& config);
CommandOutput cmd_fit_surrogate(const RunConfig& config);
CommandOutput cmd_simulate(const RunConfig& config, const Policy& policy);
CommandOutput cmd_sweep(const RunConfig& config);
CommandOutput cmd_report(const RunConfig& config);

/// Loads the posterior draw file and the surrogate named in the config and
/// assembles the simulation bundle (n_path two-stage draws at the use
/// temperature).
ModelBundle load_bundle(const RunConfig& config);

/// Reads `pareto_csv` output back as (policy, retained) pairs.
std::vector<std::pair<Policy, bool>> read_pareto(const std::filesystem::path& path);

} // namespace ledmaint
