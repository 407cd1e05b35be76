#pragma once

// Run configuration: an INI file with one section per concern. Every key is
// optional and falls back to the full-study defaults below.

#include "ledmaint/optimizer.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ledmaint {

/// Malformed configuration; the message names the offending section.key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Range {
    double start = 0.0, stop = 0.0, step = 1.0;

    /// start, start + step, ... <= stop (with a 1e-9 relative guard), each
    /// value rounded to 10 decimals so 0.05 steps print cleanly.
    std::vector<double> values() const;
    friend bool operator==(const Range&, const Range&) = default;
};

struct Scenario {
    std::string name = "S1";
    WeibullModel driver{21.82, 2818.09};

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// S1 (21.82, 2818.09), S2 (25.61, 3301.09), S3 (17.91, 2342.09).
Scenario named_scenario(const std::string& name);

struct RunConfig {
    // [paths] relative entries resolve against output_dir.
    std::string output_dir = "out";
    std::string layout_file;    // empty: generate the case-study layout
    std::string pairs_file;     // empty: analytic oracle
    std::string adt_file = "adt.csv";
    std::string draws_file = "draws.csv";
    std::string surrogate_file = "surrogate.txt";
    std::string pareto_file = "pareto.csv";

    // [run]
    std::uint64_t seed = 20240607;
    int workers = 0;

    // [requirements]
    double s_e = 500.0;
    double s_u = 0.6;

    // [simulation]
    double t_over_days = 18250.0;
    std::size_t runs = 10000;
    double record_interval_days = 30.0;
    double d_cm_pf_days = 3.0;
    double d_cm_df_days = 2.0;
    double d_replace_days = 1.0;
    double use_temperature_k = 318.15;
    double duty_cycle = 0.5;
    double path_step_days = 10.0;
    std::string seed_mode = "independent"; // or common
    bool keep_traces = false;

    // [policy] used by `simulate`
    double policy_t_pm = 2190.0;
    double policy_h_om = 0.2;

    // [grid]
    Range t_pm{365.0, 18250.0, 365.0};
    Range h_om{0.05, 1.0, 0.05};

    // [scenario]
    Scenario scenario{};

    // [optimizer]
    double alpha = 0.05;
    std::size_t n_path = 20;
    std::size_t n_ps = 10;
    std::string topology = "pairwise"; // or against_best

    // [calibration]
    int chains = 4;
    int warmup = 2000;
    int samples = 2000;
    std::vector<double> test_temps_k{328.15, 358.15, 378.15};
    int units_per_temp = 25;
    double inspection_step_h = 1000.0;
    double total_h = 10000.0;
    Theta true_theta{2.2393, 0.8841, 3.7446, 0.0815};

    // [surrogate]
    std::size_t n_states = 2016;
    double train_fraction = 0.8;
    double target_e_avg = 600.0;
    double ambient_floor = 20.0;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;

    std::filesystem::path resolve(const std::string& file) const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Desk-scale profile: S = 200, T_over = 20 yr, 5 x 5 grid, n_path = 20,
/// n_ps = 10.
void apply_desk_preset(RunConfig& config);

void apply_scenario(RunConfig& config, const std::string& name);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

/// CRC-32 of the canonical serialization, as 8 hex digits.
std::string config_hash(const RunConfig& config);

/// Simulation, requirement and fleet settings (thetas left empty).
ModelBundle bundle_skeleton(const RunConfig& config);
EvaluationOptions evaluation_options(const RunConfig& config);
WelchTopology welch_topology(const RunConfig& config);

} // namespace ledmaint
