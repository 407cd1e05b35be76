// ledmaint: command-line driver for the calibration, surrogate and
// maintenance-optimization pipeline.

#include "ledmaint/commands.hpp"
#include "ledmaint/csv.hpp"
#include "ledmaint/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

} // namespace

int main(int argc, char** argv) {
    using namespace ledmaint;
    CLI::App app{"LED lighting maintenance: degradation calibration and policy optimization"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    bool desk = false;
    std::string scenario;
    std::string output_dir;
    app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed (overrides run.seed)");
    app.add_option("--workers", workers, "OpenMP worker threads (0 = runtime default)");
    app.add_flag("--desk", desk, "desk-scale profile: S=200, 20 yr, 5x5 grid");
    app.add_option("--scenario", scenario, "driver-lifetime scenario")->check(CLI::IsMember({"S1", "S2", "S3"}));
    app.add_option("--output-dir", output_dir, "overrides paths.output_dir");

    auto* synth = app.add_subcommand("synth-data", "generate a synthetic LM-80 dataset");
    auto* calib = app.add_subcommand("calibrate", "fit the Gamma-process model by MCMC");
    auto* surr = app.add_subcommand("fit-surrogate", "fit the affine illuminance surrogate");
    auto* sim = app.add_subcommand("simulate", "evaluate one (T_PM, H_OM) policy");
    auto* swp = app.add_subcommand("sweep", "evaluate the policy grid and extract the Pareto front");
    auto* rep = app.add_subcommand("report", "replacement breakdown for the retained policies");
    std::optional<double> t_pm, h_om;
    sim->add_option("--t-pm", t_pm, "PM interval in days (overrides policy.t_pm)");
    sim->add_option("--h-om", h_om, "OM threshold in [0, 1] (overrides policy.h_om)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (desk) apply_desk_preset(config);
        if (!scenario.empty()) apply_scenario(config, scenario);
        if (seed) config.seed = *seed;
        if (workers > 0) config.workers = workers;
        if (!output_dir.empty()) config.output_dir = output_dir;
        config.validate();
        set_worker_count(config.workers);

        CommandOutput result;
        if (*synth) {
            result = cmd_synth_data(config);
        } else if (*calib) {
            result = cmd_calibrate(config);
        } else if (*surr) {
            result = cmd_fit_surrogate(config);
        } else if (*sim) {
            const Policy policy{t_pm.value_or(config.policy_t_pm), h_om.value_or(config.policy_h_om)};
            result = cmd_simulate(config, policy);
        } else if (*swp) {
            result = cmd_sweep(config);
        } else if (*rep) {
            result = cmd_report(config);
        }
        std::cout << result.summary;
        for (const auto& f : result.files) std::cout << "wrote " << f.string() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
