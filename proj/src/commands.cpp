#include "ledmaint/commands.hpp"

#include "ledmaint/csv.hpp"
#include "ledmaint/stats.hpp"

#include <boost/crc.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ledmaint {

namespace {

std::string crc_hex(std::string_view s) {
    boost::crc_32_type crc;
    crc.process_bytes(s.data(), s.size());
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc.checksum()));
    return buf;
}

// Collects outputs so the manifest can list their checksums.
class Outputs {
public:
    Outputs(const RunConfig& config, std::string command) : config_(config), command_(std::move(command)) {}

    void write(const std::filesystem::path& path, const std::string& content) {
        csv::write_atomic(path, content);
        out_.files.push_back(path);
        entries_.push_back({{"file", path.filename().string()}, {"crc32", crc_hex(content)}});
    }

    std::ostringstream& summary() { return summary_; }

    CommandOutput finish() {
        nlohmann::json manifest;
        manifest["command"] = command_;
        manifest["config_hash"] = config_hash(config_);
        manifest["seed"] = config_.seed;
        manifest["outputs"] = entries_;
        const auto path = std::filesystem::path(config_.output_dir) / (command_ + ".manifest.json");
        csv::write_atomic(path, manifest.dump(2) + "\n");
        out_.files.push_back(path);
        out_.summary = summary_.str();
        return out_;
    }

private:
    const RunConfig& config_;
    std::string command_;
    CommandOutput out_;
    nlohmann::json entries_ = nlohmann::json::array();
    std::ostringstream summary_;
};

void require_file(const std::filesystem::path& p, const std::string& field) {
    if (!std::filesystem::exists(p)) {
        throw ConfigError(field + ": file " + p.string() + " does not exist");
    }
}

std::string breakdown_header() {
    return "t_pm_days,h_om,t_om_days,n_cm_vis,n_pm_vis,n_cm,n_pm,n_om,om_by_pm,om_by_cm,n_tv,n_tr\n";
}

std::string breakdown_row(const ObjectiveEstimate& e) {
    const auto& b = e.breakdown;
    std::ostringstream out;
    out << csv::format(e.policy.t_pm) << ',' << csv::format(e.policy.h_om) << ',' << csv::format(om_age(e.policy));
    for (double v : {b.n_cm_vis, b.n_pm_vis, b.n_cm, b.n_pm, b.n_om, b.om_by_pm, b.om_by_cm, e.mean[kNtv], e.mean[kNtr]}) {
        out << ',' << csv::format(v);
    }
    out << '\n';
    return out.str();
}

std::string yearly_rows(const ObjectiveEstimate& e) {
    std::ostringstream out;
    const auto& b = e.breakdown;
    for (std::size_t y = 0; y < b.yearly_cm.size(); ++y) {
        out << csv::format(e.policy.t_pm) << ',' << csv::format(e.policy.h_om) << ',' << y + 1 << ','
            << csv::format(b.yearly_cm[y]) << ',' << csv::format(b.yearly_pm[y]) << ',' << csv::format(b.yearly_om[y])
            << '\n';
    }
    return out.str();
}

const char* kYearlyHeader = "t_pm_days,h_om,year,cm,pm,om\n";

} // namespace

CommandOutput cmd_synth_data(const RunConfig& config) {
    config.validate();
    Outputs out(config, "synth-data");
    const AdtDataset data = synth_lm80(config.true_theta, config.test_temps_k, config.units_per_temp,
                                       config.inspection_step_h, config.total_h, config.seed);
    out.write(config.resolve(config.adt_file), adt_csv(data));
    out.summary() << "records: " << data.records.size() << "\n";
    return out.finish();
}

CommandOutput cmd_calibrate(const RunConfig& config) {
    config.validate();
    const auto adt_path = config.resolve(config.adt_file);
    require_file(adt_path, "paths.adt_file");
    const AdtDataset data = read_adt_csv(adt_path);
    McmcOptions mo;
    mo.chains = config.chains;
    mo.warmup = config.warmup;
    mo.samples = config.samples;
    mo.seed = config.seed;
    const PosteriorSamples post = run_mcmc(data, PriorSpec{}, mo);

    std::vector<double> times;
    const double horizon_years = AgingClock{config.duty_cycle}.years(config.t_over_days);
    for (int i = 0; i <= 50; ++i) times.push_back(horizon_years * i / 50.0);
    const PredictiveBand band = posterior_predictive(post, config.use_temperature_k, times, config.seed, 1000);

    Outputs out(config, "calibrate");
    out.write(config.resolve(config.draws_file), draws_csv(post));
    out.write(config.resolve("diagnostics.csv"), diagnostics_csv(post));
    out.write(config.resolve("predictive.csv"), predictive_csv(band));
    for (const auto& s : summarize(post)) {
        out.summary() << s.name << ": mean " << s.mean << ", 95% CrI [" << s.lower << ", " << s.upper << "], R-hat "
                      << s.rhat << (s.rhat < 1.01 ? "" : "  (not converged)") << "\n";
    }
    return out.finish();
}

CommandOutput cmd_fit_surrogate(const RunConfig& config) {
    config.validate();
    Outputs out(config, "fit-surrogate");
    Layout layout;
    if (config.layout_file.empty()) {
        CaseStudyOptions opt;
        opt.target_e_avg = config.target_e_avg;
        opt.ambient_floor = config.ambient_floor;
        layout = case_study_layout(opt);
        out.write(config.resolve("layout.txt"), layout_text(layout));
    } else {
        const auto p = config.resolve(config.layout_file);
        require_file(p, "paths.layout_file");
        layout = read_layout(p);
    }

    TrainingPairs pairs;
    if (config.pairs_file.empty()) {
        pairs.states = sobol_states(config.n_states, layout.J(), config.seed);
        pairs.illum = analytic_oracle_batch(layout, pairs.states);
    } else {
        const auto p = config.resolve(config.pairs_file);
        require_file(p, "paths.pairs_file");
        pairs = read_pairs(p);
        if (static_cast<std::size_t>(pairs.states.cols()) != layout.J() ||
            static_cast<std::size_t>(pairs.illum.cols()) != layout.N()) {
            throw ConfigError("paths.pairs_file: column counts do not match the layout's J and N");
        }
    }
    const long n = pairs.states.rows();
    const long n_train = static_cast<long>(std::floor(config.train_fraction * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n) {
        throw ConfigError("surrogate.train_fraction: leaves an empty training or holdout set");
    }
    const SurrogateModel model = fit_surrogate(pairs.states.topRows(n_train), pairs.illum.topRows(n_train));
    const auto hs = pairs.states.bottomRows(n - n_train);
    const auto hi = pairs.illum.bottomRows(n - n_train);
    const double r2 = holdout_r2(model, hs, hi);
    const double mre = max_relative_error(model, hs, hi);

    out.write(config.resolve(config.surrogate_file), surrogate_text(model));
    std::ostringstream report;
    report << "J,N,n_train,n_holdout,holdout_r2,max_relative_error\n"
           << layout.J() << ',' << layout.N() << ',' << n_train << ',' << n - n_train << ',' << csv::format(r2) << ','
           << csv::format(mre) << '\n';
    out.write(config.resolve("surrogate_report.csv"), report.str());
    out.summary() << "J = " << layout.J() << ", N = " << layout.N() << ", holdout R^2 = " << r2
                  << ", max relative error = " << mre << "\n";
    return out.finish();
}

ModelBundle load_bundle(const RunConfig& config) {
    config.validate();
    const auto draws = config.resolve(config.draws_file);
    const auto surr = config.resolve(config.surrogate_file);
    require_file(draws, "paths.draws_file");
    require_file(surr, "paths.surrogate_file");
    ModelBundle b = bundle_skeleton(config);
    b.surrogate = read_surrogate(surr);
    const PosteriorSamples post = read_draws_csv(draws);
    if (post.draw_count() < config.n_path) {
        throw ConfigError("optimizer.n_path: exceeds the " + std::to_string(post.draw_count()) +
                          " retained posterior draws");
    }
    const auto specs = two_stage_draws(post, config.n_path, config.n_ps, config.use_temperature_k, config.seed);
    for (std::size_t l = 0; l < config.n_path; ++l) {
        b.fleet.thetas.push_back(specs[l * config.n_ps].theta);
    }
    return b;
}

CommandOutput cmd_simulate(const RunConfig& config, const Policy& policy) {
    const ModelBundle bundle = load_bundle(config);
    policy.validate(config.t_over_days);
    const EvaluationOptions eo = evaluation_options(config);
    const ObjectiveEstimate est = evaluate_policy(policy, bundle, eo);

    Outputs out(config, "simulate");
    std::ostringstream summary;
    summary << "s,r_dr_mean,r_dr_std,n_tv_mean,n_tv_std,n_tr_mean,n_tr_std\n" << est.s;
    for (std::size_t o = 0; o < 3; ++o) summary << ',' << csv::format(est.mean[o]) << ',' << csv::format(est.stddev[o]);
    summary << '\n';
    out.write(config.resolve("simulate_summary.csv"), summary.str());
    out.write(config.resolve("simulate_breakdown.csv"), breakdown_header() + breakdown_row(est));
    out.write(config.resolve("simulate_yearly.csv"), kYearlyHeader + yearly_rows(est));
    std::ostringstream runs;
    runs << "run,r_dr,n_tv,n_tr\n";
    for (std::size_t s = 0; s < est.s; ++s) {
        runs << s << ',' << csv::format(est.samples[kRdr][s]) << ',' << est.samples[kNtv][s] << ','
             << est.samples[kNtr][s] << '\n';
    }
    out.write(config.resolve("simulate_runs.csv"), runs.str());

    if (config.keep_traces) {
        // Replays run 0 with logging switched on; the seed makes it identical.
        const std::uint64_t seed = run_seed(eo, policy, 0);
        SimulationOptions so = bundle.simulation;
        so.keep_event_log = true;
        const PathSource src = make_path_source(bundle.fleet, bundle.fleet.thetas[0], seed);
        const SimulationTrace tr = simulate(policy, bundle.surrogate.J(), src, so);
        const RunEvaluation ev = evaluate_run(tr.states, tr.event_times, bundle.surrogate, bundle.requirements,
                                              so.t_over);
        out.write(config.resolve("trace_run0.csv"), trace_csv(ev.trace, bundle.requirements));
        out.write(config.resolve("events_run0.csv"), event_log_csv(tr.log));
    }
    out.summary() << "policy T_PM = " << policy.t_pm << " d, H_OM = " << policy.h_om << " (T_OM = " << om_age(policy)
                  << " d), S = " << est.s << "\n"
                  << "R_SDR = " << est.mean[kRdr] << ", N_STV = " << est.mean[kNtv] << ", N_STR = " << est.mean[kNtr]
                  << "\n";
    return out.finish();
}

CommandOutput cmd_sweep(const RunConfig& config) {
    const ModelBundle bundle = load_bundle(config);
    const auto grid = policy_grid(config.t_pm.values(), config.h_om.values());
    const auto est = sweep(grid, bundle, evaluation_options(config));
    const auto front = pareto_front(est);
    const auto kept = welch_filter(est, front, config.alpha, welch_topology(config));

    Outputs out(config, "sweep");
    out.write(config.resolve("objectives.csv"), objectives_csv(est));
    out.write(config.resolve(config.pareto_file), pareto_csv(est, front, kept));
    out.summary() << grid.size() << " policies, " << front.size() << " on the Pareto front, " << kept.size()
                  << " retained after Welch filtering\n";
    return out.finish();
}

std::vector<std::pair<Policy, bool>> read_pareto(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() || csv::split(lines[0]).size() != 10) {
        throw FormatError(path.string() + ":1: not a Pareto table");
    }
    std::vector<std::pair<Policy, bool>> rows;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        if (csv::trim(lines[n]).empty()) continue;
        const auto f = csv::split(lines[n]);
        const std::string where = path.string() + ":" + std::to_string(n + 1);
        if (f.size() != 10) throw FormatError(where + ": expected 10 fields");
        rows.push_back({{csv::to_double(f[0], where + " t_pm_days"), csv::to_double(f[1], where + " h_om")},
                        csv::to_int(f[9], where + " retained_after_welch") != 0});
    }
    return rows;
}

CommandOutput cmd_report(const RunConfig& config) {
    const auto pareto = config.resolve(config.pareto_file);
    require_file(pareto, "paths.pareto_file");
    const auto rows = read_pareto(pareto);
    const ModelBundle bundle = load_bundle(config);
    const EvaluationOptions eo = evaluation_options(config);

    std::string breakdown = breakdown_header();
    std::string yearly = kYearlyHeader;
    std::size_t reported = 0;
    for (const auto& [policy, retained] : rows) {
        if (!retained) continue;
        // Same seeds as the sweep, so these are the sweep's own runs.
        const ObjectiveEstimate est = evaluate_policy(policy, bundle, eo);
        breakdown += breakdown_row(est);
        yearly += yearly_rows(est);
        ++reported;
    }
    Outputs out(config, "report");
    out.write(config.resolve("report_breakdown.csv"), breakdown);
    out.write(config.resolve("report_yearly.csv"), yearly);
    out.summary() << reported << " retained policies reported\n";
    return out.finish();
}

} // namespace ledmaint
