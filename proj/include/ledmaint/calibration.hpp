#pragma once

// Bayesian calibration of the Gamma-process degradation model from
// multi-temperature accelerated degradation tests (LM-80 style data).

#include "ledmaint/degradation.hpp"
#include "ledmaint/parallel.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ledmaint {

using Theta = GammaDegradationModel;

inline constexpr double kHoursPerYear = kDaysPerYear * 24.0;

/// Increments below this value are floored before the Gamma density.
inline constexpr double kZeroIncrementFloor = 1e-9;

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AdtRecord {
    long long unit_id = 0;
    double temp_k = 0.0;
    double t_prev = 0.0; // years
    double t_curr = 0.0; // years
    double x_prev = 0.0;
    double x_curr = 0.0;
};

struct AdtDataset {
    std::vector<AdtRecord> records;

    /// Checks record ordering and per-unit chaining; throws DataError.
    void validate() const;

    std::vector<double> temperatures() const;
    AdtDataset filter_temperature(double kelvin, bool keep) const;
};

struct PriorSpec {
    double ln_a_sd = 10.0;
    double ln_c_sd = 10.0;
    double b_scale = 1000.0;  // half-Normal scale (variance 1e6)
    double ea_scale = 1000.0;

    void validate() const;

    /// Log prior density on the natural scale; -inf outside b > 0, Ea >= 0.
    double log_density(const Theta& theta) const;
};

/// Sum over records of the Gamma log-pdf of each increment with shape
/// alpha(t_k) - alpha(t_{k-1}) and rate beta(T_k).
double log_likelihood(const Theta& theta, const AdtDataset& data);

double log_posterior(const Theta& theta, const AdtDataset& data, const PriorSpec& prior);

/// Likelihood collapsed onto sufficient statistics: records sharing
/// (t_prev, t_curr, T) contribute through their count, sum of increments and
/// sum of log increments. Equal to log_likelihood up to summation order.
class GroupedLikelihood {
public:
    explicit GroupedLikelihood(const AdtDataset& data);

    double operator()(const Theta& theta) const;

    std::size_t group_count() const { return groups_.size(); }

private:
    struct Group {
        double t_prev, t_curr, temp_k;
        double count = 0.0, sum_dx = 0.0, sum_log_dx = 0.0;
    };
    std::vector<Group> groups_;
};

/// Metropolis acceptance probability min(1, exp(log_proposed - log_current)).
double acceptance_probability(double log_current, double log_proposed);

struct McmcOptions {
    int chains = 4;
    int warmup = 2000;
    int samples = 2000;
    std::uint64_t seed = 1;
    double target_acceptance = 0.3;
    /// Metropolis transitions per retained iteration (internal thinning).
    int steps_per_iteration = 4;
    /// Disables adaptation and proposes phi + scale * N(0, I) on the
    /// unconstrained scale.
    std::optional<double> fixed_proposal_scale;
    std::optional<Theta> init;
    Execution execution = Execution::parallel;
};

struct PosteriorSamples {
    std::vector<std::vector<Theta>> chains; // post-warmup draws
    int warmup_count = 0;
    std::array<double, 4> rhat{1.0, 1.0, 1.0, 1.0};
    std::vector<double> acceptance_rate; // per chain, post-warmup

    std::size_t draw_count() const;
    std::vector<Theta> pooled() const;
};

/// Adaptive random-walk Metropolis on (ln A, ln b, ln C, ln Ea) with the
/// log-Jacobian of the two log transforms. Warmup runs coordinate-wise
/// scale adaptation, then estimates a proposal covariance and tunes its
/// global scale; everything is frozen for the sampling phase. Chains use
/// independent streams and may run concurrently.
PosteriorSamples run_mcmc(const AdtDataset& data, const PriorSpec& prior, const McmcOptions& options);

/// Crude moment-based estimate used to initialise chains.
Theta moment_estimate(const AdtDataset& data);

/// Split-R-hat over chains of one scalar. Chains whose pooled halves have
/// zero within-chain variance give 1 when all halves share one mean.
double split_rhat(const std::vector<std::vector<double>>& chains);
std::array<double, 4> split_rhat(const PosteriorSamples& samples);

/// Pulls one coordinate (0 ln A, 1 b, 2 ln C, 3 Ea) out of every chain.
std::vector<std::vector<double>> parameter_chains(const PosteriorSamples& samples, int index);

struct ParamSummary {
    std::string name;
    double mean = 0.0, lower = 0.0, upper = 0.0, rhat = 1.0;
};
std::array<ParamSummary, 4> summarize(const PosteriorSamples& samples);

struct PredictiveBand {
    std::vector<double> times; // years on the degradation clock
    std::vector<double> mean, lower, upper;
};

/// One simulated Gamma path per retained draw (or per `max_draws` evenly
/// thinned draws), summarised pointwise by mean and 2.5 / 97.5 percentiles.
PredictiveBand posterior_predictive(const PosteriorSamples& samples, double kelvin,
                                    std::span<const double> times_years, std::uint64_t seed,
                                    std::size_t max_draws = 0,
                                    Execution execution = Execution::parallel);

struct PathSpec {
    Theta theta;
    double kelvin = 0.0;
    std::uint64_t stream_seed = 0;
    std::size_t draw_index = 0; // l in [0, n_path)
    std::size_t path_index = 0; // m in [0, n_ps)
};

/// n_path distinct posterior draws, each paired with n_ps independent path
/// streams; returned row-major (draw outer, path inner).
std::vector<PathSpec> two_stage_draws(const PosteriorSamples& samples, std::size_t n_path,
                                      std::size_t n_ps, double kelvin, std::uint64_t seed);

/// Synthetic LM-80 style dataset: every unit is inspected each
/// `inspection_step_hours` up to `total_hours`; times are stored in years.
AdtDataset synth_lm80(const Theta& true_theta, std::span<const double> temps_kelvin,
                      int units_per_temp, double inspection_step_hours, double total_hours,
                      std::uint64_t seed);

struct HoldoutValidation {
    PosteriorSamples posterior;
    PredictiveBand band;
    std::size_t observations = 0;
    std::size_t covered = 0;

    double coverage() const {
        return observations == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(observations);
    }
};

/// Fits on every temperature except `held_out_kelvin` and scores the held
/// out observations against the 95% posterior-predictive band.
HoldoutValidation leave_one_temperature_out(const AdtDataset& data, double held_out_kelvin,
                                            const PriorSpec& prior, const McmcOptions& options,
                                            std::size_t max_predictive_draws = 0);

// File formats.
AdtDataset read_adt_csv(const std::filesystem::path& path);
std::string adt_csv(const AdtDataset& data);
std::string draws_csv(const PosteriorSamples& samples);
PosteriorSamples read_draws_csv(const std::filesystem::path& path);
std::string diagnostics_csv(const PosteriorSamples& samples);
std::string predictive_csv(const PredictiveBand& band);

} // namespace ledmaint
