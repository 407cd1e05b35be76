#pragma once

// Component-level stochastic models: Gamma-process package degradation with
// an Arrhenius rate, Weibull driver lifetimes, and the competing-failure
// luminaire state.

#include "ledmaint/rng.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace ledmaint {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct PhysicalConstants {
    static constexpr double boltzmann_ev_per_k = 8.62e-5;
};

inline constexpr double kDaysPerYear = 365.25;

/// Light-output loss beyond which a package counts as failed (L70).
inline constexpr double kL70Threshold = 0.3;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Transformed parameters (ln A, b, ln C, Ea) of the non-homogeneous Gamma
/// process. Shape uses years, rate uses kelvin.
struct GammaDegradationModel {
    double ln_a = 0.0;
    double b = 1.0;
    double ln_c = 0.0;
    double activation_energy = 0.0; // eV

    /// Throws DomainError unless b > 0 and Ea >= 0 (both finite).
    void validate() const;

    /// Raw shape function A exp(b t); only differences of it enter the
    /// process, see effective_shape().
    double shape_function(double t_years) const;

    /// A (exp(b t) - 1): zero at t = 0 and non-decreasing.
    double effective_shape(double t_years) const;

    /// Shape of the increment over [s, t], computed without cancellation.
    double shape_increment(double s_years, double t_years) const;

    friend bool operator==(const GammaDegradationModel&, const GammaDegradationModel&) = default;
};

/// Arrhenius rate beta(T) = exp(ln C + Ea / (k_B T)).
double rate_at_temperature(const GammaDegradationModel& model, double kelvin);

/// beta(T_stress) / beta(T_normal), exactly as the ratio of rates.
double acceleration_factor(const GammaDegradationModel& model, double stress_kelvin,
                           double normal_kelvin);

/// E[X(t)] = effective_shape(t) / beta(T).
double mean_degradation(const GammaDegradationModel& model, double t_years, double kelvin);

/// Maps the calendar clock (days) onto the degradation clock (years).
/// duty_cycle is the fraction of calendar time spent operating.
struct AgingClock {
    double duty_cycle = 1.0;

    double years(double calendar_days) const { return duty_cycle * calendar_days / kDaysPerYear; }
};

struct WeibullModel {
    double shape = 1.0;      // eta
    double scale_days = 1.0; // lambda

    void validate() const;

    friend bool operator==(const WeibullModel&, const WeibullModel&) = default;
};

double weibull_cdf(const WeibullModel& model, double t_days);

/// Inverse CDF at u in (0, 1): lambda (-ln(1 - u))^(1/eta).
double weibull_quantile(const WeibullModel& model, double u);

double weibull_sample(const WeibullModel& model, Engine& eng);

/// lambda * Gamma(1 + 1/eta)
double weibull_mttf(const WeibullModel& model);

/// Presampled trajectory of one luminaire measured from its installation.
struct LuminairePath {
    double grid_step = 10.0;                   // days
    std::vector<double> degradation_values;    // X at k * grid_step, clamped to [0, 1]
    double driver_failure_time = kInfinity;    // days since installation
    double pf_first_passage_time = kInfinity;  // first grid time with X > 0.3

    /// Step-held value at an age (days); the last stored value beyond the end.
    double value_at(double age_days) const;
};

struct PathOptions {
    AgingClock clock{};
    /// Stop sampling after the first grid point above this value; the path
    /// is then only valid up to its first passage.
    double stop_above = kInfinity;
};

/// Samples X on the grid 0, step, 2 step, ... <= horizon with independent
/// Gamma(shape_increment, beta(T)) increments. driver_failure_time is left
/// infinite for the caller to attach.
LuminairePath sample_path(const GammaDegradationModel& model, double kelvin, double grid_step_days,
                          double horizon_days, Engine& eng, const PathOptions& options = {});

/// Smallest grid time with X > threshold, or +inf.
double first_passage(const LuminairePath& path, double threshold);

/// Competing failures: 1 when the driver has failed, otherwise X.
double luminaire_state(double x, bool driver_failed);

} // namespace ledmaint
