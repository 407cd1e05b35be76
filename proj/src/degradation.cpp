#include "ledmaint/degradation.hpp"

#include <algorithm>
#include <cmath>

namespace ledmaint {

void GammaDegradationModel::validate() const {
    if (!std::isfinite(ln_a) || !std::isfinite(ln_c)) {
        throw DomainError("degradation model: ln_A and ln_C must be finite");
    }
    if (!(b > 0.0) || !std::isfinite(b)) {
        throw DomainError("degradation model: b must be positive");
    }
    if (!(activation_energy >= 0.0) || !std::isfinite(activation_energy)) {
        throw DomainError("degradation model: activation energy must be non-negative");
    }
}

double GammaDegradationModel::shape_function(double t_years) const {
    return std::exp(ln_a + b * t_years);
}

double GammaDegradationModel::effective_shape(double t_years) const {
    return std::exp(ln_a) * std::expm1(b * t_years);
}

double GammaDegradationModel::shape_increment(double s_years, double t_years) const {
    // A e^{bs} (e^{b(t-s)} - 1)
    return std::exp(ln_a + b * s_years) * std::expm1(b * (t_years - s_years));
}

double rate_at_temperature(const GammaDegradationModel& model, double kelvin) {
    if (!(kelvin > 0.0)) {
        throw DomainError("temperature must be positive kelvin");
    }
    return std::exp(model.ln_c + model.activation_energy / (PhysicalConstants::boltzmann_ev_per_k * kelvin));
}

double acceleration_factor(const GammaDegradationModel& model, double stress_kelvin,
                           double normal_kelvin) {
    return rate_at_temperature(model, stress_kelvin) / rate_at_temperature(model, normal_kelvin);
}

double mean_degradation(const GammaDegradationModel& model, double t_years, double kelvin) {
    if (!(t_years >= 0.0)) {
        throw DomainError("mean_degradation: time must be non-negative");
    }
    return model.effective_shape(t_years) / rate_at_temperature(model, kelvin);
}

void WeibullModel::validate() const {
    if (!(shape > 0.0) || !(scale_days > 0.0)) {
        throw DomainError("Weibull model: shape and scale must be positive");
    }
}

double weibull_cdf(const WeibullModel& model, double t_days) {
    if (t_days <= 0.0) {
        return 0.0;
    }
    return -std::expm1(-std::pow(t_days / model.scale_days, model.shape));
}

double weibull_quantile(const WeibullModel& model, double u) {
    return model.scale_days * std::pow(-std::log1p(-u), 1.0 / model.shape);
}

double weibull_sample(const WeibullModel& model, Engine& eng) {
    return weibull_quantile(model, uniform01(eng));
}

double weibull_mttf(const WeibullModel& model) {
    model.validate();
    return model.scale_days * std::tgamma(1.0 + 1.0 / model.shape);
}

double LuminairePath::value_at(double age_days) const {
    if (degradation_values.empty() || age_days <= 0.0) {
        return 0.0;
    }
    const double k = std::floor(age_days / grid_step);
    const auto idx = static_cast<std::size_t>(std::min(k, static_cast<double>(degradation_values.size() - 1)));
    return degradation_values[idx];
}

LuminairePath sample_path(const GammaDegradationModel& model, double kelvin, double grid_step_days,
                          double horizon_days, Engine& eng, const PathOptions& options) {
    model.validate();
    if (!(grid_step_days > 0.0) || !(horizon_days >= 0.0)) {
        throw DomainError("sample_path: need grid_step > 0 and horizon >= 0");
    }
    const double rate = rate_at_temperature(model, kelvin);
    const auto steps = static_cast<std::size_t>(std::floor(horizon_days / grid_step_days + 1e-9));

    LuminairePath path;
    path.grid_step = grid_step_days;
    path.degradation_values.reserve(std::min<std::size_t>(steps + 1, 4096));
    path.degradation_values.push_back(0.0);

    double x = 0.0;
    double prev_years = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t_years = options.clock.years(static_cast<double>(k) * grid_step_days);
        x += gamma_variate(eng, model.shape_increment(prev_years, t_years), rate);
        prev_years = t_years;
        path.degradation_values.push_back(std::min(x, 1.0));
        if (!std::isfinite(path.pf_first_passage_time) && x > kL70Threshold) {
            path.pf_first_passage_time = static_cast<double>(k) * grid_step_days;
        }
        if (x > options.stop_above) {
            break;
        }
    }
    return path;
}

double first_passage(const LuminairePath& path, double threshold) {
    for (std::size_t k = 0; k < path.degradation_values.size(); ++k) {
        if (path.degradation_values[k] > threshold) {
            return static_cast<double>(k) * path.grid_step;
        }
    }
    return kInfinity;
}

double luminaire_state(double x, bool driver_failed) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("luminaire_state: X must lie in [0, 1]");
    }
    return driver_failed ? 1.0 : x;
}

} // namespace ledmaint
