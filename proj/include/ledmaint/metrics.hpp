#pragma once

// Static lighting indices and the deficiency-ratio objective.

#include "ledmaint/surrogate.hpp"

#include <span>
#include <string>
#include <vector>

namespace ledmaint {

struct Requirements {
    double s_e = 500.0; // lux
    double s_u = 0.6;

    void validate() const;
};

struct PerformanceTrace {
    std::vector<double> event_times; // days, strictly increasing
    std::vector<double> e_avg;       // lux
    std::vector<double> uniformity;

    std::size_t size() const { return event_times.size(); }
    void validate() const;
};

double average_illuminance(std::span<const double> e);

/// min / mean; 0 when the mean is 0 so a dark plane always violates.
double uniformity(std::span<const double> e);

/// True when either index violates its requirement.
bool deficient(double e_avg, double u, const Requirements& req);

/// Duration charged to the interval (t_{k-1}, t_k] (0-based k >= 1): the
/// whole width when the indices at t_k violate, else 0. The two indicator
/// durations are combined by max, so a doubly deficient interval counts once.
double deficiency_duration(std::size_t k, const PerformanceTrace& trace, const Requirements& req);

/// Sum of interval deficiency durations over T_over.
double deficiency_ratio(const PerformanceTrace& trace, const Requirements& req, double t_over);

struct RunEvaluation {
    double r_dr = 0.0;
    PerformanceTrace trace;
};

/// Maps the K x J state trajectory L to Q = 1 - L, predicts the K x N
/// illuminance matrix and scores it.
RunEvaluation evaluate_run(const Eigen::MatrixXd& states, std::span<const double> event_times,
                           const SurrogateModel& surrogate, const Requirements& req, double t_over);

/// `t_days,e_avg,uniformity,deficient`
std::string trace_csv(const PerformanceTrace& trace, const Requirements& req);

} // namespace ledmaint
