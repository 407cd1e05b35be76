#include "ledmaint/metrics.hpp"

#include "ledmaint/csv.hpp"
#include "ledmaint/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ledmaint {

void Requirements::validate() const {
    if (!(s_e > 0.0) || !std::isfinite(s_e)) {
        throw DomainError("requirements: S_E must be positive");
    }
    if (!(s_u > 0.0 && s_u <= 1.0)) {
        throw DomainError("requirements: S_U must lie in (0, 1]");
    }
}

void PerformanceTrace::validate() const {
    if (e_avg.size() != event_times.size() || uniformity.size() != event_times.size()) {
        throw DomainError("performance trace: column lengths differ");
    }
    for (std::size_t k = 1; k < event_times.size(); ++k) {
        if (!(event_times[k] > event_times[k - 1])) {
            throw DomainError("performance trace: event times must strictly increase");
        }
    }
    for (double u : uniformity) {
        if (!(u >= 0.0 && u <= 1.0)) {
            throw DomainError("performance trace: uniformity outside [0, 1]");
        }
    }
}

double average_illuminance(std::span<const double> e) {
    if (e.empty()) {
        throw DomainError("average_illuminance: empty vector");
    }
    return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
}

double uniformity(std::span<const double> e) {
    const double mean = average_illuminance(e);
    if (mean <= 0.0) {
        return 0.0;
    }
    // Rounding in the mean can push min/mean a hair above 1 for constant input.
    return std::min(1.0, *std::min_element(e.begin(), e.end()) / mean);
}

bool deficient(double e_avg, double u, const Requirements& req) {
    return e_avg < req.s_e || u < req.s_u;
}

double deficiency_duration(std::size_t k, const PerformanceTrace& trace, const Requirements& req) {
    if (k == 0 || k >= trace.size()) {
        throw DomainError("deficiency_duration: interval index out of range");
    }
    const double dt = trace.event_times[k] - trace.event_times[k - 1];
    const double t_e = trace.e_avg[k] < req.s_e ? dt : 0.0;
    const double t_u = trace.uniformity[k] < req.s_u ? dt : 0.0;
    return std::max(t_e, t_u);
}

double deficiency_ratio(const PerformanceTrace& trace, const Requirements& req, double t_over) {
    if (!(t_over > 0.0)) {
        throw DomainError("deficiency_ratio: T_over must be positive");
    }
    if (trace.size() >= 2 && trace.event_times.back() - trace.event_times.front() > t_over * (1.0 + 1e-12)) {
        throw DomainError("deficiency_ratio: event span exceeds T_over");
    }
    double total = 0.0;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        total += deficiency_duration(k, trace, req);
    }
    return total / t_over;
}

RunEvaluation evaluate_run(const Eigen::MatrixXd& states, std::span<const double> event_times,
                           const SurrogateModel& surrogate, const Requirements& req, double t_over) {
    if (static_cast<std::size_t>(states.rows()) != event_times.size()) {
        throw DomainError("evaluate_run: one state row per event time is required");
    }
    const Eigen::MatrixXd q = (1.0 - states.array()).matrix();
    const Eigen::MatrixXd e = surrogate.predict(q);
    RunEvaluation out;
    auto& tr = out.trace;
    tr.event_times.assign(event_times.begin(), event_times.end());
    tr.e_avg.resize(event_times.size());
    tr.uniformity.resize(event_times.size());
    std::vector<double> row(static_cast<std::size_t>(e.cols()));
    for (long k = 0; k < e.rows(); ++k) {
        for (long i = 0; i < e.cols(); ++i) {
            row[static_cast<std::size_t>(i)] = e(k, i);
        }
        tr.e_avg[k] = average_illuminance(row);
        tr.uniformity[k] = uniformity(row);
    }
    out.r_dr = deficiency_ratio(tr, req, t_over);
    return out;
}

std::string trace_csv(const PerformanceTrace& trace, const Requirements& req) {
    std::ostringstream out;
    out << "t_days,e_avg,uniformity,deficient\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        out << csv::format(trace.event_times[k]) << ',' << csv::format(trace.e_avg[k]) << ','
            << csv::format(trace.uniformity[k]) << ','
            << (deficient(trace.e_avg[k], trace.uniformity[k], req) ? 1 : 0) << '\n';
    }
    return out.str();
}

} // namespace ledmaint
