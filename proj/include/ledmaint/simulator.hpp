#pragma once

// Discrete-event maintenance simulation of a luminaire fleet under a
// (T_PM, H_OM) preventive/opportunistic policy.

#include "ledmaint/degradation.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ledmaint {

struct Policy {
    double t_pm = 365.0; // days
    double h_om = 0.0;

    /// Requires 0 < t_pm <= t_over and h_om in [0, 1].
    void validate(double t_over) const;

    friend bool operator==(const Policy&, const Policy&) = default;
};

/// Remaining time to the next PM as a fraction of the PM interval.
double mow(double t_now, double t_pm_next, double t_pm);

/// Inclusive threshold test mow <= h_om.
bool om_eligible(double mow_value, double h_om);

/// Age at which a luminaire becomes OM-eligible: t_pm (1 - h_om).
double om_age(const Policy& policy);

struct Durations {
    double cm_pf = 3.0;   // days dark after a degradation (L70) failure
    double cm_df = 2.0;   // days dark after a driver failure
    double replace = 1.0; // days dark for a PM or OM replacement

    void validate() const;
};

struct SimulationOptions {
    Durations durations{};
    double record_interval = 30.0; // days
    double t_over = 18250.0;       // days
    bool keep_event_log = false;
};

/// Supplies the presampled trajectory of the unit installed in `slot` for
/// its `generation`-th install (0 = initial fleet). The path must cover
/// ages up to `horizon_days` or stop at its first passage.
using PathSource = std::function<LuminairePath(std::size_t slot, std::uint64_t generation, double horizon_days)>;

enum class Cause { cm_df, cm_pf, pm, om };

const char* cause_name(Cause cause);

struct EventLogEntry {
    double t_days = 0.0;
    std::string event_type; // pm, cm_df, cm_pf, om, end, record
    std::size_t luminaire_id = 0; // 1-based; 0 for fleet-wide records
    std::string action;
};

struct RunResult {
    double r_dr = 0.0;
    long n_tv = 0, n_tr = 0;
    long n_cm_vis = 0, n_pm_vis = 0;
    long n_cm = 0, n_pm = 0, n_om = 0;
    long om_by_pm = 0, om_by_cm = 0;
    // Replacements per calendar year of the trigger, split by kind.
    std::vector<long> yearly_cm, yearly_pm, yearly_om;

    /// Checks n_tv, n_tr and n_om decompositions and the histogram totals.
    bool accounting_consistent() const;
};

struct SimulationTrace {
    std::vector<double> event_times; // coalesced, strictly increasing
    Eigen::MatrixXd states;          // K x J luminaire states L in [0, 1]
    RunResult result;                // r_dr left at 0 for the evaluator
    std::vector<EventLogEntry> log;
};

/// Runs one realization. Every timestamp with maintenance activity is one
/// site visit: a CM visit when any driver or degradation failure triggers,
/// otherwise a PM visit. Triggers are handled in luminaire order, then the
/// OM sweep replaces every idle luminaire whose MOW is within h_om. Record
/// events every record_interval from t = 0 plus a final one at T_over.
SimulationTrace simulate(const Policy& policy, std::size_t fleet_size, const PathSource& paths,
                         const SimulationOptions& options);

/// `t_days,event_type,luminaire_id,action`
std::string event_log_csv(const std::vector<EventLogEntry>& log);

} // namespace ledmaint
