#include "ledmaint/simulator.hpp"

#include "ledmaint/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ledmaint {

void Policy::validate(double t_over) const {
    if (!(t_pm > 0.0) || !(t_pm <= t_over)) {
        throw DomainError("policy: t_pm must lie in (0, T_over]");
    }
    if (!(h_om >= 0.0 && h_om <= 1.0)) {
        throw DomainError("policy: h_om must lie in [0, 1]");
    }
}

double mow(double t_now, double t_pm_next, double t_pm) {
    if (!(t_pm > 0.0) || t_pm_next < t_now) {
        throw DomainError("mow: need t_pm > 0 and t_pm_next >= t_now");
    }
    return (t_pm_next - t_now) / t_pm;
}

bool om_eligible(double mow_value, double h_om) {
    return mow_value <= h_om;
}

double om_age(const Policy& policy) {
    // t_pm - t_pm h rather than t_pm (1 - h): 1 - h rounds for most h.
    return policy.t_pm - policy.t_pm * policy.h_om;
}

void Durations::validate() const {
    if (!(cm_pf > 0.0) || !(cm_df > 0.0) || !(replace > 0.0)) {
        throw DomainError("durations must be positive");
    }
}

const char* cause_name(Cause cause) {
    switch (cause) {
    case Cause::cm_df: return "cm_df";
    case Cause::cm_pf: return "cm_pf";
    case Cause::pm: return "pm";
    case Cause::om: return "om";
    }
    return "?";
}

bool RunResult::accounting_consistent() const {
    auto sum = [](const std::vector<long>& v) { return std::accumulate(v.begin(), v.end(), 0L); };
    return n_tv == n_cm_vis + n_pm_vis && n_tr == n_cm + n_pm + n_om && n_om == om_by_pm + om_by_cm &&
           sum(yearly_cm) == n_cm && sum(yearly_pm) == n_pm && sum(yearly_om) == n_om;
}

namespace {

struct Unit {
    LuminairePath path;
    std::uint64_t generation = 0;
    double install = 0.0;
    double t_pm_next = kInfinity;
    double t_df = kInfinity;
    double t_pf = kInfinity;
    double t_end = kInfinity;
    bool busy = false;

    double next_event() const { return busy ? t_end : std::min({t_pm_next, t_df, t_pf}); }
};

} // namespace

SimulationTrace simulate(const Policy& policy, std::size_t fleet_size, const PathSource& paths,
                         const SimulationOptions& options) {
    const double t_over = options.t_over;
    if (!(t_over > 0.0) || !std::isfinite(t_over)) {
        throw DomainError("simulate: T_over must be positive and finite");
    }
    // A PM interval beyond the horizon is allowed here (CM-only runs); the
    // optimizer's search space is checked by Policy::validate.
    if (!(policy.t_pm > 0.0) || !std::isfinite(policy.t_pm)) {
        throw DomainError("simulate: t_pm must be positive and finite");
    }
    if (!(policy.h_om >= 0.0 && policy.h_om <= 1.0)) {
        throw DomainError("policy: h_om must lie in [0, 1]");
    }
    options.durations.validate();
    if (!(options.record_interval > 0.0)) {
        throw DomainError("simulate: record_interval must be positive");
    }
    const auto& dur = options.durations;
    if (!(policy.t_pm > std::max({dur.cm_pf, dur.cm_df, dur.replace}))) {
        throw DomainError("simulate: t_pm must exceed every service duration");
    }
    if (fleet_size == 0) {
        throw DomainError("simulate: empty fleet");
    }

    SimulationTrace out;
    RunResult& res = out.result;
    const auto n_years = static_cast<std::size_t>(std::max(1.0, std::ceil(t_over / kDaysPerYear)));
    res.yearly_cm.assign(n_years, 0);
    res.yearly_pm.assign(n_years, 0);
    res.yearly_om.assign(n_years, 0);
    auto year_of = [&](double t) {
        return std::min(n_years - 1, static_cast<std::size_t>(t / kDaysPerYear));
    };
    auto log = [&](double t, const char* type, std::size_t id, const char* action) {
        if (options.keep_event_log) out.log.push_back({t, type, id, action});
    };

    std::vector<Unit> units(fleet_size);
    auto install = [&](std::size_t j, double t) {
        Unit& u = units[j];
        u.path = paths(j, u.generation, t_over - t);
        u.install = t;
        u.t_df = t + u.path.driver_failure_time;
        u.t_pf = t + u.path.pf_first_passage_time;
        u.busy = false;
        u.t_end = kInfinity;
    };
    for (std::size_t j = 0; j < fleet_size; ++j) {
        install(j, 0.0);
        units[j].t_pm_next = policy.t_pm;
    }

    std::vector<double> rows;
    std::size_t record_k = 0;
    double next_record = 0.0;

    for (;;) {
        double t = next_record;
        for (const auto& u : units) t = std::min(t, u.next_event());
        if (std::isnan(t)) {
            throw std::logic_error("simulate: non-finite event time");
        }
        if (!(t <= t_over)) {
            break;
        }

        // Service completions first, so a unit restored at t is new at t.
        for (std::size_t j = 0; j < fleet_size; ++j) {
            Unit& u = units[j];
            if (u.busy && u.t_end == t) {
                ++u.generation;
                install(j, t);
                log(t, "end", j + 1, "restore");
            }
        }

        bool any_cm = false, any_trigger = false;
        double completion = t;
        for (std::size_t j = 0; j < fleet_size; ++j) {
            Unit& u = units[j];
            if (u.busy) continue;
            Cause cause;
            double d;
            if (u.t_df == t) {
                cause = Cause::cm_df;
                d = dur.cm_df;
            } else if (u.t_pf == t) {
                cause = Cause::cm_pf;
                d = dur.cm_pf;
            } else if (u.t_pm_next == t) {
                cause = Cause::pm;
                d = dur.replace;
            } else {
                continue;
            }
            any_trigger = true;
            const std::size_t y = year_of(t);
            if (cause == Cause::pm) {
                ++res.n_pm;
                ++res.yearly_pm[y];
            } else {
                any_cm = true;
                ++res.n_cm;
                ++res.yearly_cm[y];
            }
            u.busy = true;
            u.t_end = t + d;
            u.t_pm_next = t + policy.t_pm;
            u.t_df = u.t_pf = kInfinity;
            completion = std::max(completion, u.t_end);
            log(t, cause_name(cause), j + 1, "replace");
        }

        if (any_trigger) {
            ++(any_cm ? res.n_cm_vis : res.n_pm_vis);
            for (std::size_t j = 0; j < fleet_size; ++j) {
                Unit& u = units[j];
                if (u.busy || !om_eligible(mow(t, u.t_pm_next, policy.t_pm), policy.h_om)) continue;
                ++res.n_om;
                ++res.yearly_om[year_of(t)];
                ++(any_cm ? res.om_by_cm : res.om_by_pm);
                u.busy = true;
                u.t_end = completion;
                u.t_pm_next = t + policy.t_pm;
                u.t_df = u.t_pf = kInfinity;
                log(t, "om", j + 1, "replace");
            }
        }

        if (t == next_record) {
            log(t, "record", 0, "log");
            if (next_record >= t_over) {
                next_record = kInfinity;
            } else {
                ++record_k;
                next_record = std::min(static_cast<double>(record_k) * options.record_interval, t_over);
            }
        }

        out.event_times.push_back(t);
        for (const auto& u : units) {
            rows.push_back(u.busy ? 1.0 : luminaire_state(u.path.value_at(t - u.install), false));
        }
    }

    const auto k = static_cast<long>(out.event_times.size());
    out.states = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        rows.data(), k, static_cast<long>(fleet_size));
    res.n_tv = res.n_cm_vis + res.n_pm_vis;
    res.n_tr = res.n_cm + res.n_pm + res.n_om;
    return out;
}

std::string event_log_csv(const std::vector<EventLogEntry>& log) {
    std::ostringstream out;
    out << "t_days,event_type,luminaire_id,action\n";
    for (const auto& e : log) {
        out << csv::format(e.t_days) << ',' << e.event_type << ',' << e.luminaire_id << ',' << e.action << '\n';
    }
    return out.str();
}

} // namespace ledmaint
