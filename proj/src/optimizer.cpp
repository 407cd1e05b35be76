#include "ledmaint/optimizer.hpp"

#include "ledmaint/csv.hpp"
#include "ledmaint/rng.hpp"
#include "ledmaint/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ledmaint {

void FleetModel::validate() const {
    if (thetas.empty()) {
        throw DomainError("fleet model: no posterior draws");
    }
    if (n_ps == 0) {
        throw DomainError("fleet model: n_ps must be positive");
    }
    for (const auto& t : thetas) t.validate();
    driver.validate();
    if (!(kelvin > 0.0) || !(grid_step > 0.0) || !(clock.duty_cycle > 0.0 && clock.duty_cycle <= 1.0)) {
        throw DomainError("fleet model: need kelvin > 0, grid_step > 0, duty_cycle in (0, 1]");
    }
}

PathSource make_path_source(const FleetModel& fleet, const Theta& theta, std::uint64_t run_seed) {
    return [&fleet, theta, run_seed](std::size_t slot, std::uint64_t generation, double horizon) {
        LuminairePath path;
        path.grid_step = fleet.grid_step;
        if (fleet.degradation_enabled) {
            Engine eng = make_stream({run_seed, slot, generation, 0x70617468ULL});
            PathOptions opt;
            opt.clock = fleet.clock;
            opt.stop_above = kL70Threshold;
            path = sample_path(theta, fleet.kelvin, fleet.grid_step, std::max(horizon, 0.0), eng, opt);
        } else {
            path.degradation_values.assign(1, 0.0);
        }
        if (fleet.drivers_enabled) {
            Engine eng = make_stream({run_seed, slot, generation, 0x64727672ULL});
            path.driver_failure_time = weibull_sample(fleet.driver, eng);
        }
        return path;
    };
}

std::uint64_t policy_key(const Policy& policy) {
    return mix_seed({std::bit_cast<std::uint64_t>(policy.t_pm), std::bit_cast<std::uint64_t>(policy.h_om)});
}

std::uint64_t run_seed(const EvaluationOptions& options, const Policy& policy, std::size_t run) {
    if (options.seed_mode == SeedMode::common) {
        return mix_seed({options.master_seed, 0x63726eULL, run});
    }
    return mix_seed({options.master_seed, policy_key(policy), run});
}

RunResult run_once(const Policy& policy, const ModelBundle& bundle, std::size_t run_index,
                   std::uint64_t seed) {
    const auto& fleet = bundle.fleet;
    const std::size_t l = (run_index / fleet.n_ps) % fleet.thetas.size();
    const PathSource source = make_path_source(fleet, fleet.thetas[l], seed);
    SimulationTrace trace = simulate(policy, bundle.surrogate.J(), source, bundle.simulation);
    const RunEvaluation eval = evaluate_run(trace.states, trace.event_times, bundle.surrogate,
                                            bundle.requirements, bundle.simulation.t_over);
    trace.result.r_dr = eval.r_dr;
    return trace.result;
}

namespace {

ObjectiveEstimate reduce(const Policy& policy, const std::vector<RunResult>& runs) {
    ObjectiveEstimate e;
    e.policy = policy;
    e.s = runs.size();
    for (auto& v : e.samples) v.reserve(runs.size());
    auto& b = e.breakdown;
    const std::size_t years = runs.empty() ? 0 : runs.front().yearly_cm.size();
    b.yearly_cm.assign(years, 0.0);
    b.yearly_pm.assign(years, 0.0);
    b.yearly_om.assign(years, 0.0);
    for (const auto& r : runs) {
        e.samples[kRdr].push_back(r.r_dr);
        e.samples[kNtv].push_back(static_cast<double>(r.n_tv));
        e.samples[kNtr].push_back(static_cast<double>(r.n_tr));
        b.n_cm_vis += r.n_cm_vis;
        b.n_pm_vis += r.n_pm_vis;
        b.n_cm += r.n_cm;
        b.n_pm += r.n_pm;
        b.n_om += r.n_om;
        b.om_by_pm += r.om_by_pm;
        b.om_by_cm += r.om_by_cm;
        for (std::size_t y = 0; y < years; ++y) {
            b.yearly_cm[y] += r.yearly_cm[y];
            b.yearly_pm[y] += r.yearly_pm[y];
            b.yearly_om[y] += r.yearly_om[y];
        }
    }
    const double n = static_cast<double>(runs.size());
    for (double* v : {&b.n_cm_vis, &b.n_pm_vis, &b.n_cm, &b.n_pm, &b.n_om, &b.om_by_pm, &b.om_by_cm}) *v /= n;
    for (auto* vec : {&b.yearly_cm, &b.yearly_pm, &b.yearly_om}) {
        for (double& v : *vec) v /= n;
    }
    for (std::size_t o = 0; o < 3; ++o) {
        e.mean[o] = stats::mean(e.samples[o]);
        e.stddev[o] = stats::sample_std(e.samples[o]);
    }
    return e;
}

} // namespace

ObjectiveEstimate evaluate_policy(const Policy& policy, const ModelBundle& bundle,
                                  const EvaluationOptions& options) {
    if (options.runs == 0) {
        throw DomainError("evaluate_policy: need at least one run");
    }
    bundle.fleet.validate();
    bundle.requirements.validate();
    policy.validate(bundle.simulation.t_over);
    const auto n = static_cast<long>(options.runs);
    std::vector<RunResult> runs(options.runs);
    if (options.execution == Execution::parallel) {
        // Exceptions must not escape an OpenMP region; keep the first one.
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (long s = 0; s < n; ++s) {
            try {
                runs[s] = run_once(policy, bundle, static_cast<std::size_t>(s), run_seed(options, policy, s));
            } catch (...) {
#pragma omp critical(ledmaint_eval_failure)
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (long s = 0; s < n; ++s) {
            runs[s] = run_once(policy, bundle, static_cast<std::size_t>(s), run_seed(options, policy, s));
        }
    }
    return reduce(policy, runs);
}

std::vector<ObjectiveEstimate> sweep(const std::vector<Policy>& grid, const ModelBundle& bundle,
                                     const EvaluationOptions& options) {
    if (grid.empty()) {
        throw DomainError("sweep: empty policy grid");
    }
    std::vector<ObjectiveEstimate> out;
    out.reserve(grid.size());
    for (const auto& p : grid) {
        out.push_back(evaluate_policy(p, bundle, options));
    }
    return out;
}

std::vector<Policy> policy_grid(const std::vector<double>& t_pm, const std::vector<double>& h_om) {
    std::vector<Policy> grid;
    for (double t : t_pm) {
        for (double h : h_om) grid.push_back({t, h});
    }
    return grid;
}

std::vector<std::size_t> pareto_front(const std::vector<std::array<double, 3>>& points) {
    if (points.empty()) {
        throw DomainError("pareto_front: no candidates");
    }
    // Lexicographic order puts every dominator ahead of what it dominates,
    // and dominance is transitive, so checking against the retained set
    // suffices.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    auto dominates = [&](std::size_t a, std::size_t b) {
        const auto& p = points[a];
        const auto& q = points[b];
        return p[0] <= q[0] && p[1] <= q[1] && p[2] <= q[2] && (p[0] < q[0] || p[1] < q[1] || p[2] < q[2]);
    };
    std::vector<std::size_t> front;
    for (std::size_t idx : order) {
        const bool dominated =
            std::any_of(front.begin(), front.end(), [&](std::size_t f) { return dominates(f, idx); });
        if (!dominated) front.push_back(idx);
    }
    std::sort(front.begin(), front.end());
    return front;
}

std::vector<std::size_t> pareto_front(const std::vector<ObjectiveEstimate>& estimates) {
    std::vector<std::array<double, 3>> pts;
    pts.reserve(estimates.size());
    for (const auto& e : estimates) pts.push_back(e.mean);
    return pareto_front(pts);
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw DomainError("welch_t: need at least two samples per group");
    }
    const double ma = stats::mean(a), mb = stats::mean(b);
    const double va = stats::sample_variance(a) / static_cast<double>(a.size());
    const double vb = stats::sample_variance(b) / static_cast<double>(b.size());
    WelchResult r;
    if (va + vb == 0.0) {
        r.dof = static_cast<double>(a.size() + b.size() - 2);
        if (ma == mb) {
            r.t = 0.0;
            r.p = 0.5;
        } else {
            r.t = ma > mb ? kInfinity : -kInfinity;
            r.p = ma > mb ? 0.0 : 1.0;
        }
        return r;
    }
    r.t = (ma - mb) / std::sqrt(va + vb);
    r.dof = (va + vb) * (va + vb) /
            (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    r.p = stats::student_t_sf(r.t, r.dof);
    return r;
}

std::vector<std::size_t> welch_filter(const std::vector<ObjectiveEstimate>& estimates,
                                      const std::vector<std::size_t>& front, double alpha,
                                      WelchTopology topology) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("welch_filter: alpha must lie in (0, 1)");
    }
    for (std::size_t f : front) {
        if (f >= estimates.size()) throw DomainError("welch_filter: front index out of range");
    }
    // a is "not better" than b when no objective shows mean_a < mean_b at level alpha.
    auto not_better = [&](std::size_t a, std::size_t b) {
        for (std::size_t o = 0; o < 3; ++o) {
            if (welch_t(estimates[b].samples[o], estimates[a].samples[o]).p < alpha) return false;
        }
        return true;
    };

    if (front.empty()) return {};
    std::vector<std::size_t> compare = front;
    if (topology == WelchTopology::against_best) {
        compare.clear();
        for (std::size_t o = 0; o < 3; ++o) {
            std::size_t best = front.front();
            for (std::size_t f : front) {
                if (estimates[f].mean[o] < estimates[best].mean[o]) best = f;
            }
            if (std::find(compare.begin(), compare.end(), best) == compare.end()) compare.push_back(best);
        }
    }

    std::vector<std::size_t> kept;
    for (std::size_t pos_a = 0; pos_a < front.size(); ++pos_a) {
        const std::size_t a = front[pos_a];
        bool removed = false;
        for (std::size_t b : compare) {
            if (b == a || !not_better(a, b)) continue;
            const auto pos_b = static_cast<std::size_t>(std::find(front.begin(), front.end(), b) - front.begin());
            if (not_better(b, a) && pos_a < pos_b) continue; // mutual: the earlier one stays
            removed = true;
            break;
        }
        if (!removed) kept.push_back(a);
    }
    return kept;
}

std::string pareto_csv(const std::vector<ObjectiveEstimate>& estimates, const std::vector<std::size_t>& front,
                       const std::vector<std::size_t>& retained) {
    std::ostringstream out;
    out << "t_pm_days,h_om,t_om_days,r_dr_mean,r_dr_std,n_tv_mean,n_tv_std,n_tr_mean,n_tr_std,retained_after_welch\n";
    for (std::size_t f : front) {
        const auto& e = estimates.at(f);
        const bool kept = std::find(retained.begin(), retained.end(), f) != retained.end();
        out << csv::format(e.policy.t_pm) << ',' << csv::format(e.policy.h_om) << ',' << csv::format(om_age(e.policy));
        for (std::size_t o = 0; o < 3; ++o) out << ',' << csv::format(e.mean[o]) << ',' << csv::format(e.stddev[o]);
        out << ',' << (kept ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string objectives_csv(const std::vector<ObjectiveEstimate>& estimates) {
    std::ostringstream out;
    out << "t_pm_days,h_om,t_om_days,s,r_dr_mean,r_dr_std,n_tv_mean,n_tv_std,n_tr_mean,n_tr_std,"
           "n_cm_vis,n_pm_vis,n_cm,n_pm,n_om,om_by_pm,om_by_cm\n";
    for (const auto& e : estimates) {
        const auto& b = e.breakdown;
        out << csv::format(e.policy.t_pm) << ',' << csv::format(e.policy.h_om) << ',' << csv::format(om_age(e.policy))
            << ',' << e.s;
        for (std::size_t o = 0; o < 3; ++o) out << ',' << csv::format(e.mean[o]) << ',' << csv::format(e.stddev[o]);
        for (double v : {b.n_cm_vis, b.n_pm_vis, b.n_cm, b.n_pm, b.n_om, b.om_by_pm, b.om_by_cm}) {
            out << ',' << csv::format(v);
        }
        out << '\n';
    }
    return out.str();
}

} // namespace ledmaint
