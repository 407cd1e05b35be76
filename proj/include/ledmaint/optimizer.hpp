#pragma once

// Monte Carlo policy evaluation over a (T_PM, H_OM) grid, Pareto filtering
// and Welch-test pruning.

#include "ledmaint/calibration.hpp"
#include "ledmaint/metrics.hpp"
#include "ledmaint/parallel.hpp"
#include "ledmaint/simulator.hpp"
#include "ledmaint/surrogate.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ledmaint {

/// Stochastic description of every luminaire in the fleet. D13 packages
/// share the B7 posterior.
struct FleetModel {
    std::vector<Theta> thetas;  // n_path posterior draws
    std::size_t n_ps = 10;      // path streams per draw
    WeibullModel driver{21.82, 2818.09};
    double kelvin = 318.15;
    AgingClock clock{0.5};
    double grid_step = 10.0; // days
    bool degradation_enabled = true;
    bool drivers_enabled = true;

    void validate() const;
};

/// Path source for one run: unit (slot, generation) gets its own streams
/// derived from `run_seed`, so a replay with the same seed reproduces every
/// unit's life regardless of when it is installed.
PathSource make_path_source(const FleetModel& fleet, const Theta& theta, std::uint64_t run_seed);

struct ModelBundle {
    FleetModel fleet;
    SurrogateModel surrogate;
    Requirements requirements;
    SimulationOptions simulation;
};

enum class SeedMode { independent, common };

struct EvaluationOptions {
    std::size_t runs = 200;
    std::uint64_t master_seed = 1;
    SeedMode seed_mode = SeedMode::independent;
    Execution execution = Execution::parallel;
};

/// Objective order used by every array below.
enum Objective : std::size_t { kRdr = 0, kNtv = 1, kNtr = 2 };
inline constexpr std::array<const char*, 3> kObjectiveNames{"r_dr", "n_tv", "n_tr"};

struct BreakdownMeans {
    double n_cm_vis = 0, n_pm_vis = 0, n_cm = 0, n_pm = 0, n_om = 0, om_by_pm = 0, om_by_cm = 0;
    std::vector<double> yearly_cm, yearly_pm, yearly_om;
};

struct ObjectiveEstimate {
    Policy policy;
    std::size_t s = 0;
    std::array<double, 3> mean{};
    std::array<double, 3> stddev{}; // sample std (n - 1); 0 when s < 2
    std::array<std::vector<double>, 3> samples;
    BreakdownMeans breakdown;
};

/// Key mixed into run seeds so distinct policies draw distinct streams.
std::uint64_t policy_key(const Policy& policy);

/// Seed of run `run` under `policy`: (master, policy key, run), or
/// (master, run) in common-random-number mode.
std::uint64_t run_seed(const EvaluationOptions& options, const Policy& policy, std::size_t run);

/// One full realization: simulate and score.
RunResult run_once(const Policy& policy, const ModelBundle& bundle, std::size_t run_index,
                   std::uint64_t seed);

/// S runs; run s uses posterior draw (s / n_ps) mod n_path. Runs execute
/// concurrently under Execution::parallel and are reduced in index order.
ObjectiveEstimate evaluate_policy(const Policy& policy, const ModelBundle& bundle,
                                  const EvaluationOptions& options);

std::vector<ObjectiveEstimate> sweep(const std::vector<Policy>& grid, const ModelBundle& bundle,
                                     const EvaluationOptions& options);

/// Cartesian product, T_PM outer.
std::vector<Policy> policy_grid(const std::vector<double>& t_pm, const std::vector<double>& h_om);

/// Indices of the non-dominated points (minimisation), ascending.
std::vector<std::size_t> pareto_front(const std::vector<std::array<double, 3>>& points);
std::vector<std::size_t> pareto_front(const std::vector<ObjectiveEstimate>& estimates);

struct WelchResult {
    double t = 0.0;
    double dof = 0.0;
    double p = 0.5; // P(T >= t): evidence for mean_a > mean_b
};

/// Welch two-sample statistic t = (mean_a - mean_b) / se with
/// Welch-Satterthwaite dof and the upper-tail p-value. When both groups are
/// constant the test is degenerate: p = 0.5 for equal means, else 0 or 1.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

enum class WelchTopology { pairwise, against_best };

/// Removes front member a when some comparison member b leaves a without a
/// significant one-sided advantage (p >= alpha for "mean_a < mean_b") on all
/// three objectives. If a and b would remove each other, the one listed
/// first survives. pairwise compares against every other front member;
/// against_best only against the per-objective best members.
std::vector<std::size_t> welch_filter(const std::vector<ObjectiveEstimate>& estimates,
                                      const std::vector<std::size_t>& front, double alpha,
                                      WelchTopology topology = WelchTopology::pairwise);

/// `t_pm_days,h_om,t_om_days,r_dr_mean,...,retained_after_welch`
std::string pareto_csv(const std::vector<ObjectiveEstimate>& estimates, const std::vector<std::size_t>& front,
                       const std::vector<std::size_t>& retained);

/// Every estimate with its means, stds and breakdown.
std::string objectives_csv(const std::vector<ObjectiveEstimate>& estimates);

} // namespace ledmaint
