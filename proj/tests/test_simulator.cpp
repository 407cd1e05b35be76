#include "ledmaint/optimizer.hpp"
#include "ledmaint/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ledmaint;

namespace {

LuminairePath healthy(double driver_failure = kInfinity) {
    LuminairePath p;
    p.degradation_values = {0.0};
    p.driver_failure_time = driver_failure;
    return p;
}

PathSource always_healthy() {
    return [](std::size_t, std::uint64_t, double) { return healthy(); };
}

SimulationOptions options(double t_over) {
    SimulationOptions o;
    o.t_over = t_over;
    o.keep_event_log = true;
    return o;
}

FleetModel case_fleet() {
    FleetModel f;
    f.thetas = {Theta{2.2393, 0.8841, 3.7446, 0.0815}};
    return f;
}

SimulationTrace random_run(const Policy& policy, std::uint64_t seed, std::size_t fleet = 12, double t_over = 7300.0) {
    const FleetModel f = case_fleet();
    return simulate(policy, fleet, make_path_source(f, f.thetas[0], seed), options(t_over));
}

} // namespace

TEST(Mow, HandCases) {
    EXPECT_EQ(mow(100.0, 100.0, 2190.0), 0.0);
    EXPECT_NEAR(mow(0.0, 438.0, 2190.0), 0.2, 1e-15);
    EXPECT_EQ(mow(0.0, 2190.0, 2190.0), 1.0);
}

TEST(OmEligible, InclusiveThreshold) {
    EXPECT_TRUE(om_eligible(0.2, 0.2));
    EXPECT_FALSE(om_eligible(0.3, 0.2));
    for (double x : {0.0, 0.5, 1.0}) EXPECT_TRUE(om_eligible(x, 1.0));
}

TEST(OmAge, TableValues) {
    EXPECT_EQ(om_age({2190.0, 0.2}), 1752.0);
    EXPECT_EQ(om_age({11315.0, 0.8}), 2263.0);
    EXPECT_EQ(om_age({5000.0, 1.0}), 0.0);
}

TEST(Policy, Validation) {
    EXPECT_NO_THROW((Policy{2190.0, 0.2}.validate(18250.0)));
    EXPECT_THROW((Policy{0.0, 0.2}.validate(18250.0)), DomainError);
    EXPECT_THROW((Policy{20000.0, 0.2}.validate(18250.0)), DomainError);
    EXPECT_THROW((Policy{2190.0, 1.5}.validate(18250.0)), DomainError);
}

TEST(Simulate, SingleHealthyLuminairePureSchedule) {
    const auto tr = simulate({250.0, 0.0}, 1, always_healthy(), options(1000.0));
    const auto& r = tr.result;
    EXPECT_EQ(r.n_pm, 4); // 250, 500, 750, 1000
    EXPECT_EQ(r.n_pm_vis, 4);
    EXPECT_EQ(r.n_tv, 4);
    EXPECT_EQ(r.n_cm + r.n_om, 0);
    EXPECT_TRUE(r.accounting_consistent());

    const auto tr2 = simulate({300.0, 0.0}, 1, always_healthy(), options(1000.0));
    EXPECT_EQ(tr2.result.n_pm, 3);
    EXPECT_EQ(tr2.result.n_tv, 3);
}

TEST(Simulate, SimultaneousPmIsOneVisit) {
    const auto tr = simulate({300.0, 0.0}, 2, always_healthy(), options(1000.0));
    EXPECT_EQ(tr.result.n_pm_vis, 3);
    EXPECT_EQ(tr.result.n_pm, 6);
    EXPECT_EQ(tr.result.n_tr, 6);
}

TEST(Simulate, RecordGridAndFinalRecord) {
    const auto tr = simulate({5000.0, 0.0}, 1, always_healthy(), options(100.0));
    EXPECT_EQ(tr.event_times, (std::vector<double>{0, 30, 60, 90, 100}));
    EXPECT_EQ(tr.states.rows(), 5);
    EXPECT_EQ(tr.states.cols(), 1);
}

// Driver dies at 95 d: dark from the trigger until the 2-day CM completes,
// then new; the replacement's PM clock restarts at the trigger time.
TEST(Simulate, FailedStateHonesty) {
    const PathSource src = [](std::size_t slot, std::uint64_t gen, double) {
        return healthy(slot == 0 && gen == 0 ? 95.0 : kInfinity);
    };
    const auto tr = simulate({400.0, 0.0}, 2, src, options(600.0));
    const auto& t = tr.event_times;
    auto row = [&](double when) {
        for (std::size_t k = 0; k < t.size(); ++k)
            if (t[k] == when) return static_cast<Eigen::Index>(k);
        ADD_FAILURE() << "no event at " << when;
        return Eigen::Index{0};
    };
    EXPECT_EQ(tr.states(row(90.0), 0), 0.0);
    EXPECT_EQ(tr.states(row(95.0), 0), 1.0);
    EXPECT_EQ(tr.states(row(95.0), 1), 0.0);
    EXPECT_EQ(tr.states(row(97.0), 0), 0.0);
    EXPECT_EQ(tr.result.n_cm, 1);
    EXPECT_EQ(tr.result.n_cm_vis, 1);
    // slot 1 due at 400, slot 0 at 495
    EXPECT_EQ(tr.result.n_pm, 2);
    EXPECT_EQ(tr.result.n_pm_vis, 2);
    EXPECT_EQ(tr.states(row(400.0), 1), 1.0);
    EXPECT_EQ(tr.states(row(401.0), 1), 0.0);
}

TEST(Simulate, OmPiggybacksOnCmVisit) {
    // Slot 0 fails at 350, slot 1 is at MOW (400 - 350) / 400 = 0.125.
    const PathSource src = [](std::size_t slot, std::uint64_t gen, double) {
        return healthy(slot == 0 && gen == 0 ? 350.0 : kInfinity);
    };
    const auto no_om = simulate({400.0, 0.1}, 2, src, options(500.0));
    EXPECT_EQ(no_om.result.n_om, 0);
    const auto om = simulate({400.0, 0.125}, 2, src, options(500.0));
    EXPECT_EQ(om.result.n_om, 1);
    EXPECT_EQ(om.result.om_by_cm, 1);
    EXPECT_EQ(om.result.n_cm_vis, 1);
    EXPECT_EQ(om.result.n_pm_vis, 0); // slot 1's PM moved to 750
    EXPECT_TRUE(om.result.accounting_consistent());
}

TEST(Simulate, AccountingAndMonotoneEvents) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Policy p{1460.0 * (1 + seed % 4), 0.2 * (seed % 6)};
        const auto tr = random_run(p, seed);
        const auto& r = tr.result;
        ASSERT_TRUE(r.accounting_consistent());
        EXPECT_EQ(r.n_tv, r.n_cm_vis + r.n_pm_vis);
        EXPECT_EQ(r.n_tr, r.n_cm + r.n_pm + r.n_om);
        EXPECT_EQ(r.n_om, r.om_by_pm + r.om_by_cm);
        for (std::size_t k = 1; k < tr.event_times.size(); ++k) ASSERT_LT(tr.event_times[k - 1], tr.event_times[k]);
        EXPECT_GE(tr.states.minCoeff(), 0.0);
        EXPECT_LE(tr.states.maxCoeff(), 1.0);
    }
}

TEST(Simulate, Reproducible) {
    const Policy p{2190.0, 0.4};
    const auto a = random_run(p, 77), b = random_run(p, 77);
    EXPECT_EQ(a.event_times, b.event_times);
    EXPECT_TRUE(a.states == b.states);
    EXPECT_EQ(a.result.n_tr, b.result.n_tr);
    EXPECT_EQ(a.result.yearly_cm, b.result.yearly_cm);
    EXPECT_EQ(event_log_csv(a.log), event_log_csv(b.log));
}

TEST(Simulate, EventLogFormat) {
    const auto tr = simulate({300.0, 0.0}, 1, always_healthy(), options(400.0));
    const std::string csv = event_log_csv(tr.log);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t_days,event_type,luminaire_id,action");
    EXPECT_NE(csv.find("300,pm,1,"), std::string::npos);
}

// With common random numbers every unit keeps its life across policies, so
// widening the OM window cannot reduce the preventive plus opportunistic work.
TEST(Simulate, OmDominanceUnderCommonRandomNumbers) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        long prev = -1;
        for (double h : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
            const auto r = random_run({2920.0, h}, 1000 + seed).result;
            const long work = r.n_om + r.n_pm;
            EXPECT_GE(work, prev) << "seed " << seed << " h_om " << h;
            prev = work;
        }
    }
}

TEST(Simulate, RejectsServiceLongerThanPmInterval) {
    EXPECT_THROW(simulate({2.0, 0.0}, 1, always_healthy(), options(100.0)), DomainError);
    EXPECT_THROW(simulate({100.0, 1.5}, 1, always_healthy(), options(100.0)), DomainError);
    EXPECT_THROW(simulate({10.0, 0.0}, 0, always_healthy(), options(100.0)), DomainError);
}
