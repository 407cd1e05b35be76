#include "ledmaint/degradation.hpp"
#include "ledmaint/metrics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

using namespace ledmaint;

namespace {

PerformanceTrace trace_of(std::vector<double> t, std::vector<double> e, std::vector<double> u) {
    PerformanceTrace tr;
    tr.event_times = std::move(t);
    tr.e_avg = std::move(e);
    tr.uniformity = std::move(u);
    return tr;
}

// One luminaire over one grid point: E = 100 + 800 Q.
SurrogateModel one_by_one() {
    SurrogateModel m;
    m.intercept = Eigen::VectorXd::Constant(1, 100.0);
    m.coefficients = Eigen::MatrixXd::Constant(1, 1, 800.0);
    return m;
}

} // namespace

TEST(StaticIndices, AverageAndUniformity) {
    EXPECT_EQ(average_illuminance(std::vector<double>{500, 500}), 500.0);
    EXPECT_EQ(average_illuminance(std::vector<double>{300, 600}), 450.0);
    EXPECT_EQ(average_illuminance(std::vector<double>{600, 300}), 450.0);
    EXPECT_EQ(uniformity(std::vector<double>{420, 420, 420}), 1.0);
    EXPECT_NEAR(uniformity(std::vector<double>{300, 600}), 300.0 / 450.0, 1e-15);
    EXPECT_EQ(uniformity(std::vector<double>{0, 600}), 0.0);
    EXPECT_EQ(uniformity(std::vector<double>{0, 0}), 0.0);
    EXPECT_THROW(average_illuminance(std::vector<double>{}), DomainError);
}

TEST(DeficiencyDuration, MaxNotSum) {
    const Requirements req{500.0, 0.6};
    const auto tr = trace_of({0, 10, 17, 30}, {600, 450, 450, 700}, {0.8, 0.8, 0.4, 0.9});
    EXPECT_EQ(deficiency_duration(1, tr, req), 10.0); // E only
    EXPECT_EQ(deficiency_duration(2, tr, req), 7.0);  // both
    EXPECT_EQ(deficiency_duration(3, tr, req), 0.0);  // compliant
    EXPECT_THROW(deficiency_duration(0, tr, req), DomainError);
}

TEST(DeficiencyRatio, HandCases) {
    const Requirements req{500.0, 0.6};
    EXPECT_EQ(deficiency_ratio(trace_of({0, 500, 1000}, {600, 600, 600}, {1, 1, 1}), req, 1000.0), 0.0);
    EXPECT_EQ(deficiency_ratio(trace_of({0, 400, 1000}, {100, 100, 100}, {1, 1, 1}), req, 1000.0), 1.0);
    // intervals of 5 and 15 days deficient
    const auto tr = trace_of({0, 5, 100, 115, 1000}, {600, 400, 600, 600, 600}, {1, 1, 1, 0.5, 1});
    EXPECT_NEAR(deficiency_ratio(tr, req, 1000.0), 0.02, 1e-15);
    EXPECT_THROW(deficiency_ratio(tr, req, 900.0), DomainError);
}

// Worked by hand: Q = (1, 0.5, 0) at t = 0, 10, 30 gives E = 900, 500, 100,
// uniformity 1 throughout. Interval (0,10] ends at 500 (compliant), (10,30]
// ends at 100 (deficient): R_DR = 20 / 30.
TEST(EvaluateRun, ThreeEventWorkedExample) {
    Eigen::MatrixXd states(3, 1);
    states << 0.0, 0.5, 1.0;
    const std::vector<double> times{0, 10, 30};
    const auto ev = evaluate_run(states, times, one_by_one(), Requirements{500.0, 0.6}, 30.0);
    EXPECT_NEAR(ev.r_dr, 20.0 / 30.0, 1e-15);
    EXPECT_EQ(ev.trace.e_avg, (std::vector<double>{900, 500, 100}));
}

TEST(EvaluateRun, AllNewAndAllFailed) {
    const std::vector<double> times{0, 100, 365};
    const Requirements req{500.0, 0.6};
    EXPECT_EQ(evaluate_run(Eigen::MatrixXd::Zero(3, 1), times, one_by_one(), req, 365.0).r_dr, 0.0);
    EXPECT_EQ(evaluate_run(Eigen::MatrixXd::Ones(3, 1), times, one_by_one(), req, 365.0).r_dr, 1.0);
}

TEST(EvaluateRun, DecomposesIntoIntervalDurations) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SurrogateModel m;
    m.intercept = Eigen::VectorXd::Constant(4, 30.0);
    m.coefficients = Eigen::MatrixXd::Constant(4, 2, 300.0);
    m.coefficients(0, 1) = 50.0;
    const int K = 40;
    Eigen::MatrixXd states(K, 2);
    std::vector<double> times(K);
    for (int k = 0; k < K; ++k) {
        states(k, 0) = u(gen);
        states(k, 1) = u(gen);
        times[k] = k == 0 ? 0.0 : times[k - 1] + 1.0 + 20.0 * u(gen);
    }
    const Requirements req{400.0, 0.6};
    const double t_over = times.back();
    const auto ev = evaluate_run(states, times, m, req, t_over);
    double total = 0.0;
    for (std::size_t k = 1; k < static_cast<std::size_t>(K); ++k) total += deficiency_duration(k, ev.trace, req);
    EXPECT_DOUBLE_EQ(ev.r_dr, total / t_over);
    EXPECT_GE(ev.r_dr, 0.0);
    EXPECT_LE(ev.r_dr, 1.0);

    // A pointwise darker plane never lowers R_DR.
    SurrogateModel darker = m;
    darker.intercept.array() -= 10.0;
    EXPECT_GE(evaluate_run(states, times, darker, req, t_over).r_dr, ev.r_dr);
}

TEST(EvaluateRun, ShapeChecks) {
    const std::vector<double> times{0, 10};
    EXPECT_THROW(evaluate_run(Eigen::MatrixXd::Zero(3, 1), times, one_by_one(), Requirements{}, 10.0), DomainError);
    EXPECT_THROW(evaluate_run(Eigen::MatrixXd::Zero(2, 2), times, one_by_one(), Requirements{}, 10.0), DomainError);
}

TEST(TraceCsv, HeaderAndFlags) {
    const auto tr = trace_of({0, 30}, {600, 450}, {0.8, 0.8});
    const std::string csv = trace_csv(tr, Requirements{});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t_days,e_avg,uniformity,deficient");
    EXPECT_NE(csv.find(",1\n"), std::string::npos);
    EXPECT_NE(csv.find(",0\n"), std::string::npos);
}

TEST(Requirements, Validation) {
    EXPECT_NO_THROW(Requirements{}.validate());
    EXPECT_THROW((Requirements{0.0, 0.6}.validate()), DomainError);
    EXPECT_THROW((Requirements{500.0, 1.2}.validate()), DomainError);
}
