#include "ledmaint/csv.hpp"
#include "ledmaint/degradation.hpp"
#include "ledmaint/surrogate.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

using namespace ledmaint;

namespace {

Layout small_layout() {
    Layout l;
    l.h_wp = 0.8;
    l.ambient_floor = 15.0;
    l.luminaires = {{1, "B7", 1.0, 1.0, 3.0, 900.0}, {2, "B7", 3.0, 1.0, 3.0, 900.0}, {3, "D13", 2.0, 2.5, 3.2, 1200.0}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) l.grid.push_back({0.5 + i, 0.5 + j});
    return l;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ledmaint_test_surrogate";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

} // namespace

TEST(Sobol, UnscrambledLeadingPoints) {
    const Eigen::MatrixXd s = sobol_states(4, 2, 0, false);
    const double expected[4][2] = {{0.0, 0.0}, {0.5, 0.5}, {0.75, 0.25}, {0.25, 0.75}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_EQ(s(i, j), expected[i][j]);
}

TEST(Sobol, RangeAndHalfStratification) {
    for (bool scramble : {false, true}) {
        const Eigen::MatrixXd s = sobol_states(1024, 76, 99, scramble);
        EXPECT_GE(s.minCoeff(), 0.0);
        EXPECT_LT(s.maxCoeff(), 1.0);
        for (int j = 0; j < s.cols(); ++j) {
            const auto lower = (s.col(j).array() < 0.5).count();
            EXPECT_NEAR(static_cast<double>(lower), 512.0, 1.0) << "dimension " << j;
        }
    }
}

TEST(Sobol, ScrambleDependsOnSeed) {
    EXPECT_TRUE(sobol_states(64, 5, 1) == sobol_states(64, 5, 1));
    EXPECT_FALSE(sobol_states(64, 5, 1) == sobol_states(64, 5, 2));
}

TEST(Sobol, DimensionLimit) {
    EXPECT_GE(sobol_max_dimension(), 128u);
    EXPECT_THROW(sobol_states(8, sobol_max_dimension() + 1, 0), DomainError);
    EXPECT_THROW(sobol_states(0, 2, 0), DomainError);
}

TEST(AnalyticOracle, AmbientAtZeroAndPointBelowSource) {
    Layout l;
    l.h_wp = 0.8;
    l.ambient_floor = 20.0;
    l.luminaires = {{1, "B7", 2.0, 3.0, 3.3, 1000.0}};
    l.grid = {{2.0, 3.0}, {4.0, 3.0}};
    const Eigen::VectorXd dark = analytic_oracle(l, Eigen::VectorXd::Zero(1));
    EXPECT_EQ(dark(0), 20.0);
    EXPECT_EQ(dark(1), 20.0);
    const Eigen::VectorXd lit = analytic_oracle(l, Eigen::VectorXd::Ones(1));
    EXPECT_NEAR(lit(0), 20.0 + 1000.0 / (2.5 * 2.5), 1e-12);
    const double d = std::hypot(2.0, 2.5);
    EXPECT_NEAR(lit(1), 20.0 + 1000.0 * 2.5 / (d * d * d), 1e-12);
}

TEST(AnalyticOracle, Superposition) {
    const Layout l = small_layout();
    const Eigen::VectorXd q1 = (Eigen::VectorXd(3) << 0.2, 0.5, 0.1).finished();
    const Eigen::VectorXd q2 = (Eigen::VectorXd(3) << 0.3, 0.4, 0.8).finished();
    const Eigen::VectorXd e0 = analytic_oracle(l, Eigen::VectorXd::Zero(3));
    const Eigen::VectorXd lhs = analytic_oracle(l, q1 + q2) - e0;
    const Eigen::VectorXd rhs = (analytic_oracle(l, q1) - e0) + (analytic_oracle(l, q2) - e0);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(AnalyticOracle, BatchParallelEqualsSerial) {
    const Layout l = case_study_layout();
    const Eigen::MatrixXd states = sobol_states(64, l.J(), 3);
    const Eigen::MatrixXd a = analytic_oracle_batch(l, states, Execution::serial);
    const Eigen::MatrixXd b = analytic_oracle_batch(l, states, Execution::parallel);
    EXPECT_TRUE(a == b);
    EXPECT_LT((a.row(5).transpose() - analytic_oracle(l, states.row(5).transpose())).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CaseStudyLayout, GeometryAndNewSystemCompliance) {
    const Layout l = case_study_layout();
    EXPECT_EQ(l.J(), 76u);
    EXPECT_EQ(std::count_if(l.luminaires.begin(), l.luminaires.end(), [](const Luminaire& x) { return x.type_tag == "B7"; }), 46);
    EXPECT_EQ(l.N(), 290u);
    for (const auto& lum : l.luminaires) EXPECT_GT(lum.z, l.h_wp);
    const Eigen::VectorXd e = analytic_oracle(l, Eigen::VectorXd::Ones(l.J()));
    EXPECT_NEAR(e.mean(), 600.0, 1e-6);
    EXPECT_GE(e.minCoeff() / e.mean(), 0.7);
}

TEST(Fit, RecoversKnownAffineMap) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int J = 6, N = 4, n = 50;
    Eigen::VectorXd b(N);
    Eigen::MatrixXd c(N, J);
    for (int i = 0; i < N; ++i) {
        b(i) = 10.0 + 5.0 * u(gen);
        for (int j = 0; j < J; ++j) c(i, j) = 100.0 * u(gen);
    }
    Eigen::MatrixXd q(n, J);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < J; ++j) q(r, j) = u(gen);
    const Eigen::MatrixXd e = (q * c.transpose()).rowwise() + b.transpose();
    const SurrogateModel m = fit_surrogate(q, e);
    EXPECT_LT(((m.intercept - b).cwiseAbs().array() / b.cwiseAbs().array()).maxCoeff(), 1e-8);
    EXPECT_LT((m.coefficients - c).cwiseAbs().maxCoeff() / c.cwiseAbs().maxCoeff(), 1e-8);

    // Refitting on the model's own predictions reproduces it.
    const SurrogateModel again = fit_surrogate(q, m.predict(q));
    EXPECT_LT((again.coefficients - m.coefficients).cwiseAbs().maxCoeff() / c.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Fit, MinimalSquareSystemInterpolates) {
    const int J = 3;
    Eigen::MatrixXd q(J + 1, J);
    q << 0.1, 0.7, 0.3, 0.9, 0.2, 0.4, 0.5, 0.5, 0.8, 0.3, 0.1, 0.6;
    Eigen::MatrixXd e(J + 1, 2);
    e << 100, 3, 250, 7, 180, 2, 90, 11;
    const SurrogateModel m = fit_surrogate(q, e);
    // Square-system oracle: [1 Q] x = e
    Eigen::MatrixXd design(J + 1, J + 1);
    design << Eigen::VectorXd::Ones(J + 1), q;
    const Eigen::MatrixXd x = design.fullPivLu().solve(e);
    for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(m.intercept(k), x(0, k), 1e-9 * std::abs(x(0, k)) + 1e-9);
        for (int j = 0; j < J; ++j) {
            const double expected = std::max(x(j + 1, k), 0.0);
            if (x(j + 1, k) >= 0.0) EXPECT_NEAR(m.coefficients(k, j), expected, 1e-9 * std::abs(x(j + 1, k)) + 1e-9);
        }
    }
}

TEST(Fit, RowPermutationInvariant) {
    const Layout l = small_layout();
    const Eigen::MatrixXd q = sobol_states(40, 3, 2);
    const Eigen::MatrixXd e = analytic_oracle_batch(l, q);
    std::vector<int> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(1));
    Eigen::MatrixXd qp(40, 3), ep(40, l.N());
    for (int i = 0; i < 40; ++i) {
        qp.row(i) = q.row(perm[i]);
        ep.row(i) = e.row(perm[i]);
    }
    const SurrogateModel a = fit_surrogate(q, e), b = fit_surrogate(qp, ep);
    EXPECT_LT((a.coefficients - b.coefficients).cwiseAbs().maxCoeff(), 1e-12 * a.coefficients.cwiseAbs().maxCoeff());
    EXPECT_LT((a.intercept - b.intercept).cwiseAbs().maxCoeff(), 1e-12 * a.intercept.cwiseAbs().maxCoeff());
}

TEST(Fit, RankDeficiencyNamesColumns) {
    Eigen::MatrixXd q = sobol_states(20, 3, 4);
    q.col(2) = q.col(0);
    const Eigen::MatrixXd e = Eigen::MatrixXd::Ones(20, 2);
    try {
        fit_surrogate(q, e);
        FAIL() << "expected SurrogateError";
    } catch (const SurrogateError& err) {
        const std::string what = err.what();
        EXPECT_TRUE(what.find("q_1") != std::string::npos || what.find("q_3") != std::string::npos) << what;
    }
    Eigen::MatrixXd constant = sobol_states(20, 3, 4);
    constant.col(1).setConstant(0.5);
    try {
        fit_surrogate(constant, e);
        FAIL() << "expected SurrogateError";
    } catch (const SurrogateError& err) {
        const std::string what = err.what();
        EXPECT_TRUE(what.find("intercept") != std::string::npos || what.find("q_2") != std::string::npos) << what;
    }
    EXPECT_THROW(fit_surrogate(sobol_states(3, 3, 1), Eigen::MatrixXd::Ones(3, 1)), DomainError);
}

TEST(Predict, ZeroStackedAffinityAndMonotonicity) {
    const Layout l = small_layout();
    const Eigen::MatrixXd q = sobol_states(64, 3, 8);
    const SurrogateModel m = fit_surrogate(q, analytic_oracle_batch(l, q));
    EXPECT_TRUE(m.predict(Eigen::VectorXd(Eigen::VectorXd::Zero(3))) == m.intercept);
    EXPECT_GE(m.coefficients.minCoeff(), 0.0);

    const Eigen::MatrixXd k3 = q.topRows(3);
    const Eigen::MatrixXd stacked = m.predict(k3);
    for (int r = 0; r < 3; ++r) {
        EXPECT_LT((stacked.row(r).transpose() - m.predict(Eigen::VectorXd(k3.row(r).transpose()))).cwiseAbs().maxCoeff(), 1e-12);
    }

    const Eigen::VectorXd q1 = q.row(10).transpose(), q2 = q.row(20).transpose();
    for (double lam : {0.0, 0.25, 0.6, 1.0}) {
        const Eigen::VectorXd lhs = m.predict(Eigen::VectorXd(lam * q1 + (1 - lam) * q2));
        const Eigen::VectorXd rhs = lam * m.predict(q1) + (1 - lam) * m.predict(q2);
        EXPECT_LT(((lhs - rhs).cwiseAbs().array() / rhs.cwiseAbs().array()).maxCoeff(), 1e-9);
    }

    Eigen::VectorXd up = q1;
    up(1) = std::min(1.0, up(1) + 0.3);
    EXPECT_TRUE(((m.predict(up) - m.predict(q1)).array() >= 0.0).all());
    EXPECT_THROW(m.predict(Eigen::VectorXd(Eigen::VectorXd::Zero(4))), DomainError);
}

TEST(Validate, R2Conventions) {
    const Layout l = small_layout();
    const Eigen::MatrixXd q = sobol_states(64, 3, 9);
    const Eigen::MatrixXd e = analytic_oracle_batch(l, q);
    const SurrogateModel m = fit_surrogate(q, e);
    EXPECT_NEAR(holdout_r2(m, q, e), 1.0, 1e-12);
    EXPECT_LT(max_relative_error(m, q, e), 1e-10);

    SurrogateModel mean_model;
    mean_model.intercept = Eigen::VectorXd::Constant(l.N(), e.mean());
    mean_model.coefficients = Eigen::MatrixXd::Zero(l.N(), 3);
    EXPECT_NEAR(holdout_r2(mean_model, q, e), 0.0, 1e-12);
    EXPECT_THROW(holdout_r2(m, Eigen::MatrixXd(0, 3), Eigen::MatrixXd(0, l.N())), DomainError);
}

TEST(SurrogateFiles, RoundTripAndChecksum) {
    const Layout l = small_layout();
    const Eigen::MatrixXd q = sobol_states(32, 3, 10);
    const TrainingPairs pairs{q, analytic_oracle_batch(l, q)};
    const SurrogateModel m = fit_surrogate(pairs.states, pairs.illum);

    write(scratch("layout.txt"), layout_text(l));
    const Layout l2 = read_layout(scratch("layout.txt"));
    EXPECT_EQ(l2.J(), l.J());
    EXPECT_EQ(l2.N(), l.N());
    EXPECT_TRUE(analytic_oracle(l2, q.row(3).transpose()) == analytic_oracle(l, q.row(3).transpose()));

    write(scratch("pairs.csv"), pairs_csv(pairs));
    const TrainingPairs p2 = read_pairs(scratch("pairs.csv"));
    EXPECT_TRUE(p2.states == pairs.states);
    EXPECT_TRUE(p2.illum == pairs.illum);

    const std::string text = surrogate_text(m);
    write(scratch("surrogate.txt"), text);
    const SurrogateModel m2 = read_surrogate(scratch("surrogate.txt"));
    EXPECT_TRUE(m2.intercept == m.intercept);
    EXPECT_TRUE(m2.coefficients == m.coefficients);

    // Header is exactly 8 lines; tampering with the body breaks the checksum.
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_GT(lines.size(), 8u);
    lines[8][lines[8].size() - 1] = lines[8].back() == '1' ? '2' : '1';
    std::string tampered;
    for (const auto& s : lines) tampered += s + "\n";
    write(scratch("tampered.txt"), tampered);
    EXPECT_THROW(read_surrogate(scratch("tampered.txt")), FormatError);

    write(scratch("badpairs.csv"), "e_1,q_1\n1,2\n");
    EXPECT_THROW(read_pairs(scratch("badpairs.csv")), FormatError);
    std::filesystem::remove_all(scratch("").parent_path());
}
