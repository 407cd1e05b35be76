#include "ledmaint/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace ledmaint::stats;

// Reference values from scipy.special.betainc / scipy.stats.
TEST(IncompleteBeta, MatchesScipy) {
    EXPECT_NEAR(incomplete_beta(2, 3, 0.4), 0.5248, 1e-10);
    EXPECT_NEAR(incomplete_beta(0.5, 0.5, 0.9), 0.7951672353008665, 1e-10);
    EXPECT_NEAR(incomplete_beta(10, 2.5, 0.7), 0.1773398808074702, 1e-10);
    EXPECT_NEAR(incomplete_beta(30, 40, 0.45), 0.6447480085585681, 1e-10);
    EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(IncompleteBeta, SymmetryRelation) {
    for (double x : {0.1, 0.35, 0.8}) {
        EXPECT_NEAR(incomplete_beta(3.3, 1.7, x), 1.0 - incomplete_beta(1.7, 3.3, 1.0 - x), 1e-12);
    }
}

TEST(StudentT, UpperTailMatchesScipy) {
    EXPECT_NEAR(student_t_sf(1.5, 4), 0.104, 1e-10);
    EXPECT_NEAR(student_t_sf(-0.7, 12.3), 0.7515229364708478, 1e-10);
    EXPECT_NEAR(student_t_sf(3.2, 2.5), 0.03170551411819074, 1e-10);
    EXPECT_DOUBLE_EQ(student_t_sf(0.0, 7), 0.5);
}

TEST(GammaLogPdf, MatchesScipy) {
    EXPECT_NEAR(gamma_log_pdf(0.37, 0.8, 2.5), -0.14517663823173999, 1e-12);
    EXPECT_NEAR(gamma_log_pdf(2.0, 3.5, 1.2), -1.2299802021683697, 1e-12);
    // shape 1 is the exponential: ln(rate) - rate x
    EXPECT_NEAR(gamma_log_pdf(0.3, 1.0, 4.0), std::log(4.0) - 1.2, 1e-14);
}

TEST(Quantile, Type7MatchesNumpy) {
    const std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6};
    EXPECT_NEAR(quantile(v, 0.3), 2.1, 1e-12);
    EXPECT_NEAR(quantile(v, 0.975), 8.475, 1e-12);
    EXPECT_EQ(quantile(v, 0.0), 1.0);
    EXPECT_EQ(quantile(v, 1.0), 9.0);
    EXPECT_THROW(quantile(std::vector<double>{}, 0.5), std::invalid_argument);
}

TEST(Moments, MeanAndVariance) {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    EXPECT_DOUBLE_EQ(mean(v), 5.0);
    EXPECT_DOUBLE_EQ(sample_variance(v), 32.0 / 7.0);
    EXPECT_EQ(sample_variance(std::vector<double>{1.0}), 0.0);
}

TEST(Kendall, ExactSmallSampleMatchesScipy) {
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
    const std::vector<double> y{7.1, 6.2, 6.9, 4.0, 3.3, 3.5, 1.0};
    const auto r = kendall_tau(x, y);
    EXPECT_TRUE(r.exact);
    EXPECT_NEAR(r.tau, -0.8095238095238096, 1e-12);
    EXPECT_NEAR(r.p_less, 0.005357142857142857, 1e-12);
}

TEST(Kendall, AsymptoticMatchesScipy) {
    std::vector<double> x;
    for (int i = 1; i <= 14; ++i) x.push_back(i);
    const std::vector<double> y{7.163676,  -12.22266, -1.327605, -6.271078, -6.810597, -6.862389, -15.079945,
                                -8.92773,  -12.460852, 3.291998, -10.096854, -13.410523, -14.12515, -16.672185};
    const auto r = kendall_tau(x, y);
    EXPECT_FALSE(r.exact);
    EXPECT_NEAR(r.tau, -0.5604395604395604, 1e-12);
    EXPECT_NEAR(r.p_less, 0.002619253629983591, 1e-9);
}

TEST(Kendall, TiesHandledByPermutation) {
    // Perfectly decreasing with a tie in y: tau-b < 0 and p equals the share of
    // distinct y arrangements at least as discordant.
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{4, 3, 3, 1};
    const auto r = kendall_tau(x, y);
    EXPECT_TRUE(r.exact);
    EXPECT_NEAR(r.tau, -5.0 / std::sqrt(6.0 * 5.0), 1e-12);
    // 12 distinct arrangements; S = -5 is reached by (4,3,3,1) only.
    EXPECT_NEAR(r.p_less, 1.0 / 12.0, 1e-12);
}
