#pragma once

#include <span>
#include <vector>

namespace ledmaint::stats {

double mean(std::span<const double> xs);

/// Unbiased (n - 1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> xs);

inline double sample_std(std::span<const double> xs);

/// Linear-interpolation quantile (type 7). Copies and sorts.
double quantile(std::span<const double> xs, double p);

/// Regularized incomplete beta I_x(a, b), continued fraction evaluated with
/// the modified Lentz method to a relative tolerance of 1e-10 (switching to
/// the symmetric form when x > (a + 1) / (a + b + 2)).
double incomplete_beta(double a, double b, double x);

/// Upper tail P(T > t) of Student's t with `dof` degrees of freedom
/// (dof may be fractional).
double student_t_sf(double t, double dof);

/// Gamma(shape, rate) log density at x > 0.
double gamma_log_pdf(double x, double shape, double rate);

struct KendallResult {
    double tau = 0.0;     // tau-b (tie-corrected)
    double p_less = 1.0;  // one-sided p for a negative association
    bool exact = false;   // permutation distribution rather than normal tail
};

/// Kendall rank correlation with a one-sided test of tau < 0. Up to 9
/// pairs the p-value enumerates every permutation of y (exact under ties,
/// since the tie structure is permutation invariant); beyond that it uses
/// the tie-corrected normal approximation of S = concordant - discordant.
KendallResult kendall_tau(std::span<const double> x, std::span<const double> y);

} // namespace ledmaint::stats

#include <cmath>

inline double ledmaint::stats::sample_std(std::span<const double> xs) {
    return std::sqrt(sample_variance(xs));
}
