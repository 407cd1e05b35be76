#include "ledmaint/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ledmaint::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) {
        throw std::invalid_argument("mean of empty sample");
    }
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) {
        return 0.0;
    }
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - m) * (x - m);
    }
    return ss / static_cast<double>(xs.size() - 1);
}

double quantile(std::span<const double> xs, double p) {
    if (xs.empty()) {
        throw std::invalid_argument("quantile of empty sample");
    }
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-10;
    constexpr int max_iter = 10000;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) {
        d = tiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) {
            return h;
        }
    }
    throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("incomplete_beta: a and b must be positive");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double dof) {
    if (!(dof > 0.0)) {
        throw std::domain_error("student_t_sf: dof must be positive");
    }
    if (std::isinf(t)) {
        return t > 0 ? 0.0 : 1.0;
    }
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
    return t > 0.0 ? tail : 1.0 - tail;
}

double gamma_log_pdf(double x, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

namespace {

int sign(double v) {
    return (v > 0.0) - (v < 0.0);
}

long kendall_s(std::span<const double> x, const std::vector<double>& y) {
    long s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            s += sign(x[j] - x[i]) * sign(y[j] - y[i]);
        }
    }
    return s;
}

// Sizes of tied groups.
std::vector<double> tie_groups(std::span<const double> v) {
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> groups;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        if (j - i > 1) groups.push_back(static_cast<double>(j - i));
        i = j;
    }
    return groups;
}

} // namespace

KendallResult kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("kendall_tau: need two equal-length samples of size >= 2");
    }
    const auto n = static_cast<double>(x.size());
    std::vector<double> yv(y.begin(), y.end());
    const long s_obs = kendall_s(x, yv);
    const auto tx = tie_groups(x), ty = tie_groups(y);
    double n1 = 0.0, n2 = 0.0;
    for (double t : tx) n1 += t * (t - 1.0) / 2.0;
    for (double u : ty) n2 += u * (u - 1.0) / 2.0;
    const double n0 = n * (n - 1.0) / 2.0;
    KendallResult r;
    const double denom = std::sqrt((n0 - n1) * (n0 - n2));
    r.tau = denom > 0.0 ? static_cast<double>(s_obs) / denom : 0.0;

    if (x.size() <= 9) {
        std::sort(yv.begin(), yv.end());
        long total = 0, at_most = 0;
        do {
            ++total;
            at_most += kendall_s(x, yv) <= s_obs;
        } while (std::next_permutation(yv.begin(), yv.end()));
        // next_permutation walks distinct arrangements; tied y values make
        // each one stand for the same number of labelled permutations.
        r.p_less = static_cast<double>(at_most) / static_cast<double>(total);
        r.exact = true;
        return r;
    }
    auto poly = [](const std::vector<double>& g, auto f) {
        double acc = 0.0;
        for (double t : g) acc += f(t);
        return acc;
    };
    const double v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    const double vt = poly(tx, [](double t) { return t * (t - 1.0) * (2.0 * t + 5.0); });
    const double vu = poly(ty, [](double u) { return u * (u - 1.0) * (2.0 * u + 5.0); });
    const double t2 = poly(tx, [](double t) { return t * (t - 1.0) * (t - 2.0); });
    const double u2 = poly(ty, [](double u) { return u * (u - 1.0) * (u - 2.0); });
    const double t1 = poly(tx, [](double t) { return t * (t - 1.0); });
    const double u1 = poly(ty, [](double u) { return u * (u - 1.0); });
    const double var = (v0 - vt - vu) / 18.0 + t2 * u2 / (9.0 * n * (n - 1.0) * (n - 2.0)) +
                       t1 * u1 / (2.0 * n * (n - 1.0));
    r.p_less = var > 0.0 ? 0.5 * std::erfc(-static_cast<double>(s_obs) / std::sqrt(2.0 * var)) : 1.0;
    return r;
}

} // namespace ledmaint::stats
