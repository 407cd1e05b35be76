#include "ledmaint/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ledmaint {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (auto p : parts) {
        h = splitmix64(h ^ splitmix64(p));
    }
    return h;
}

double uniform01(Engine& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_index: empty range");
    }
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t r;
    do {
        r = eng();
    } while (r >= limit);
    return r % n;
}

double standard_normal(Engine& eng) {
    double u, v, s;
    do {
        u = 2.0 * uniform01(eng) - 1.0;
        v = 2.0 * uniform01(eng) - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

double gamma_variate(Engine& eng, double shape, double rate) {
    if (!(shape >= 0.0) || !(rate > 0.0)) {
        throw std::domain_error("gamma_variate: need shape >= 0 and rate > 0");
    }
    if (shape == 0.0) {
        return 0.0;
    }
    if (shape < 1.0) {
        const double boosted = gamma_variate(eng, shape + 1.0, 1.0);
        return boosted * std::pow(uniform01(eng), 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = standard_normal(eng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01(eng);
        if (u < 1.0 - 0.0331 * (x * x) * (x * x)) {
            return d * v / rate;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v / rate;
        }
    }
}

} // namespace ledmaint
