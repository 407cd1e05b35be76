#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ledmaint {

/// Raw bit source. The mt19937_64 output sequence is fixed by the standard,
/// and every transform below is implemented here rather than through
/// <random> distributions, so a seed reproduces the same draws on any
/// conforming toolchain.
using Engine = std::mt19937_64;

/// Folds a tuple of integers (master seed, policy key, run, slot, ...) into
/// one 64-bit seed with the SplitMix64 finalizer.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

inline Engine make_stream(std::initializer_list<std::uint64_t> parts) {
    return Engine(mix_seed(parts));
}

/// Uniform on the open interval (0, 1) with 53 bits of resolution.
double uniform01(Engine& eng);

/// Uniform integer in [0, n) by rejection; n must be > 0.
std::uint64_t uniform_index(Engine& eng, std::uint64_t n);

/// Marsaglia polar method.
double standard_normal(Engine& eng);

/// Gamma(shape, rate) variate. Marsaglia-Tsang squeeze for shape >= 1; for
/// shape < 1 a Gamma(shape + 1) draw is boosted by U^(1/shape).
/// shape == 0 returns exactly 0.
double gamma_variate(Engine& eng, double shape, double rate);

} // namespace ledmaint
