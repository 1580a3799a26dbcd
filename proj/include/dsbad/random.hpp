#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dsbad {

// All randomness in the engine comes from std::mt19937_64, whose output sequence is
// fixed by the C++ standard. The standard distributions are implementation-defined,
// so the helpers below derive values from raw engine output to stay reproducible
// across standard libraries.
using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection sampling; n must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // Values below `limit` would bias the modulo; (2^64 - n) mod n == -n mod n.
    const std::uint64_t limit = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = rng();
        if (x >= limit) {
            return x % n;
        }
    }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one value per call).
inline double standard_normal(Rng& rng) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dsbad
