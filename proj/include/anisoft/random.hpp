#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace anisoft {

/// Reproducible random source.
///
/// Bits come from std::mt19937_64 (whose output sequence is fixed by the C++
/// standard). Conversions to floating point are done here rather than through
/// <random> distributions, whose algorithms are implementation-defined:
///   uniform  = (bits >> 11) * 2^-53            in [0, 1)
///   normal   = Box-Muller on two uniforms, cosine branch only
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer in [lo, hi].
    int integer(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(engine_() % span);
    }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace anisoft
