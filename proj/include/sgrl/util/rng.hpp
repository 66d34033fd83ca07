#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sgrl {

// Deterministic random source.  All sampling goes through the explicit
// transformations below rather than std::uniform_real_distribution /
// std::normal_distribution, whose output sequences differ across standard
// library implementations.  Given the same seed, every build produces the
// same stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Raw 64-bit draw.
    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1): top 53 bits of a draw scaled by 2^-53.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Standard normal via Box-Muller.  Consumes exactly two draws per
    // sample; the sine branch is discarded so the stream layout stays
    // trivially predictable.
    double normal01() {
        double u1 = uniform01();
        // Guard against log(0); remap 0 to the smallest representable draw.
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal01();
    }

    // Integer in [0, n).  Uses rejection-free modulo of a 53-bit uniform;
    // bias is negligible for the buffer sizes used here and the sequence is
    // platform-stable, which is what matters.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace sgrl
