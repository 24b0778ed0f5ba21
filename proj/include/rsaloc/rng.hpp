#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rsaloc {

/// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives a child seed from (seed, stream index). Chain calls to derive
/// deeper substreams; the scheme makes per-sample / per-trial generators
/// independent of processing order.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index ^ 0xD1B54A32D192ED03ULL));
}

/// Seeded random source with portable output.
///
/// The engine (std::mt19937_64) is fully specified by the standard; the
/// uniform and normal transforms are implemented here rather than through
/// std distributions, whose sequences vary between standard libraries.
/// Identical seeds therefore produce bit-identical draws everywhere.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes exactly two draws.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return engine_() % n; }

private:
    std::mt19937_64 engine_;
};

}  // namespace rsaloc
