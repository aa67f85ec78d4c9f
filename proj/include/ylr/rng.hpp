#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ylr {

// Seeded random source. The engine is fully specified by the standard and the
// mappings below avoid the implementation-defined std:: distributions, so a
// given seed yields the same stream everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t integer(std::uint64_t n) {
        return n == 0 ? 0 : engine_() % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one variate per call.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Independent per-stream seed derived from a base seed (splitmix64 step).
    static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
        std::uint64_t x = base + (stream + 1) * 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ylr
