#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace essarb {

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard, but the standard <random> distributions are not, so all draws
// go through the hand-rolled mappings below. Every consumer takes an Rng
// by reference; nothing in the library owns a hidden generator.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, n). Bias is < n / 2^53, irrelevant here.
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    }

    // Standard normal via Box-Muller on our own uniforms.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    // Derives an independent generator keyed on (construction seed, stream).
    // The mapping ignores how far the parent has advanced, so parallel
    // consumers get schedule-independent draws.
    Rng child(std::uint64_t stream) const { return Rng(mix(seed_, stream)); }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        // splitmix64 finalizer over the combined key.
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace essarb
