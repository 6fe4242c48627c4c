#pragma once

#include <cstdint>
#include <random>

namespace prescale {

/// Portable random stream. The std distributions are implementation-defined,
/// so the draws are derived from raw mt19937_64 output by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for a purpose tag, mixed with splitmix64.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi); // inclusive
    double normal(double mean, double stddev);
    /// Triangular on [lo, hi] with the given mode.
    double triangular(double lo, double mode, double hi);

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace prescale
