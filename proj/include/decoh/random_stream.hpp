#pragma once

#include <cstdint>
#include <random>

namespace decoh {

/// SplitMix64 finalizer; the mixing step used to derive substream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seeded random stream. Substreams are derived from (seed, key) without
/// touching the parent engine, so a branch can own a stream keyed by its
/// lineage regardless of evaluation order.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    RandomStream substream(std::uint64_t key) const;

    /// Uniform on [0, 1).
    double uniform();
    double normal();
    double exponential(double mean);
    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n);

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace decoh
