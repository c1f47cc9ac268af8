#pragma once

#include <cstdint>
#include <random>

namespace coformer {

/// Deterministic random source.  The engine is std::mt19937_64, whose output
/// sequence is pinned by the standard; every distribution transform is
/// implemented here so that streams are identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform draw in [0, 1) with 53 bits of precision.
    double uniform01();

    /// Uniform draw in [lo, hi).
    double uniform(double lo, double hi);

    /// Gaussian draw via the Box-Muller transform (no cached spare).
    double normal(double mean, double stddev);

    /// Unbiased integer draw in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Poisson draw by Knuth's product method; large means are split into
    /// chunks so the product never underflows.
    long long poisson(double mean);

    /// Independent stream derived from this instance's seed and a tag.
    /// Does not consume state from the parent.
    Rng child(std::uint64_t tag) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace coformer
