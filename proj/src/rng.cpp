#include "coformer/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coformer {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t Rng::next_u64() {
    return engine_();
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    if (!(lo < hi)) {
        throw std::invalid_argument("Rng::uniform: lo must be less than hi");
    }
    return lo + (hi - lo) * uniform01();
}

double Rng::normal(double mean, double stddev) {
    // u1 is shifted into (0, 1] so the log argument is never zero.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("Rng::below: n must be positive");
    }
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) {
        x = next_u64();
    }
    return x % n;
}

long long Rng::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("Rng::poisson: mean must be finite and non-negative");
    }
    long long total = 0;
    while (mean > 500.0) {
        total += poisson(500.0);
        mean -= 500.0;
    }
    const double threshold = std::exp(-mean);
    long long k = 0;
    double product = 1.0;
    do {
        ++k;
        product *= uniform01();
    } while (product > threshold);
    return total + (k - 1);
}

Rng Rng::child(std::uint64_t tag) const {
    return Rng(splitmix64(splitmix64(seed_) ^ splitmix64(tag)));
}

}  // namespace coformer
