#pragma once

#include <cstdint>
#include <random>

namespace mlkol {

/// splitmix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Sub-seed for stream `stream` of a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream));
}

/// Per-cell seed of an experiment: seed xor hash(n, trial).
constexpr std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t n, std::uint64_t trial) {
    return seed ^ mix64(mix64(n) + trial);
}

/// mt19937_64 with a portable uniform mapping (the standard distributions
/// are implementation-defined, which would break cross-toolchain replay).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [-a, a).
    double symmetric(double a) { return a * (2.0 * uniform() - 1.0); }

    /// +1 or -1 with equal probability.
    double sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace mlkol
