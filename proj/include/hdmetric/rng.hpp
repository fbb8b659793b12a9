#pragma once

#include <bit>
#include <cstdint>

namespace hdmetric {

/// Seedable, splittable generator. xoshiro256** seeded through SplitMix64;
/// split() derives an independent stream from the current seed and a key, so
/// per-trial streams do not depend on scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next() {
        const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n > 0 (Lemire's method, unbiased).
    std::uint64_t index(std::uint64_t n);

    /// Stream derived from (seed, key); independent of this generator's state.
    Rng split(std::uint64_t key) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace hdmetric
