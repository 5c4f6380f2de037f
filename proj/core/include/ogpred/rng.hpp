#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace ogpred {

/// Deterministic 64-bit PRNG (xoshiro256++, seeded through splitmix64).
///
/// The standard library's distributions are not bit-reproducible across
/// implementations, and reproducible splits/initialization are a hard
/// requirement here, so draws are implemented directly on the raw stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // splitmix64 expansion of the scalar seed into the 256-bit state.
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, n). Modulo reduction; the bias at 64 bits is
    /// far below anything observable at our scales and keeps draws portable.
    std::uint64_t bounded(std::uint64_t n) {
        return next_u64() % n;
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Mixes a base seed with a stream index (fold number, epoch, ...) into an
    /// independent, reproducible child seed.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace ogpred
