#ifndef EMBLENS_RNG_HPP
#define EMBLENS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace emblens {

// Deterministic PRNG used throughout. We roll our own instead of using the
// <random> distributions because their output is implementation-defined and
// the reports must be byte-identical across platforms and thread counts.
//
// Seed fan-out: every component derives its own stream from the single run
// seed by hashing a component name (FNV-1a) into the seed and passing the
// result through splitmix64. The derivation is part of the file-format
// contract and is documented in the README.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view component) {
    std::uint64_t state = seed ^ fnv1a64(component);
    return splitmix64(state);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view component,
                                 std::uint64_t index) {
    std::uint64_t state = seed ^ fnv1a64(component);
    state = splitmix64(state);
    state ^= 0x6a09e667f3bcc909ULL + index;
    return splitmix64(state);
}

// xoshiro256++ core.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
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

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [0, n). Rejection-free modulo bias is negligible for
    // the sizes used here, but we keep the rejection loop for determinism
    // guarantees that do not depend on n.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t threshold = (~n + 1) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller; one fresh pair of uniforms per draw.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        return radius * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace emblens

#endif
