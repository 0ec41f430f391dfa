#pragma once

#include <cstdint>
#include <random>

namespace mpskit {

// mt19937_64 is fully specified by the standard, so sequences are identical
// across platforms. Distributions are not, hence the hand-rolled draws below.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Mixes a seed with a stream index; used to derive per-iteration seeds.
inline std::uint64_t hash_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ull + index);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// Unbiased draw from [0, n) via rejection sampling.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0ull - n) % n;  // 2^64 mod n
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

// [0, 1) with 53-bit resolution.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mpskit
