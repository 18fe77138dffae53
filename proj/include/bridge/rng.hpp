#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace bridge {

// All randomness in the project flows from one root seed through named
// substreams, so individual components stay reproducible when other
// components change how much randomness they consume.
//
// Distribution sampling is hand-rolled on top of mt19937_64 because the
// standard <random> distributions are implementation-defined and would
// break bit-reproducibility across standard libraries.

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
    return a;
}

inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
    std::seed_seq seq{seed, fnv1a64(name)};
    return std::mt19937_64(seq);
}

// Uniform double in [0, 1) with 53 bits of randomness.
inline double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double next_uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * next_unit(rng);
}

// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t next_index(std::mt19937_64& rng, std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased and deterministic.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(next_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace bridge
