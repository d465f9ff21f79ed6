#pragma once

#include <cstdint>
#include <cstring>

// Self-contained counter-style RNG so that sampled trajectories are
// bit-reproducible across compilers and standard libraries.

namespace kz {

struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    SplitMix64 s(h);
    return s.next();
}

inline std::uint64_t double_bits(double x) {
    std::uint64_t b = 0;
    std::memcpy(&b, &x, sizeof(b));
    return b;
}

// Per-trajectory seed: independent of scheduling, so any parallel fan-out
// reproduces the serial stream.
inline std::uint64_t trajectory_seed(std::uint64_t base_seed, int n_sites,
                                     double tau_q, long trajectory_index) {
    std::uint64_t h = hash_mix(base_seed, static_cast<std::uint64_t>(n_sites));
    h = hash_mix(h, double_bits(tau_q));
    h = hash_mix(h, static_cast<std::uint64_t>(trajectory_index));
    return h;
}

} // namespace kz
