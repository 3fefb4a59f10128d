#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace choicebandit {

// Counter-style seed derivation. Every random draw in the experiment
// harness is keyed by a tuple (master seed, replication, variant, step,
// salt), so results do not depend on scheduling or thread count.

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t operator()() { return next(); }
    uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

inline uint64_t derive_seed(std::initializer_list<uint64_t> tags) {
    uint64_t h = 0x5bd1e995c3b9ac61ULL;
    for (uint64_t t : tags) h = mix64(h ^ mix64(t));
    return h;
}

inline uint64_t double_bits(double d) { return std::bit_cast<uint64_t>(d); }

// Uniform double in [0, 1) from 53 high bits.
inline double unit_from_bits(uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform_at(uint64_t seed) {
    SplitMix64 g(seed);
    return unit_from_bits(g.next());
}

// One standard normal draw via Box-Muller; u1 is kept in (0, 1].
template <typename Urbg>
double standard_normal(Urbg& rng) {
    double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

inline double gaussian_at(uint64_t seed) {
    SplitMix64 g(seed);
    return standard_normal(g);
}

}  // namespace choicebandit
