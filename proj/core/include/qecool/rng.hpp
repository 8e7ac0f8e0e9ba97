/*
 * Seedable, splittable 64-bit RNG used everywhere noise is sampled.
 * Trial k of an experiment runs on derive_seed(master, ..., k), so trials
 * are reproducible independent of execution order or worker count.
 */

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

namespace qecool {

inline uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Order-sensitive, collision-resistant combine; chains build seed streams.
inline uint64_t hash_combine(uint64_t seed, uint64_t value) {
    uint64_t s = seed ^ (value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
    return splitmix64_next(s);
}

inline uint64_t hash_combine(uint64_t seed, double value) {
    return hash_combine(seed, std::bit_cast<uint64_t>(value));
}

class Xoshiro256pp {
public:
    using result_type = uint64_t;

    explicit Xoshiro256pp(uint64_t seed = 1) {
        uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return ~0ull; }

    uint64_t operator()() {
        const uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return double(operator()() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double uniform01_open0() { return double((operator()() >> 11) + 1) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Child generator for an independent stream.
    Xoshiro256pp split(uint64_t stream) { return Xoshiro256pp(hash_combine(operator()(), stream)); }

private:
    std::array<uint64_t, 4> state_{};
};

// Visits each index of [0, n) independently with probability p, in increasing
// order, using geometric skips (fast for sparse p, exact for any p).
template <class Fn>
void for_each_bernoulli_hit(Xoshiro256pp& rng, size_t n, double p, Fn&& on_hit) {
    if (p <= 0.0 || n == 0) return;
    if (p >= 1.0) {
        for (size_t i = 0; i < n; ++i) on_hit(i);
        return;
    }
    const double log1mp = std::log1p(-p);
    size_t i = 0;
    while (true) {
        const double u = rng.uniform01_open0();
        const double skip = std::floor(std::log(u) / log1mp);
        if (skip >= double(n)) return;  // also catches inf
        i += size_t(skip);
        if (i >= n) return;
        on_hit(i);
        ++i;
    }
}

}  // namespace qecool
