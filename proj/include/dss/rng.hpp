#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace dss {

// One splitmix64 step. Used for seed derivation only.
inline std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable seed for a (master, tag, index) substream. Tags keep the per-node
// sensor, link and draw streams independent of each other and of the order
// in which the simulation happens to consume them.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t index) noexcept {
    std::uint64_t s = master;
    s = splitmix64_next(s) ^ (tag * 0xbf58476d1ce4e5b9ULL);
    s = splitmix64_next(s) ^ (index * 0x94d049bb133111ebULL);
    return splitmix64_next(s);
}

// Deterministic RNG. The engine is the standard-specified mt19937_64; all
// value mappings are done here instead of through std::*_distribution, whose
// output is implementation-defined. Identical seeds give identical streams
// on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1) with 53-bit resolution
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // unbiased integer in [0, n); n must be >= 1
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = (std::numeric_limits<std::uint64_t>::max() / n) * n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace dss
