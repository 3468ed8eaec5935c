#pragma once

#include <cstdint>
#include <random>

namespace hyperepp {

// One splitmix64 step. Used to whiten seeds and to derive independent
// sub-streams from a (seed, stream, substream) triple.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic, seedable random source. Per-trajectory streams are derived
// from (seed, stream, index), never from the worker layout, so Monte-Carlo
// output does not depend on how trajectories are distributed over threads.
//
// Doubles are produced directly from the top 53 bits of the engine output
// instead of through std::uniform_real_distribution, whose output is not
// pinned down by the standard; this keeps streams bit-identical across
// standard-library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
        std::uint64_t x = seed;
        std::uint64_t h = splitmix64(x);
        x ^= stream * 0xD6E8FEB86659FD93ULL;
        h ^= splitmix64(x);
        x ^= index * 0xCA5A826395121157ULL;
        h ^= splitmix64(x);
        return Rng(h);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return next_double() < p; }

  private:
    std::mt19937_64 engine_;
};

} // namespace hyperepp
