#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qtomo {

// Deterministic random stream. All randomness in the library flows from a
// single user seed through named sub-streams, so any seeded run is exactly
// reproducible regardless of thread scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution, identical on every platform.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform on (0, 1]; safe to pass to std::log.
    double uniform_pos() { return 1.0 - uniform(); }

    // Integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    std::uint64_t next() { return engine_(); }

    // Independent child stream addressed by a path of integers, e.g.
    // derive(seed, {kChainStream, chain_id}).
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t state = mix(seed ^ 0x9e3779b97f4a7c15ull);
        for (std::uint64_t id : path) state = mix(state ^ mix(id + 0xbf58476d1ce4e5b9ull));
        return Rng(state);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

// Stream tags for Rng::derive paths.
enum StreamTag : std::uint64_t {
    kChainStream = 1,
    kStartStream = 2,
    kMleStream = 3,
    kSimulateStream = 4,
    kStudyStream = 5,
    kHaarStream = 6,
};

}  // namespace qtomo
