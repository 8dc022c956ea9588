#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mbgan {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mixes a handful of 64-bit values into a fresh seed (used to derive the
// per-checkpoint metric streams from the run seed without touching the
// training stream).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    std::uint64_t x = a;
    std::uint64_t h = splitmix64(x);
    x ^= b + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(x);
    x ^= c + 0xbf58476d1ce4e5b9ULL;
    h ^= splitmix64(x);
    return h;
}

// xoshiro256++ with explicit, checkpointable state.
//
// <random> engines are avoided on purpose: std::normal_distribution is
// implementation-defined, which would tie reproducibility to one standard
// library, and its state cannot be serialized portably. Runs must be
// bit-reproducible from (seed) alone and resumable from a checkpoint.
class Rng {
public:
    struct State {
        std::array<std::uint64_t, 4> s{};
        double cached_normal = 0.0;
        bool has_cached_normal = false;
    };

    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : state_.s) w = splitmix64(x);
    }

    std::uint64_t next_u64() {
        auto& s = state_.s;
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; one value of the pair is cached.
    double normal() {
        if (state_.has_cached_normal) {
            state_.has_cached_normal = false;
            return state_.cached_normal;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        state_.cached_normal = r * std::sin(t);
        state_.has_cached_normal = true;
        return r * std::cos(t);
    }

    // Uniform integer in [0, n), unbiased (rejection on the top band).
    std::uint64_t below(std::uint64_t n) {
        for (;;) {
            const std::uint64_t x = next_u64();
            const std::uint64_t r = x % n;
            if (x - r <= ~std::uint64_t{0} - (n - 1)) return r;
        }
    }

    const State& state() const { return state_; }
    void restore(const State& s) { state_ = s; }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    State state_;
};

} // namespace mbgan
