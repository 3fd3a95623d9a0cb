#pragma once

#include <cmath>
#include <cstdint>

namespace steerkit {

// splitmix64 step: advances the state and returns the next output word.
// Used everywhere randomness is needed so results are identical across
// platforms and standard libraries.
inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Per-record seed derivation: hash(run_seed, a, b). Fixed scheme so any
// (alpha_index, sample_idx) record can be regenerated in isolation and
// execution order never matters.
inline uint64_t derive_seed(uint64_t run_seed, uint64_t a, uint64_t b) {
    uint64_t s = run_seed;
    uint64_t h = splitmix64(s);
    s = h ^ (a * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
    h = splitmix64(s);
    s = h ^ (b * 0xCA5A826395121157ull + 0x8CB92BA72F3D8DD7ull);
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // Uniform on the open interval (0, 1).
    double open01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Uniform on the open interval (lo, hi).
    double uniform(double lo, double hi) { return lo + open01() * (hi - lo); }

    // Standard normal via Box-Muller (no caching, two draws per sample).
    double normal() {
        double u1 = open01();
        double u2 = open01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    uint64_t state_;
};

} // namespace steerkit
