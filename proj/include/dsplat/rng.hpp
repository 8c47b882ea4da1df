#pragma once

#include <cmath>
#include <cstdint>

namespace dsplat {

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless hash of (seed, index); used for reproducible per-voxel noise.
inline uint64_t hash_combine(uint64_t seed, uint64_t index) {
    uint64_t s = seed ^ (0x2545f4914f6cdd1dULL + index * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// Deterministic generator independent of the standard library's
// distribution implementations, so streams are stable across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ^ 0x853c49e6748fea9bULL) {
        // Warm up so nearby seeds decorrelate.
        splitmix64(state_);
        splitmix64(state_);
    }

    uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; one value per call, cache discarded
    // deliberately to keep the stream position a pure function of call count.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return n > 0 ? next_u64() % n : 0; }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(T& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

} // namespace dsplat
