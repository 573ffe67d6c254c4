#ifndef SBMOM_RNG_HPP
#define SBMOM_RNG_HPP

#include <cmath>
#include <cstdint>

// Self-contained, portable random number machinery. Every stochastic
// routine in the library derives its stream from a user seed through
// these helpers, so results are bit-reproducible across platforms and
// thread counts (no std::<distribution> involved).

namespace sbmom {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Collapse (seed, stream indices) into one well-mixed 64-bit value.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0x2545f4914f6cdd1dULL + a;
    (void)splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (b + 1);
    std::uint64_t t = s;
    return splitmix64(t);
}

// xoshiro256++ (Blackman/Vigna), seeded through splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1): safe as a log/inverse-CDF argument.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform_open()); }

    // Standard normal via Marsaglia polar rejection.
    double normal() {
        for (;;) {
            double u = 2.0 * uniform() - 1.0;
            double v = 2.0 * uniform() - 1.0;
            double r = u * u + v * v;
            if (r > 0.0 && r < 1.0) return u * std::sqrt(-2.0 * std::log(r) / r);
        }
    }

    // Bernoulli(1/2) from a single bit.
    bool coin() { return (next_u64() >> 63) != 0; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

} // namespace sbmom

#endif
