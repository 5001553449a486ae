#pragma once

#include <cmath>
#include <cstdint>

namespace cmass {

// Deterministic PRNG (xoshiro256++) with splitmix64 seeding and hashed
// substreams. All simulator randomness flows through this class so that a run
// is reproducible bit-for-bit from its seed, independently of the platform's
// <random> distributions. Substreams are derived by hashing (seed, tags),
// which keeps e.g. the mobility stream independent of how many draws the
// channel consumed.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    // Derived stream: deterministic function of (this stream's seed, tags).
    static Rng substream(std::uint64_t seed, std::uint64_t tag0,
                         std::uint64_t tag1 = 0, std::uint64_t tag2 = 0,
                         std::uint64_t tag3 = 0) {
        std::uint64_t h = seed;
        h = mix(h, tag0);
        h = mix(h, tag1);
        h = mix(h, tag2);
        h = mix(h, tag3);
        return Rng(h);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        // Rejection-free would bias for huge n; n here is always tiny.
        return n == 0 ? 0 : next_u64() % n;
    }

    // Standard normal via the polar method (second variate cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Exponential with rate lambda (mean 1/lambda).
    double exponential(double lambda) {
        double u;
        do { u = uniform(); } while (u <= 0.0);
        return -std::log(u) / lambda;
    }

    // Poisson count; mean is tiny everywhere we use this (<< 1 per frame).
    int poisson(double mean) {
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            p *= uniform();
            if (p <= limit) break;
            ++k;
        } while (k < 1000);
        return k;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
        std::uint64_t x = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
        return splitmix64(x);
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cmass
