#pragma once

// Deterministic, platform-independent randomness.
//
// Every stochastic routine in the library draws from an Rng seeded through
// derive_seed(master, stream, index). Trials, trajectories and internal
// target-estimation passes all get their own (stream, index) pair, so the
// numbers a run produces depend only on the master seed and the config,
// never on thread count or scheduling.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace roughwalk {

// splitmix64 step + finalizer
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index) {
    uint64_t h = mix64(master);
    h = mix64(h ^ (0xbf58476d1ce4e5b9ull + stream));
    h = mix64(h ^ (0x94d049bb133111ebull + index));
    return h;
}

// Stream ids used across the library; keeping them in one place avoids
// accidental correlation between independent pipelines.
namespace seed_stream {
inline constexpr uint64_t trajectory = 1;  // per-trial trajectory generation
inline constexpr uint64_t target = 2;      // internal target-estimation passes
inline constexpr uint64_t probe = 3;       // tightness probe trials
inline constexpr uint64_t renewal = 4;     // renewal-theory Monte Carlo
}  // namespace seed_stream

// xoshiro256++
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9e3779b97f4a7c15ull;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            w = z ^ (z >> 31);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53-bit mantissa
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in {0, ..., n-1}
    uint64_t next_below(uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::next_below: n must be positive");
        // rejection sampling keeps the draw exactly uniform
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<uint64_t, 4> s_{};
};

// Inverse-CDF sampler over a finite probability table.
class DiscreteSampler {
public:
    explicit DiscreteSampler(std::span<const double> probs) {
        if (probs.empty()) throw std::invalid_argument("DiscreteSampler: empty table");
        cdf_.reserve(probs.size());
        double acc = 0.0;
        for (double p : probs) {
            if (p < 0.0) throw std::invalid_argument("DiscreteSampler: negative probability");
            acc += p;
            cdf_.push_back(acc);
        }
        if (std::abs(acc - 1.0) > 1e-12)
            throw std::invalid_argument("DiscreteSampler: probabilities must sum to 1");
        cdf_.back() = 1.0;
    }

    int sample(Rng& rng) const {
        const double u = rng.next_double();
        // linear scan; tables here are tiny (a handful of atoms)
        for (size_t i = 0; i + 1 < cdf_.size(); ++i)
            if (u < cdf_[i]) return static_cast<int>(i);
        return static_cast<int>(cdf_.size() - 1);
    }

private:
    std::vector<double> cdf_;
};

}  // namespace roughwalk
