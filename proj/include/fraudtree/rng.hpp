#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fraudtree {

// splitmix64. Small, fast, and fully specified here so that seeded runs are
// byte-identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller; consumes two uniforms per call.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

// Deterministic stream derivation: independent sub-seeds from a base seed and
// one or two stream tags. Used to fix per-tree / per-stage seeds up front so
// results do not depend on worker count or scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    Rng r(base ^ (0x9E3779B97F4A7C15ULL * (tag + 1)));
    return r.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag1, std::uint64_t tag2) {
    return derive_seed(derive_seed(base, tag1), tag2);
}

// k distinct indices from [0, n), uniform, by partial Fisher-Yates.
inline std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    if (k > n) k = n;
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace fraudtree
