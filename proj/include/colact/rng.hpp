#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace colact {

/// Seeded generator used by every stochastic operation in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard, and all value mappings below are spelled out here instead of
/// relying on std <random> distributions (whose algorithms are
/// implementation-defined). Identical seeds therefore give identical
/// streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform_unit();
    }

    /// Uniform integer in [0, n). Rejection sampling keeps it exactly uniform.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform_unit() < p; }

    /// Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(idx[i - 1], idx[j]);
        }
        return idx;
    }

    /// m distinct indices drawn uniformly from {0, ..., n-1} (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < m && i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(uniform_index(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(m < n ? m : n);
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

/// Stable seed derivation for sub-streams (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace colact
