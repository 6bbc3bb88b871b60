#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "bsrdiff/tensor.hpp"

namespace bsrdiff {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Seedable random source with fully specified output mapping, so that
/// identical seeds give identical streams on every platform. Uniforms map
/// the top 53 bits of mt19937_64 output to [0,1); normals use Box-Muller
/// with no cached spare, two uniforms per draw.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Standard normal via Box-Muller (cosine branch only).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    void fill_normal(Tensor& t) {
        float* p = t.data();
        const std::int64_t n = t.numel();
        // pairwise Box-Muller: both branches used, one uniform pair per two values
        std::int64_t i = 0;
        for (; i + 1 < n; i += 2) {
            const double u1 = 1.0 - uniform();
            const double u2 = uniform();
            const double r = std::sqrt(-2.0 * std::log(u1));
            p[i] = static_cast<float>(r * std::cos(2.0 * M_PI * u2));
            p[i + 1] = static_cast<float>(r * std::sin(2.0 * M_PI * u2));
        }
        if (i < n) p[i] = static_cast<float>(normal());
    }

    /// Deterministic substream derived from (seed, stream id); independent of
    /// the parent's current position.
    Rng fork(std::uint64_t stream) const {
        return Rng(detail::splitmix64(seed_ ^ detail::splitmix64(stream + 1)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace bsrdiff
