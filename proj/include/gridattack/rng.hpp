#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace gridattack {

/// Seeded random source with fixed draw algorithms.
///
/// std::uniform_*_distribution implementations vary between standard
/// libraries, so all reductions from the raw mt19937_64 stream are done
/// here by hand. Identical seeds give identical draws on every platform,
/// which the experiment replay (`verify`) relies on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). Modulo bias is negligible for n << 2^64.
    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: empty range");
        return static_cast<std::size_t>(gen_() % n);
    }

    /// k distinct values drawn from 0..n-1 (partial Fisher-Yates), ascending.
    std::vector<int> sample(int n, int k) {
        if (k < 0 || k > n) throw std::invalid_argument("Rng::sample: k out of range");
        std::vector<int> pool(static_cast<std::size_t>(n));
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(index(static_cast<std::size_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(k));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace gridattack
