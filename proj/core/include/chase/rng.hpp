#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace chase {

// Seeded generator with fully pinned-down draw semantics. std::mt19937_64
// output is specified by the standard; the derived draws (unit interval,
// bounded ints, shuffles) are implemented here rather than through
// std::uniform_* / std::shuffle, whose streams vary across stdlibs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform in [0, 1), 53 bits of entropy.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n). n must be > 0.
    std::size_t below(std::size_t n) {
        // Rejection to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return static_cast<std::size_t>(v % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

    // Distinct indices sampled without replacement from [0, n).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

    // Derive an independent stream, e.g. per example.
    Rng fork(std::uint64_t salt) {
        return Rng(next() ^ (salt * 0x9e3779b97f4a7c15ULL));
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace chase
