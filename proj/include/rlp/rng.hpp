#pragma once

#include <cstdint>
#include <random>

#include "rlp/types.hpp"

namespace rlp {

// Counter-based mixing. hash64(seed, a, b) is a pure function, so sketch
// entries can be regenerated on demand and replayed from the seed alone.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash64(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Derive an independent child seed from a parent seed and a tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return hash64(seed ^ 0x9e3779b97f4a7c15ULL, tag, 0x5bd1e995ULL);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : eng_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
    bool bernoulli(double p) { return p >= 1.0 || uniform() < p; }
    double rademacher() { return (eng_() & 1ULL) ? 1.0 : -1.0; }
    std::uint64_t next() { return eng_(); }
    // Number of fair coin flips before the first tail: P[X >= k] = 2^{-k}.
    int geometric_half() { return std::geometric_distribution<int>(0.5)(eng_); }

    Vec normal_vec(Index n) {
        Vec v(n);
        for (Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }
    Mat normal_mat(Index r, Index c) {
        Mat m(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i) m(i, j) = normal();
        return m;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace rlp
