#pragma once

#include <cstdint>

#include "rlp/types.hpp"

namespace rlp {

struct LewisParams {
    double p = 1.0;
    double eta = 0.0;     // regularizer, usually d/n
    double eps = 0.01;    // stop when max |ln w - ln T(w)| <= eps
    int max_iters = 200;
    // Estimate leverage scores with a JL sketch of this accuracy (0 = exact).
    double jl_eps = 0.0;
    std::uint64_t seed = 1;
};

struct LewisResult {
    Vec w;
    int iterations = 0;
    double residual = 0.0;  // max |ln w - ln T(w)| at return
};

// T(w) = (W^{2/p-1} (σ(W^{1/2-1/p} A) + η))^{p/2}
Vec lewis_map(const Mat& A, const Vec& w, const LewisParams& params);

// Fixed-point iteration from w = η·1.
LewisResult lewis_weights(const Mat& A, const LewisParams& params);

}  // namespace rlp
