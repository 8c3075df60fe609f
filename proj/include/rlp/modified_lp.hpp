#pragma once

#include "rlp/types.hpp"

namespace rlp {

// min cᵀx s.t. Aᵀx = b, x >= 0 with A n x d, lifted so that the all-ones
// vector is an interior primal point with a matching dual slack.
struct ModifiedLp {
    Mat A;     // (n'+2) x (d'+1); n', d' include the padding variable if any
    Vec b, c;  // d'+1, n'+2
    Vec x0, y0, s0;
    double R = 1, L = 1, delta = 1, norm_f = 0;
    Index n_orig = 0, d_orig = 0;
    bool padded = false;
};

// Rejects zero rows and rank-deficient A. Pads first when
// ‖Aᵀ1 - b/R‖_∞ < (‖A‖_F + ‖b‖/R)/2.
ModifiedLp build_modified_lp(const Mat& A, const Vec& b, const Vec& c, double delta, double R, double L);

bool needs_padding(const Mat& A, const Vec& b, double R);

// x̂ = R·x̄_{1:n}, clipped at 0.
Vec extract_solution(const ModifiedLp& m, const Vec& xbar);

}  // namespace rlp
