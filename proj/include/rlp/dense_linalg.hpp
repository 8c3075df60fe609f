#pragma once

#include <vector>

#include "rlp/types.hpp"

namespace rlp {

// QR factorization of diag(d)·A with rows pre-sorted by norm. Gives
// leverage scores, orthogonal projections and Gram solves without ever
// forming AᵀD²A, which keeps the IPM usable when x/s spans 1e30.
class ScaledQr {
public:
    ScaledQr() = default;
    // rank_tol bounds min|R_ii| / max|R_ii|. Weighted IPM systems are
    // legitimately graded, so callers there pass 0.
    ScaledQr(const Mat& A, const Vec& d, double rank_tol = 1e-13);

    Index rows() const { return n_; }
    Index cols() const { return d_; }

    Vec leverage() const;                 // σ(DA)
    Vec project(const Vec& u) const;      // P(DA)·u
    Vec solve_gram(const Vec& rhs) const; // (AᵀD²A)⁻¹·rhs
    // ‖rhs‖² in the (AᵀD²A)⁻¹ norm.
    double inv_norm2(const Vec& rhs) const;

private:
    Vec apply_rinv_t(const Vec& rhs) const;  // R⁻ᵀ (permuted)

    Index n_ = 0, d_ = 0;
    std::vector<Index> perm_;  // sorted row -> original row
    Mat q_;                    // thin Q, rows in sorted order
    Mat r_;                    // d x d upper triangular
};

Vec leverage_scores(const Mat& A);
Vec regularized_tau(const Mat& A);
// τ_reg(x,s) = σ(S^{-1/2-α} X^{1/2-α} A) + d/n.
Vec weighted_tau(const Mat& A, const Vec& x, const Vec& s, double alpha);

// Symmetric positive-definite factorization with a pivoted fallback.
class GramSolver {
public:
    GramSolver() = default;
    explicit GramSolver(const Mat& M, double pivot_tol = 1e-12);
    Vec solve(const Vec& rhs) const;
    Mat solve(const Mat& rhs) const;
    Mat inverse() const;
    bool used_fallback() const { return fallback_; }

private:
    Eigen::LLT<Mat> llt_;
    Eigen::LDLT<Mat> ldlt_;
    bool fallback_ = false;
};

Mat gram(const Mat& A, const Vec& w);  // AᵀWA
Vec solve_normal(const Mat& A, const Vec& w, const Vec& rhs);

double mixed_norm(const Vec& z, const Vec& tau, double c_norm);

// Max |ln λ| over generalized eigenvalues of (M1, M2).
double spectral_gap(const Mat& M1, const Mat& M2);
bool spectral_approx_check(const Mat& M1, const Mat& M2, double eps, double slack = 1e-9);

Mat lambda_matrix(const Mat& A);

}  // namespace rlp
