#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "rlp/rng.hpp"
#include "rlp/types.hpp"

namespace rlp {

// rhs -> (AᵀWA)^{-1} rhs. Randomized implementations must be unbiased.
using WeightedSolve = std::function<Vec(const Vec& rhs, const Vec& w)>;

WeightedSolve exact_weighted_solve(std::shared_ptr<const Mat> A);

// μ^{-1} ‖Aᵀx - b‖² in the (AᵀX'S'^{-1}A)^{-1} norm.
double phi_b(const Mat& A, const Vec& b, const Vec& x, const Vec& x_ref, const Vec& s_ref, double mu);

// x̂ + XS^{-1}A H^{-1}(b - Aᵀx̂), with H^{-1} supplied by solve(·, x/s).
Vec exact_correction(const Mat& A, const Vec& b, const Vec& x_hat, const Vec& x, const Vec& s,
                     const WeightedSolve& solve);

// b - Σ a_i x̃_i with x̃_i = x_i/p_i w.p. p_i = min(1, τ̄_i/eps_b).
Vec sample_delta_b(const Mat& A, const Vec& b, const Vec& x, const Vec& tau_bar, double eps_b, Rng& rng);

struct FeasConfig {
    double eps_b = 0.05;
    double eps_h = 0.05;
    double sample_c = 1.0;  // rows for H2, N: p_i = min(1, sample_c·ln n·τ̄_i/eps_h²)
    int period = 0;         // correction period; 0 -> max(1, floor(√d / ln⁶ n))
    std::uint64_t seed = 1;
};

struct H2H4 {
    Mat h2, h4;
    int terms = 0;  // X, the truncation point of the series
};

// H2 shares its sampled rows across both diagonal factors. H4 is the
// geometric-truncated series M0 Σ_{k<=X} (-2)^k Π N_i M_i with M_i the
// exact inverse of AᵀX'S'^{-1}A and N_i fresh samples of Aᵀ(XS^{-1}-X'S'^{-1})A.
H2H4 make_h2_h4(const Mat& A, const Vec& x, const Vec& s, const Vec& xp, const Vec& sp, const Vec& tau_bar,
                const FeasConfig& cfg, Rng& rng);

class FeasibilityMaintainer {
public:
    FeasibilityMaintainer() = default;
    FeasibilityMaintainer(std::shared_ptr<const Mat> A, const Vec& b, const FeasConfig& cfg, WeightedSolve solve);

    // δ_λ such that x + XS^{-1}Aδ_λ keeps Φ_b unbiased across the change
    // of (x', s') to (x, s).
    Vec maintain_infeasibility(const Vec& x, const Vec& s, const Vec& tau_bar);
    // Adds H^{-1}(b - Aᵀx) once every period() calls.
    Vec maintain_feasibility(const Vec& x, const Vec& s, const Vec& tau_bar);

    void forget_reference() { has_prev_ = false; }
    void reseed(std::uint64_t seed) { rng_ = Rng(seed); }
    int period() const { return period_; }
    long calls() const { return calls_; }
    long corrections() const { return corrections_; }
    const Vec& b() const { return b_; }

private:
    std::shared_ptr<const Mat> A_;
    Vec b_;
    FeasConfig cfg_;
    WeightedSolve solve_;
    Rng rng_;
    Vec xp_, sp_;
    bool has_prev_ = false;
    int period_ = 1;
    long calls_ = 0, corrections_ = 0, since_ = 0;
};

}  // namespace rlp
