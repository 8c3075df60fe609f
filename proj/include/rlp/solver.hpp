#pragma once

#include <string>
#include <vector>

#include "rlp/feasibility.hpp"
#include "rlp/ipm.hpp"
#include "rlp/lp_io.hpp"
#include "rlp/modified_lp.hpp"

namespace rlp {

struct SolveConfig {
    IpmConfig ipm;               // mode, profile, seed and trace live here
    double phase1_const = 64.0;  // μ₁ = phase1_const·n²√d/(γα²)
    int polish_max_rounds = 60;
    double lewis_eps = 0.0;      // 0 -> min(0.01, ε/4)
};

struct PhaseStats {
    long iterations = 0, violations = 0, retries = 0, reinits = 0;
    std::uint64_t ops = 0;
    double mu_start = 0, mu_end = 0;
    double max_centrality = 0, max_dx = 0, max_ds = 0, max_phi_b = 0;
};

struct PolishResult {
    Vec x;
    int rounds = 0;
    std::vector<double> phi_b;  // before round 1, after each round
    std::vector<double> moves;  // ‖X^{-1}(x_k - x_{k+1})‖_{τ+∞} per round
};

// Repeated x ← x + XS^{-1}A H^{-1}(b - Aᵀx) until Φ_b(x,x,s,μ) <= target.
PolishResult final_polish(const Mat& A, const Vec& b, const Vec& x, const Vec& s, double mu, double target,
                          const WeightedSolve& solve, int max_rounds, double c_norm = 1.0);

struct SolveReport {
    Vec x;
    double objective = 0, residual = 0;
    double objective_tol = 0, residual_tol = 0;  // δ‖c‖R and δ(‖A‖_F R + ‖b‖)

    Index n = 0, d = 0, n_mod = 0, d_mod = 0;
    bool padded = false;
    double R = 0, L = 0, delta = 0;
    Mode mode = Mode::exact;
    Profile profile = Profile::practical;
    std::uint64_t seed = 0;
    IpmConstants constants;

    int lewis_iterations = 0;
    double lewis_residual = 0;
    PhaseStats phase1, phase2;
    double switch_ratio = 0, switch_bound = 0, switch_centrality = 0;
    int polish_rounds = 0;
    double phi_b_before_polish = 0, phi_b_after_polish = 0, polish_movement = 0;
    double final_centrality = 0;
    std::uint64_t ops = 0;
    double seconds = 0;

    long iterations() const { return phase1.iterations + phase2.iterations; }
};

// Needs lp.R; L defaults to ‖c‖₂.
SolveReport lp_solve(const LpProblem& lp, double delta, const SolveConfig& cfg = {});

// x̂ = R·x̄_{1:n} after checking μ < δ²/(8d) and xs ≈_{1/2} μτ.
Vec extract_solution(const ModifiedLp& m, const Vec& xbar, const Vec& s, double mu, double alpha);

std::string report_json(const SolveReport& r, int indent = 2);

}  // namespace rlp
