#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rlp/sketching.hpp"

namespace rlp {

struct LsConfig {
    AmvConfig amv;
    double sample_c = 16.0;  // p_i = min(1, sample_c·ln n·δ^-2·τ̃_i)
    double jl_c = 4.0;       // rows of the fresh JL map: jl_c·ln n/(δ/8)^2
    // A fresh JL map with at least n rows is replaced by the identity.
    bool dense_cap = true;
    // Candidate rows J_i = [n] instead of the sketch-detected set. The
    // output must not change; used to check that τ̃ only depends on Ψ_safe.
    bool all_candidates = false;
    std::uint64_t seed = 1;
};

// Maintains τ̃ ≈_eps σ(GA) + d/n while g changes slowly. Each query takes
// two approximate inverses of AᵀG²A; Ψ only steers which rows get
// re-estimated and Ψ_safe supplies every reported value.
class LeverageMaintainer {
public:
    LeverageMaintainer() = default;
    LeverageMaintainer(std::shared_ptr<const Mat> A, const Vec& g, double eps, const LsConfig& cfg = {});

    void scale(Index j, double u);
    const Vec& query(const Mat& psi, const Mat& psi_safe);

    const Vec& tau() const { return tau_; }
    const Vec& g() const { return g_; }
    const Mat& B() const { return B_; }
    Mat B_direct() const;  // AᵀGR recomputed
    Index jl_cols() const { return R_.cols(); }
    double eps() const { return eps_; }
    long t() const { return t_; }
    long queries() const { return queries_; }

    struct Stats {
        long full_recomputes = 0, candidates = 0, accepted = 0, estimates = 0;
    };
    const Stats& stats() const { return stats_; }

private:
    struct State {
        Mat psi, psi_safe, B;
        Vec g, tau;
        bool first = false;
        mutable Mat M;  // Ψ_s AᵀG²A Ψ_s when no randomness is involved
        mutable bool has_m = false;
    };
    using StatePtr = std::shared_ptr<const State>;

    Vec estimate(const std::vector<Index>& J, const State& s, double delta, std::uint64_t call_seed);
    std::vector<Index> find_indices(const State& now);

    std::shared_ptr<const Mat> A_;
    ApproxMatVec D_;
    Vec g_, tau_;
    Mat R_, B_;
    double eps_ = 0.1;
    LsConfig cfg_;
    int logn_ = 1, top_ = 0;
    long t_ = 0, queries_ = 0;
    bool started_ = false;
    std::vector<long> last_change_;
    std::vector<StatePtr> hist_;  // hist_[i]: state at the last multiple of 2^i
    Stats stats_;
};

}  // namespace rlp
