#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rlp/rng.hpp"
#include "rlp/types.hpp"

namespace rlp {

struct InvConfig {
    double c1 = 8.0;        // oversampling γ = c1·ln n
    double c3 = 1e-3;       // Gaussian mask scale in SecureSolve
    double rich_c = 20.0;   // Richardson rounds: ceil(rich_c·ln(n/δ))
    double refactor_frac = 0.25;  // refactor once the rank since the last refresh exceeds this·d
    int max_retries = 4;
    std::uint64_t seed = 1;
};

// Where the bucket rule cuts a sorted error vector.
struct BucketCut {
    int k = 0;
    Index count = 0;  // number of leading sorted entries to refresh (i_k)
};
// abs_y: |y| sorted in decreasing order; mass: τ̃ of the matching entries.
BucketCut bucket_cut(const Vec& abs_y, const Vec& mass, int log_d);

// Maintains Ψ = (AᵀVA)^{-1} for a sparse leverage-score sample V of the
// weights, and answers linear solves in AᵀW̄A that do not expose V.
class InverseMaintainer {
public:
    InverseMaintainer() = default;
    InverseMaintainer(std::shared_ptr<const Mat> A, const Vec& w, const Vec& tau, double eps,
                      const InvConfig& cfg = {});

    // Returns the refreshed w̃^alg; Ψ is available through psi().
    const Vec& update(const Vec& w, const Vec& tau);

    Vec solve(const Vec& b, const Vec& wbar, double delta);
    Vec secure_solve(const Vec& b, const Vec& wbar, double delta);
    Vec ideal_solve(const Vec& b, const Vec& wbar, double delta);

    // The same procedures with their randomness drawn from a given seed.
    Vec secure_solve(const Vec& b, const Vec& wbar, double delta, std::uint64_t seed);
    Vec ideal_solve(const Vec& b, const Vec& wbar, double delta, std::uint64_t seed);

    // Fresh randomness for later calls, e.g. after a rollback.
    void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

    // The row sample U that the seeded procedures draw first.
    Vec draw_u(const Vec& wbar, double delta, std::uint64_t seed) const;

    const Mat& psi() const { return psi_; }
    const Mat& sampled_gram() const { return M_; }  // AᵀVA
    const Vec& v() const { return v_; }
    const Vec& w_alg() const { return w_alg_; }
    const Vec& tau_alg() const { return tau_alg_; }
    double gamma() const { return gamma_; }
    double eps() const { return eps_; }

    struct Stats {
        long updates = 0, resampled = 0, woodbury = 0, refactors = 0, retries = 0, solves = 0;
        std::vector<long> rank_hist;  // rank_hist[l]: updates with rank in [2^l, 2^{l+1})
        std::vector<long> cut_hist;   // cut_hist[k]: updates that stopped at bucket k
    };
    const Stats& stats() const { return stats_; }

    // ‖√W1 A Ψ1 Aᵀ √W1 − √W0 A Ψ0 Aᵀ √W0‖_F without forming n x n matrices.
    static double projection_movement(const Mat& A, const Vec& w0, const Mat& psi0, const Vec& w1,
                                       const Mat& psi1);

private:
    double sample_weight(Index i, double p_scale, Rng& rng) const;
    Vec sample_u(const Vec& wbar, double delta, Rng& rng) const;
    Vec gram_apply(const Vec& u, const Vec& y) const;  // AᵀUAy
    void refactor();
    void apply_changes(const std::vector<std::pair<Index, double>>& dv);

    std::shared_ptr<const Mat> A_;
    double eps_ = 0.1, gamma_ = 1.0;
    InvConfig cfg_;
    Vec w_alg_, tau_alg_, v_;
    Mat M_, psi_;
    Index rank_since_refresh_ = 0;
    int log_d_ = 1;
    Rng rng_;
    Stats stats_;
};

}  // namespace rlp
