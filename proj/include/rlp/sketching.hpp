#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rlp/types.hpp"

namespace rlp {

// CountSketch with c hash rows, each owning m/c buckets. Column i of the
// implicit m x n matrix has exactly c nonzero ±1 entries, one per hash row.
class HeavyHitterSketch {
public:
    HeavyHitterSketch() = default;
    HeavyHitterSketch(double eps, Index n, std::uint64_t seed, double kappa = 4.0);

    Index width() const { return m_; }
    Index dim() const { return n_; }
    int column_sparsity() const { return c_; }
    double eps() const { return eps_; }

    // Position and sign of the r-th nonzero of column i.
    Index bucket(int r, Index i) const;
    double sign(int r, Index i) const;

    Vec apply(const Vec& x) const;
    Mat apply(const Mat& X) const;  // sketch each column of X (n x k)
    Mat dense() const;

    // Candidate heavy coordinates: the ceil(4/eps^2) largest median estimates.
    std::vector<Index> decode(const Vec& y) const;
    Vec estimates(const Vec& y) const;

private:
    double eps_ = 1.0;
    Index n_ = 0, m_ = 0, block_ = 0;
    int c_ = 1;
    std::uint64_t seed_ = 0;
};

// Dense Rademacher map with entries ±1/sqrt(k), k = ceil(c·eps^{-2}·ln n_whp).
class JlSketch {
public:
    JlSketch() = default;
    JlSketch(double eps, Index dim, std::uint64_t seed, Index n_whp = 0, double c = 4.0);

    Index rows() const { return k_; }
    Index dim() const { return dim_; }
    const Mat& matrix() const { return S_; }
    Vec apply(const Vec& v) const { return S_ * v; }

    static Index rows_for(double eps, Index n_whp, double c = 4.0);

private:
    Index k_ = 0, dim_ = 0;
    Mat S_;
};

struct AmvConfig {
    double kappa = 4.0;       // heavy-hitter width constant
    int reps = 0;             // 0 -> 5·ceil(log2 n)
    double jl_eps = 0.01;
    double jl_c = 4.0;
    // Replace any sketch at least as wide as n (or a JL with k >= n) by the
    // exact product; at such sizes the sketch costs more than it saves.
    bool dense_cap = true;
    std::uint64_t seed = 1;
};

// Maintains sketches of G·A under single-entry changes of g and reports the
// entries of G·A·h with magnitude at least eps, each verified exactly.
class ApproxMatVec {
public:
    ApproxMatVec() = default;
    ApproxMatVec(std::shared_ptr<const Mat> A, const Vec& g, const AmvConfig& cfg = {});
    ApproxMatVec(const Mat& A, const Vec& g, const AmvConfig& cfg = {})
        : ApproxMatVec(std::make_shared<const Mat>(A), g, cfg) {}

    void scale(Index i, double u);
    Vec query(const Vec& h, double eps);
    // Rows j with |(G A H)_{j,l}| >= eps for some column l, skipping rows
    // flagged in exclude.
    std::vector<Index> heavy_rows(const Mat& H, double eps, const std::vector<char>& exclude);

    // Forces the exact branch on every query (the fallback of the algorithm).
    Vec query_exact(const Vec& h, double eps) const;

    const Vec& g() const { return g_; }
    const Mat& A() const { return *A_; }
    Index rows() const { return n_; }
    int reps() const { return reps_; }
    int levels() const { return levels_; }  // sketch levels are j = 1..levels()
    bool level_is_dense(int j) const { return level_dense_[j]; }
    const Mat& sketched(int rep, int j) const { return M_[rep][j]; }
    Mat recompute_sketched(int rep, int j) const;

    struct Stats {
        std::uint64_t queries = 0, exact_fallbacks = 0, zero_exits = 0, candidates = 0;
    };
    const Stats& stats() const { return stats_; }

private:
    double norm_estimate(const Vec& h) const;
    std::vector<Index> candidates(int j, const Vec& h);

    std::shared_ptr<const Mat> A_;
    Vec g_;
    Index n_ = 0, d_ = 0;
    AmvConfig cfg_;
    int reps_ = 1, levels_ = 0;
    std::vector<std::vector<HeavyHitterSketch>> sk_;  // [rep][level]
    std::vector<std::vector<Mat>> M_;                 // Φ_j G A per rep/level
    std::vector<char> level_dense_;
    bool jl_dense_ = true;
    JlSketch jl_;
    Mat J_;  // R G A
    Stats stats_;
};

}  // namespace rlp
