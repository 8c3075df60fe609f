#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "rlp/sketching.hpp"

namespace rlp {

// Accumulates Σ_k G^(k) A h^(k) over a window of updates and reports its
// large entries at query time. Rows whose scaling changed inside the window,
// or that were marked, are reported exactly.
class AccumulatedProduct {
public:
    AccumulatedProduct() = default;
    AccumulatedProduct(std::shared_ptr<const Mat> A, const Vec& g, const AmvConfig& cfg = {});

    void update(const Vec& h);
    void scale(Index i, double u);
    void mark_exact(Index i);
    Vec query(double eps);
    // Entry i of the window summed at the last query.
    double compute_exact(Index i) const;

    const Vec& g() const { return g_; }
    int pending() const { return int(h_.size()); }
    const ApproxMatVec& inner() const { return D_; }

private:
    using Journal = std::unordered_map<Index, std::vector<std::pair<int, double>>>;
    static double exact_entry(const Mat& A, Index i, double g_old, const std::vector<Vec>& hsuf,
                              const Journal& journal);

    std::shared_ptr<const Mat> A_;
    ApproxMatVec D_;
    Vec g_, g_old_;
    std::vector<Vec> h_;
    Vec hsum_;
    Journal delta_;  // row -> (k, g_i in force from update k on)
    std::vector<char> in_f_;
    std::vector<Index> f_;
    Vec gbar_old_;
    std::vector<Vec> hbar_;  // hbar_[k-1] = Σ_{j>=k} h^(j) at the last query
    Journal deltabar_;
};

struct VmConfig {
    AmvConfig amv;
    bool halt_on_violation = true;
    // exact rebuild after every n queries; it also happens regardless once t
    // outgrows the dyadic levels
    bool periodic_reinit = true;
};

// Maintains y ≈_eps x^(t) = x0 + Σ_k (G^(k) A h^(k) + δ^(k)) using dyadic
// levels; level l sums windows of 2^l updates.
class VectorMaintainer {
public:
    VectorMaintainer() = default;
    VectorMaintainer(std::shared_ptr<const Mat> A, const Vec& g, const Vec& x0, double eps,
                     const VmConfig& cfg = {});

    void scale(Index i, double u);
    const Vec& query(const Vec& h, const Vec& delta);
    double compute_exact(Index i) const;
    Vec compute_exact_all() const;

    const Vec& y() const { return y_; }
    const Vec& g() const { return g_; }
    long t() const { return t_; }
    int levels() const { return int(lv_.size()); }
    bool violation() const { return violations_ > 0; }
    long violations() const { return violations_; }
    long reinits() const { return reinits_; }
    long exact_marks() const { return exact_marks_; }
    double eps() const { return eps_; }

private:
    struct Level {
        AccumulatedProduct D;
        Vec z, z_prev, v, acc_delta, last_delta;
        std::vector<char> in_f;
        std::vector<Index> f;
    };
    void build(const Vec& x0);

    std::shared_ptr<const Mat> A_;
    Vec g_, x_init_, y_;
    double eps_ = 0.1;
    VmConfig cfg_;
    int log_n_ = 1;
    long t_ = 1;
    long since_init_ = 0;
    std::vector<Level> lv_;
    long violations_ = 0, reinits_ = 0, exact_marks_ = 0;
};

}  // namespace rlp
