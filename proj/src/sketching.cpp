#include "rlp/sketching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rlp/rng.hpp"

namespace rlp {

namespace {

double log_n(Index n) { return std::log(double(std::max<Index>(n, 2))); }

Index hh_width(double eps, Index n, double kappa) {
    double l = log_n(n);
    return std::max<Index>(1, Index(std::ceil(kappa * l * l / (eps * eps) - 1e-9)));
}

}  // namespace

HeavyHitterSketch::HeavyHitterSketch(double eps, Index n, std::uint64_t seed, double kappa)
    : eps_(eps), n_(n), seed_(seed) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("HeavyHitterSketch: eps must lie in (0,1]");
    if (n < 1) throw std::invalid_argument("HeavyHitterSketch: n must be positive");
    m_ = hh_width(eps, n, kappa);
    int c = std::max(1, int(std::ceil(log_n(n))));
    c = int(std::min<Index>(c, m_));
    if (c % 2 == 0) --c;
    c_ = std::max(c, 1);
    block_ = std::max<Index>(1, m_ / c_);
}

Index HeavyHitterSketch::bucket(int r, Index i) const {
    return Index(r) * block_ + Index(hash64(seed_, std::uint64_t(r), std::uint64_t(i)) % std::uint64_t(block_));
}

double HeavyHitterSketch::sign(int r, Index i) const {
    return (hash64(seed_ ^ 0xa5a5a5a5ULL, std::uint64_t(r), std::uint64_t(i)) >> 63) ? 1.0 : -1.0;
}

Vec HeavyHitterSketch::apply(const Vec& x) const {
    Vec y = Vec::Zero(m_);
    for (Index i = 0; i < n_; ++i) {
        if (x[i] == 0.0) continue;
        for (int r = 0; r < c_; ++r) y[bucket(r, i)] += sign(r, i) * x[i];
    }
    ops::add(double(n_) * c_);
    return y;
}

Mat HeavyHitterSketch::apply(const Mat& X) const {
    Mat Y = Mat::Zero(m_, X.cols());
    for (Index i = 0; i < n_; ++i)
        for (int r = 0; r < c_; ++r) Y.row(bucket(r, i)) += sign(r, i) * X.row(i);
    ops::add(double(n_) * c_ * X.cols());
    return Y;
}

Mat HeavyHitterSketch::dense() const {
    Mat S = Mat::Zero(m_, n_);
    for (Index i = 0; i < n_; ++i)
        for (int r = 0; r < c_; ++r) S(bucket(r, i), i) += sign(r, i);
    return S;
}

Vec HeavyHitterSketch::estimates(const Vec& y) const {
    Vec est(n_);
    std::vector<double> vals(c_);
    for (Index i = 0; i < n_; ++i) {
        for (int r = 0; r < c_; ++r) vals[r] = sign(r, i) * y[bucket(r, i)];
        std::nth_element(vals.begin(), vals.begin() + c_ / 2, vals.end());
        est[i] = vals[c_ / 2];
    }
    return est;
}

std::vector<Index> HeavyHitterSketch::decode(const Vec& y) const {
    Vec est = estimates(y);
    Index k = std::min<Index>(n_, Index(std::ceil(4.0 / (eps_ * eps_))));
    std::vector<Index> idx(n_);
    std::iota(idx.begin(), idx.end(), Index{0});
    auto cmp = [&](Index a, Index b) {
        double fa = std::abs(est[a]), fb = std::abs(est[b]);
        return fa != fb ? fa > fb : a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), cmp);
    std::vector<Index> out;
    for (Index t = 0; t < k; ++t)
        if (est[idx[t]] != 0.0) out.push_back(idx[t]);
    return out;
}

Index JlSketch::rows_for(double eps, Index n_whp, double c) {
    return std::max<Index>(1, Index(std::ceil(c * log_n(n_whp) / (eps * eps))));
}

JlSketch::JlSketch(double eps, Index dim, std::uint64_t seed, Index n_whp, double c) : dim_(dim) {
    if (!(eps > 0.0)) throw std::invalid_argument("JlSketch: eps must be positive");
    k_ = rows_for(eps, n_whp > 0 ? n_whp : dim, c);
    S_.resize(k_, dim_);
    double scale = 1.0 / std::sqrt(double(k_));
    for (Index j = 0; j < dim_; ++j)
        for (Index r = 0; r < k_; ++r)
            S_(r, j) = (hash64(seed, std::uint64_t(r), std::uint64_t(j)) >> 63) ? scale : -scale;
}

ApproxMatVec::ApproxMatVec(std::shared_ptr<const Mat> A, const Vec& g, const AmvConfig& cfg)
    : A_(std::move(A)), g_(g), n_(A_->rows()), d_(A_->cols()), cfg_(cfg) {
    if (g_.size() != n_) throw std::invalid_argument("ApproxMatVec: scaling length mismatch");
    double l2 = std::log2(double(std::max<Index>(n_, 2)));
    reps_ = cfg.reps > 0 ? cfg.reps : 5 * int(std::ceil(l2));
    levels_ = std::max(0, int(std::ceil(l2 / 2.0)) - 1);

    level_dense_.assign(levels_ + 1, 1);
    for (int j = 1; j <= levels_; ++j)
        level_dense_[j] = cfg.dense_cap && hh_width(std::ldexp(1.0, -j), n_, cfg.kappa) >= n_;

    Mat GA = g_.asDiagonal() * (*A_);
    sk_.assign(reps_, std::vector<HeavyHitterSketch>(levels_ + 1));
    M_.assign(reps_, std::vector<Mat>(levels_ + 1));
    for (int rep = 0; rep < reps_; ++rep)
        for (int j = 1; j <= levels_; ++j) {
            if (level_dense_[j]) continue;
            sk_[rep][j] = HeavyHitterSketch(std::ldexp(1.0, -j), n_,
                                            derive_seed(cfg.seed, std::uint64_t(rep) * 64 + j), cfg.kappa);
            M_[rep][j] = sk_[rep][j].apply(GA);
        }

    jl_dense_ = cfg.dense_cap && JlSketch::rows_for(cfg.jl_eps, n_, cfg.jl_c) >= n_;
    if (!jl_dense_) {
        jl_ = JlSketch(cfg.jl_eps, n_, derive_seed(cfg.seed, 0xfeed), n_, cfg.jl_c);
        J_ = jl_.matrix() * GA;
    }
}

void ApproxMatVec::scale(Index i, double u) {
    double du = u - g_[i];
    if (du == 0.0) return;
    auto row = A_->row(i);
    for (int rep = 0; rep < reps_; ++rep)
        for (int j = 1; j <= levels_; ++j) {
            if (level_dense_[j]) continue;
            const auto& sk = sk_[rep][j];
            for (int r = 0; r < sk.column_sparsity(); ++r)
                M_[rep][j].row(sk.bucket(r, i)) += (sk.sign(r, i) * du) * row;
        }
    if (!jl_dense_) J_ += (du * jl_.matrix().col(i)) * row;
    g_[i] = u;
}

Mat ApproxMatVec::recompute_sketched(int rep, int j) const {
    return sk_[rep][j].apply(Mat(g_.asDiagonal() * (*A_)));
}

double ApproxMatVec::norm_estimate(const Vec& h) const {
    if (jl_dense_) {
        ops::add(2.0 * double(n_) * d_);
        return (g_.asDiagonal() * ((*A_) * h)).norm();
    }
    return (J_ * h).norm();
}

Vec ApproxMatVec::query_exact(const Vec& h, double eps) const {
    Vec v = g_.asDiagonal() * ((*A_) * h);
    ops::add(2.0 * double(n_) * d_);
    for (Index i = 0; i < n_; ++i)
        if (std::abs(v[i]) < eps) v[i] = 0.0;
    return v;
}

std::vector<Index> ApproxMatVec::candidates(int j, const Vec& h) {
    std::vector<char> mark(n_, 0);
    std::vector<Index> out;
    for (int rep = 0; rep < reps_; ++rep) {
        Vec y = M_[rep][j] * h;
        for (Index i : sk_[rep][j].decode(y))
            if (!mark[i]) {
                mark[i] = 1;
                out.push_back(i);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Vec ApproxMatVec::query(const Vec& h, double eps) {
    ++stats_.queries;
    if (h.isZero(0.0)) return Vec::Zero(n_);
    if (!(eps > 0.0)) return query_exact(h, eps);
    double slack = jl_dense_ ? 1.0 : std::exp(cfg_.jl_eps);
    double r = norm_estimate(h) * slack;
    if (r < eps) {
        ++stats_.zero_exits;
        return Vec::Zero(n_);
    }
    int j = 1 + int(std::ceil(std::log2(r / eps)));
    if (j > levels_ || level_dense_[j]) {
        ++stats_.exact_fallbacks;
        return query_exact(h, eps);
    }
    Vec v = Vec::Zero(n_);
    auto cand = candidates(j, h);
    stats_.candidates += cand.size();
    for (Index i : cand) {
        double val = g_[i] * A_->row(i).dot(h);
        if (std::abs(val) >= eps) v[i] = val;
    }
    ops::add(2.0 * double(cand.size()) * d_);
    return v;
}

std::vector<Index> ApproxMatVec::heavy_rows(const Mat& H, double eps, const std::vector<char>& exclude) {
    std::vector<std::pair<Index, double>> saved;
    for (Index i = 0; i < n_; ++i)
        if (exclude[i] && g_[i] != 0.0) {
            saved.emplace_back(i, g_[i]);
            scale(i, 0.0);
        }
    std::vector<char> mark(n_, 0);
    for (Index l = 0; l < H.cols(); ++l) {
        Vec v = query(H.col(l), eps);
        for (Index i = 0; i < n_; ++i)
            if (v[i] != 0.0) mark[i] = 1;
    }
    for (auto& [i, u] : saved) scale(i, u);
    std::vector<Index> out;
    for (Index i = 0; i < n_; ++i)
        if (mark[i]) out.push_back(i);
    return out;
}

}  // namespace rlp
