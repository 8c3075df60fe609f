#include "rlp/leverage_maintenance.hpp"

#include <algorithm>
#include <cmath>

#include "rlp/rng.hpp"

namespace rlp {

namespace {

double unit_from_hash(std::uint64_t h) { return double(h >> 11) * 0x1.0p-53; }

}  // namespace

LeverageMaintainer::LeverageMaintainer(std::shared_ptr<const Mat> A, const Vec& g, double eps,
                                       const LsConfig& cfg)
    : A_(std::move(A)), g_(g), eps_(eps), cfg_(cfg) {
    if (!(eps > 0.0 && eps <= 0.25)) throw std::invalid_argument("LeverageMaintainer: eps must lie in (0, 1/4]");
    const Index n = A_->rows();
    if (g_.size() != n) throw std::invalid_argument("LeverageMaintainer: scaling length mismatch");
    D_ = ApproxMatVec(A_, g_, cfg_.amv);
    double l2 = std::log2(double(std::max<Index>(n, 2)));
    logn_ = std::max(1, int(std::ceil(l2)));
    top_ = int(std::floor(l2));
    Index b = 8 * Index(std::ceil(std::log(double(std::max<Index>(n, 2)))));
    R_.resize(n, b);
    const double r = 1.0 / std::sqrt(double(b));
    const std::uint64_t rs = derive_seed(cfg_.seed, 0x52);
    for (Index c = 0; c < b; ++c)
        for (Index i = 0; i < n; ++i) R_(i, c) = (hash64(rs, std::uint64_t(i), std::uint64_t(c)) >> 63) ? r : -r;
    B_ = B_direct();
    tau_ = Vec::Zero(n);
    last_change_.assign(n, -1);
}

Mat LeverageMaintainer::B_direct() const { return A_->transpose() * (g_.asDiagonal() * R_); }

void LeverageMaintainer::scale(Index j, double u) {
    double du = u - g_[j];
    if (du == 0.0) return;
    B_ += (du * A_->row(j).transpose()) * R_.row(j);
    ops::add(2.0 * double(B_.size()));
    D_.scale(j, u);
    g_[j] = u;
    last_change_[j] = t_;
}

Vec LeverageMaintainer::estimate(const std::vector<Index>& J, const State& s, double delta,
                                 std::uint64_t call_seed) {
    ++stats_.estimates;
    const Mat& A = *A_;
    const Index n = A.rows(), d = A.cols();
    const double shift = double(d) / double(n);
    const double ln_n = std::log(double(std::max<Index>(n, 2)));
    Index k = JlSketch::rows_for(delta / 8.0, n, cfg_.jl_c);
    bool dense_jl = cfg_.dense_cap && k >= n;

    // leverage-score row sampling, skipped on the first step
    Vec gt = s.g;
    bool sampled = false;
    if (!s.first) {
        const double c = cfg_.sample_c * ln_n / (delta * delta);
        for (Index i = 0; i < n; ++i) {
            double p = std::min(1.0, c * s.tau[i]);
            if (p >= 1.0) continue;
            sampled = true;
            gt[i] = unit_from_hash(hash64(call_seed, std::uint64_t(i), 7)) < p ? s.g[i] / std::sqrt(p) : 0.0;
        }
    }

    Vec v(Index(J.size()));
    if (dense_jl) {
        const Mat* M = nullptr;
        Mat local;
        if (!sampled && s.has_m) {
            M = &s.M;
        } else {
            Mat GA = gt.asDiagonal() * A;
            Mat H = GA.transpose() * GA;
            local = s.psi_safe * H * s.psi_safe;
            ops::add(2.0 * double(n) * d * d + 4.0 * double(d) * d * d);
            if (!sampled) {
                s.M = std::move(local);
                s.has_m = true;
                M = &s.M;
            } else {
                M = &local;
            }
        }
        for (Index q = 0; q < v.size(); ++q) {
            Index j = J[q];
            auto a = A.row(j);
            v[q] = s.g[j] * s.g[j] * a.dot(*M * a.transpose()) + shift;
        }
        ops::add(2.0 * double(J.size()) * d * d);
        return v;
    }

    // fresh JL map R̃ (n x k), only the rows kept by the sampling are needed
    Mat C = Mat::Zero(d, k);
    const double r = 1.0 / std::sqrt(double(k));
    Vec row(k);
    for (Index i = 0; i < n; ++i) {
        if (gt[i] == 0.0) continue;
        for (Index c = 0; c < k; ++c)
            row[c] = (hash64(call_seed, std::uint64_t(i), std::uint64_t(c) + 11) >> 63) ? r : -r;
        C.noalias() += (gt[i] * A.row(i).transpose()) * row.transpose();
        ops::add(2.0 * double(d) * k);
    }
    Mat W = s.psi_safe * C;
    ops::add(2.0 * double(d) * d * k);
    for (Index q = 0; q < v.size(); ++q) {
        Index j = J[q];
        v[q] = s.g[j] * s.g[j] * (A.row(j) * W).squaredNorm() + shift;
    }
    ops::add(2.0 * double(J.size()) * d * k);
    return v;
}

std::vector<Index> LeverageMaintainer::find_indices(const State& now) {
    const Index n = A_->rows(), d = A_->cols();
    const double L = double(logn_);
    const double thr = (eps_ / (48.0 * L)) * std::sqrt(double(d) / (double(n) * double(R_.cols())));
    std::vector<char> in_j(n, 0);
    for (int i = 0; i <= top_; ++i) {
        const long w = 1L << i;
        if (t_ % w != 0) continue;
        const State& old = *hist_[i];
        std::vector<char> f(n, 0);
        for (Index j = 0; j < n; ++j) f[j] = last_change_[j] > t_ - w;

        std::vector<Index> Ji;
        if (cfg_.all_candidates) {
            Ji.resize(n);
            for (Index j = 0; j < n; ++j) Ji[j] = j;
        } else {
            Mat H = now.psi * now.B - old.psi * old.B;
            ops::add(4.0 * double(d) * d * H.cols());
            std::vector<char> mark = f;
            for (Index j : D_.heavy_rows(H, thr, f)) mark[j] = 1;
            for (Index j = 0; j < n; ++j)
                if (mark[j]) Ji.push_back(j);
        }
        stats_.candidates += long(Ji.size());
        if (Ji.empty()) continue;

        std::uint64_t q = std::uint64_t(queries_);
        Vec v = estimate(Ji, now, eps_ / (12.0 * L), hash64(cfg_.seed, q, 2 * std::uint64_t(i) + 1));
        Vec vo = estimate(Ji, old, eps_ / (12.0 * L), hash64(cfg_.seed, q, 2 * std::uint64_t(i) + 2));
        for (std::size_t k = 0; k < Ji.size(); ++k)
            if (std::abs(std::log(v[Index(k)] / vo[Index(k)])) > eps_ / (3.0 * L)) in_j[Ji[k]] = 1;
    }
    std::vector<Index> J;
    for (Index j = 0; j < n; ++j)
        if (in_j[j]) J.push_back(j);
    return J;
}

const Vec& LeverageMaintainer::query(const Mat& psi, const Mat& psi_safe) {
    const Index n = A_->rows();
    ++queries_;
    auto now = std::make_shared<State>();
    now->psi = psi;
    now->psi_safe = psi_safe;
    now->B = B_;
    now->g = g_;
    now->tau = tau_;

    if (!started_ || t_ % (1L << top_) == 0) {
        now->first = true;
        std::vector<Index> all(n);
        for (Index j = 0; j < n; ++j) all[j] = j;
        tau_ = estimate(all, *now, eps_, hash64(cfg_.seed, std::uint64_t(queries_), 0));
        now->tau = tau_;
        hist_.assign(top_ + 1, now);
        t_ = 1;
        started_ = true;
        std::fill(last_change_.begin(), last_change_.end(), -1L);
        ++stats_.full_recomputes;
        return tau_;
    }

    std::vector<Index> J = find_indices(*now);
    if (!J.empty()) {
        Vec v = estimate(J, *now, eps_, hash64(cfg_.seed, std::uint64_t(queries_), 1ULL << 20));
        for (std::size_t k = 0; k < J.size(); ++k) tau_[J[k]] = v[Index(k)];
    }
    stats_.accepted += long(J.size());
    now->tau = tau_;
    for (int i = 0; i <= top_; ++i)
        if (t_ % (1L << i) == 0) hist_[i] = now;
    ++t_;
    return tau_;
}

}  // namespace rlp
