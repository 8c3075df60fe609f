#include "rlp/inverse_maintenance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rlp/dense_linalg.hpp"

namespace rlp {

BucketCut bucket_cut(const Vec& abs_y, const Vec& mass, int log_d) {
    const Index N = abs_y.size();
    Vec prefix(N);
    double acc = 0.0;
    for (Index j = 0; j < N; ++j) prefix[j] = (acc += mass[j]);
    for (int k = 0;; ++k) {
        double target = std::ldexp(1.0, k);
        Index count = Index(std::lower_bound(prefix.data(), prefix.data() + N, target) - prefix.data()) + 1;
        if (count > N) return {k, N};
        if (abs_y[count - 1] <= 1.0 - double(k) / (2.0 * log_d)) return {k, count};
    }
}

InverseMaintainer::InverseMaintainer(std::shared_ptr<const Mat> A, const Vec& w, const Vec& tau, double eps,
                                     const InvConfig& cfg)
    : A_(std::move(A)), eps_(eps), cfg_(cfg), w_alg_(w), tau_alg_(tau), rng_(derive_seed(cfg.seed, 0x1a)) {
    const Index n = A_->rows(), d = A_->cols();
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("InverseMaintainer: eps must lie in (0,1)");
    if (w.size() != n || tau.size() != n) throw std::invalid_argument("InverseMaintainer: length mismatch");
    gamma_ = cfg_.c1 * std::log(double(std::max<Index>(n, 2)));
    log_d_ = std::max(1, int(std::ceil(std::log2(double(std::max<Index>(d, 2))))));
    for (int attempt = 0;; ++attempt) {
        v_.resize(n);
        double ps = gamma_ / (eps_ * eps_);
        for (Index i = 0; i < n; ++i) v_[i] = sample_weight(i, ps, rng_);
        try {
            refactor();
            break;
        } catch (const LinalgError&) {
            if (attempt >= 1) throw;
        }
    }
}

double InverseMaintainer::sample_weight(Index i, double p_scale, Rng& rng) const {
    double p = std::min(1.0, p_scale * tau_alg_[i]);
    return rng.bernoulli(p) ? w_alg_[i] / p : 0.0;
}

void InverseMaintainer::refactor() {
    const Mat& A = *A_;
    const Index d = A.cols();
    M_ = Mat::Zero(d, d);
    Index nnz = 0;
    for (Index i = 0; i < A.rows(); ++i)
        if (v_[i] != 0.0) {
            M_.selfadjointView<Eigen::Lower>().rankUpdate(A.row(i).transpose(), v_[i]);
            ++nnz;
        }
    M_ = M_.selfadjointView<Eigen::Lower>();
    ops::add(double(nnz) * d * d);
    psi_ = GramSolver(M_, 0.0).inverse();
    rank_since_refresh_ = 0;
    ++stats_.refactors;
}

void InverseMaintainer::apply_changes(const std::vector<std::pair<Index, double>>& dv) {
    const Index r = Index(dv.size());
    if (r == 0) return;
    const Mat& A = *A_;
    const Index d = A.cols();
    for (const auto& [i, dvi] : dv) v_[i] += dvi;
    if (double(rank_since_refresh_ + r) > cfg_.refactor_frac * double(d)) {
        refactor();
        return;
    }
    Mat U(r, d);
    Vec c(r);
    for (Index k = 0; k < r; ++k) {
        U.row(k) = A.row(dv[k].first);
        c[k] = dv[k].second;
    }
    Mat UP = U * psi_;  // r x d
    Mat S = Mat::Identity(r, r) + c.asDiagonal() * (UP * U.transpose());
    Eigen::PartialPivLU<Mat> lu(S);
    ops::add(4.0 * double(r) * d * d + double(r) * r * r);
    if (!(lu.rcond() > 1e-12)) {
        refactor();
        return;
    }
    Mat X = lu.solve(Mat(c.asDiagonal() * UP));
    psi_.noalias() -= UP.transpose() * X;
    psi_ = 0.5 * (psi_ + psi_.transpose()).eval();
    M_.noalias() += U.transpose() * c.asDiagonal() * U;
    rank_since_refresh_ += r;
    ++stats_.woodbury;
}

const Vec& InverseMaintainer::update(const Vec& w, const Vec& tau) {
    const Index n = A_->rows();
    ++stats_.updates;
    Vec y(2 * n);
    for (Index i = 0; i < n; ++i) {
        y[i] = (8.0 / eps_) * (w[i] / w_alg_[i] - 1.0);
        y[i + n] = 2.0 * (tau[i] / tau_alg_[i] - 1.0);
    }
    std::vector<Index> pi(2 * n);
    std::iota(pi.begin(), pi.end(), Index(0));
    std::stable_sort(pi.begin(), pi.end(), [&](Index a, Index b) { return std::abs(y[a]) > std::abs(y[b]); });
    Vec abs_sorted(2 * n), mass(2 * n);
    for (Index j = 0; j < 2 * n; ++j) {
        abs_sorted[j] = std::abs(y[pi[j]]);
        mass[j] = tau[pi[j] % n];
    }
    BucketCut cut = bucket_cut(abs_sorted, mass, log_d_);
    if (Index(stats_.cut_hist.size()) <= cut.k) stats_.cut_hist.resize(cut.k + 1, 0);
    ++stats_.cut_hist[cut.k];

    std::vector<char> seen(n, 0);
    std::vector<std::pair<Index, double>> dv;
    const double ps = gamma_ / (eps_ * eps_);
    for (Index j = 0; j < cut.count; ++j) {
        Index i = pi[j] % n;
        if (seen[i]) continue;
        seen[i] = 1;
        if (w[i] == w_alg_[i] && tau[i] == tau_alg_[i]) continue;
        w_alg_[i] = w[i];
        tau_alg_[i] = tau[i];
        double nv = sample_weight(i, ps, rng_);
        ++stats_.resampled;
        if (nv != v_[i]) dv.emplace_back(i, nv - v_[i]);
    }
    if (!dv.empty()) {
        int l = int(std::floor(std::log2(double(dv.size()))));
        if (int(stats_.rank_hist.size()) <= l) stats_.rank_hist.resize(l + 1, 0);
        ++stats_.rank_hist[l];
    }
    apply_changes(dv);
    return w_alg_;
}

Vec InverseMaintainer::sample_u(const Vec& wbar, double delta, Rng& rng) const {
    const Index n = A_->rows();
    Vec u(n);
    double ps = gamma_ / (delta * delta);
    for (Index i = 0; i < n; ++i) {
        double p = std::min(1.0, ps * tau_alg_[i]);
        u[i] = rng.bernoulli(p) ? wbar[i] / p : 0.0;
    }
    return u;
}

Vec InverseMaintainer::draw_u(const Vec& wbar, double delta, std::uint64_t seed) const {
    Rng rng(seed);
    return sample_u(wbar, delta, rng);
}

Vec InverseMaintainer::gram_apply(const Vec& u, const Vec& y) const {
    const Mat& A = *A_;
    ops::add(4.0 * double(A.rows()) * A.cols());
    return A.transpose() * (u.asDiagonal() * (A * y));
}

namespace {

struct Masked {
    Vec u, c2;
};

Masked draw_mask(const Mat& A, Vec u, Rng& rng) {
    Vec eta(A.rows());
    for (Index i = 0; i < A.rows(); ++i) eta[i] = u[i] != 0.0 ? std::sqrt(u[i]) * rng.normal() : 0.0;
    return {std::move(u), A.transpose() * eta};
}

}  // namespace

Vec InverseMaintainer::secure_solve(const Vec& b, const Vec& wbar, double delta) {
    return secure_solve(b, wbar, delta, rng_.next());
}

Vec InverseMaintainer::secure_solve(const Vec& b, const Vec& wbar, double delta, std::uint64_t seed) {
    const Mat& A = *A_;
    const Index n = A.rows(), d = A.cols();
    Rng rng(seed);
    Masked m = draw_mask(A, sample_u(wbar, delta, rng), rng);
    int rounds = int(std::ceil(cfg_.rich_c * std::log(double(n) / delta)));
    Mat C(d, 2), Y = Mat::Zero(d, 2);
    C.col(0) = b;
    C.col(1) = m.c2;
    for (int k = 0; k < rounds; ++k) {
        Mat R = C - A.transpose() * (m.u.asDiagonal() * (A * Y));
        Y.noalias() += 0.1 * (psi_ * R);
    }
    ops::add(double(rounds) * (8.0 * double(n) * d + 4.0 * double(d) * d));
    double energy = std::sqrt(std::max(0.0, Y.col(0).dot(gram_apply(m.u, Y.col(0)))));
    double alpha = cfg_.c3 * std::sqrt(delta / double(d)) * energy;
    return Y.col(0) + alpha * Y.col(1);
}

Vec InverseMaintainer::ideal_solve(const Vec& b, const Vec& wbar, double delta) {
    return ideal_solve(b, wbar, delta, rng_.next());
}

Vec InverseMaintainer::ideal_solve(const Vec& b, const Vec& wbar, double delta, std::uint64_t seed) {
    const Mat& A = *A_;
    Rng rng(seed);
    Masked m = draw_mask(A, sample_u(wbar, delta, rng), rng);
    GramSolver gs(gram(A, m.u), 0.0);
    Vec y1 = gs.solve(b);
    double energy = std::sqrt(std::max(0.0, y1.dot(b)));
    double alpha = cfg_.c3 * std::sqrt(delta / double(A.cols())) * energy;
    return gs.solve(Vec(b + alpha * m.c2));
}

Vec InverseMaintainer::solve(const Vec& b, const Vec& wbar, double delta) {
    ++stats_.solves;
    // Ψ stands in for AᵀW̄A in the divergence check; W̄ ≈_1 W̃ costs a factor e
    auto norm_m = [&](const Vec& z) { return std::sqrt(std::max(0.0, z.dot(M_ * z))); };
    auto norm_minv = [&](const Vec& z) { return std::sqrt(std::max(0.0, z.dot(psi_ * z))); };
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        Vec y0 = secure_solve(b, wbar, delta / 1048576.0, rng_.next());
        const double bound =
            std::exp(1.0) * (30.0 * norm_minv(b - gram_apply(wbar, y0)) + 30.0 * delta * norm_minv(b));
        int X = rng_.geometric_half();
        Vec y = y0;
        bool ok = true;
        for (int k = 1; k <= X; ++k) {
            Vec u = sample_u(wbar, delta, rng_);
            Vec r = b - gram_apply(u, y);
            y = 2.0 * (y - 0.5 * y0 + secure_solve(r, wbar, 0.125, rng_.next()));
            if (!(norm_m(y - y0) <= bound)) {
                ok = false;
                break;
            }
        }
        if (ok) return y;
        ++stats_.retries;
    }
    throw ConvergenceError("InverseMaintainer::solve: rollout kept diverging");
}

double InverseMaintainer::projection_movement(const Mat& A, const Vec& w0, const Mat& psi0, const Vec& w1,
                                              const Mat& psi1) {
    Mat K00 = gram(A, w0), K11 = gram(A, w1);
    Mat K01 = gram(A, Vec(w0.cwiseProduct(w1).cwiseSqrt()));
    Mat P11 = psi1 * K11, P00 = psi0 * K00;
    double t11 = (P11 * P11).trace();
    double t00 = (P00 * P00).trace();
    double t01 = (psi1 * K01 * psi0 * K01).trace();
    return std::sqrt(std::max(0.0, t11 + t00 - 2.0 * t01));
}

}  // namespace rlp
