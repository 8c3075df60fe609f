#include "rlp/feasibility.hpp"

#include <algorithm>
#include <cmath>

#include "rlp/dense_linalg.hpp"

namespace rlp {

namespace {

Vec sqrt_ratio(const Vec& x, const Vec& s) { return (0.5 * (x.array().log() - s.array().log())).exp(); }

// Leverage-score row sample: weight 1/p_i on kept rows, 0 elsewhere.
Vec row_sample(const Vec& tau_bar, double scale, Rng& rng) {
    Vec keep(tau_bar.size());
    for (Index i = 0; i < tau_bar.size(); ++i) {
        double p = std::min(1.0, scale * tau_bar[i]);
        keep[i] = rng.bernoulli(p) ? 1.0 / p : 0.0;
    }
    return keep;
}

Mat weighted_gram(const Mat& A, const Vec& coef) {
    const Index d = A.cols();
    Mat M = Mat::Zero(d, d);
    Index nnz = 0;
    for (Index i = 0; i < A.rows(); ++i)
        if (coef[i] != 0.0) {
            M.selfadjointView<Eigen::Lower>().rankUpdate(A.row(i).transpose(), coef[i]);
            ++nnz;
        }
    ops::add(double(nnz) * d * d);
    return M.selfadjointView<Eigen::Lower>();
}

}  // namespace

WeightedSolve exact_weighted_solve(std::shared_ptr<const Mat> A) {
    return [A](const Vec& rhs, const Vec& w) { return ScaledQr(*A, w.cwiseSqrt(), 0.0).solve_gram(rhs); };
}

double phi_b(const Mat& A, const Vec& b, const Vec& x, const Vec& x_ref, const Vec& s_ref, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("phi_b: mu must be positive");
    Vec r = A.transpose() * x - b;
    return ScaledQr(A, sqrt_ratio(x_ref, s_ref), 0.0).inv_norm2(r) / mu;
}

Vec exact_correction(const Mat& A, const Vec& b, const Vec& x_hat, const Vec& x, const Vec& s,
                     const WeightedSolve& solve) {
    Vec w = x.cwiseQuotient(s);
    Vec lam = solve(Vec(b - A.transpose() * x_hat), w);
    ops::add(4.0 * double(A.rows()) * A.cols());
    return x_hat + w.cwiseProduct(A * lam);
}

Vec sample_delta_b(const Mat& A, const Vec& b, const Vec& x, const Vec& tau_bar, double eps_b, Rng& rng) {
    if (!(eps_b > 0.0)) throw std::invalid_argument("sample_delta_b: eps_b must be positive");
    Vec keep = row_sample(tau_bar, 1.0 / eps_b, rng);
    Vec out = b;
    for (Index i = 0; i < A.rows(); ++i)
        if (keep[i] != 0.0) out.noalias() -= (x[i] * keep[i]) * A.row(i).transpose();
    ops::add(2.0 * double(A.rows()) * A.cols());
    return out;
}

H2H4 make_h2_h4(const Mat& A, const Vec& x, const Vec& s, const Vec& xp, const Vec& sp, const Vec& tau_bar,
                const FeasConfig& cfg, Rng& rng) {
    const Index n = A.rows(), d = A.cols();
    const double scale = cfg.sample_c * std::log(double(std::max<Index>(n, 2))) / (cfg.eps_h * cfg.eps_h);
    Vec dn = sqrt_ratio(x, s), dp = sqrt_ratio(xp, sp);
    H2H4 out;

    Vec keep = row_sample(tau_bar, scale, rng);
    out.h2 = weighted_gram(A, Vec(keep.cwiseProduct(dn.cwiseProduct(dn - dp))));

    Vec delta = dn.cwiseProduct(dn) - dp.cwiseProduct(dp);
    out.terms = rng.geometric_half();
    out.h4 = Mat::Zero(d, d);
    if (out.terms == 0 || delta.cwiseAbs().maxCoeff() == 0.0) return out;

    Mat Qp = weighted_gram(A, Vec(dp.cwiseProduct(dp)));
    Mat M = GramSolver(Qp, 0.0).inverse();
    Mat P = Mat::Identity(d, d), S = Mat::Zero(d, d);
    for (int k = 1; k <= out.terms; ++k) {
        Mat N = weighted_gram(A, Vec(row_sample(tau_bar, scale, rng).cwiseProduct(delta)));
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(N, Qp, Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues().cwiseAbs().maxCoeff() < 0.5))
            throw ConvergenceError("make_h2_h4: sampled perturbation too large for the series");
        P = (-2.0 * P * N * M).eval();
        S += P;
        ops::add(4.0 * double(d) * d * d);
    }
    out.h4 = M * S;
    return out;
}

FeasibilityMaintainer::FeasibilityMaintainer(std::shared_ptr<const Mat> A, const Vec& b, const FeasConfig& cfg,
                                             WeightedSolve solve)
    : A_(std::move(A)), b_(b), cfg_(cfg), solve_(std::move(solve)), rng_(derive_seed(cfg.seed, 0xfe)) {
    if (b_.size() != A_->cols()) throw std::invalid_argument("FeasibilityMaintainer: b has the wrong length");
    if (cfg_.period > 0) {
        period_ = cfg_.period;
    } else {
        double ln = std::log(double(std::max<Index>(A_->rows(), 2)));
        period_ = std::max(1, int(std::floor(std::sqrt(double(A_->cols())) / std::pow(ln, 6.0))));
    }
}

Vec FeasibilityMaintainer::maintain_infeasibility(const Vec& x, const Vec& s, const Vec& tau_bar) {
    const Mat& A = *A_;
    ++calls_;
    if (!has_prev_) {
        xp_ = x;
        sp_ = s;
        has_prev_ = true;
        return Vec::Zero(A.cols());
    }
    H2H4 h = make_h2_h4(A, x, s, xp_, sp_, tau_bar, cfg_, rng_);
    Vec lam = Vec::Zero(A.cols());
    if (!h.h2.isZero(0.0)) {
        Vec db1 = sample_delta_b(A, b_, x, tau_bar, cfg_.eps_b, rng_);
        Vec u = solve_(db1, Vec(xp_.cwiseQuotient(sp_)));
        lam += solve_(Vec(h.h2 * u), Vec(x.cwiseQuotient(s)));
    }
    if (!h.h4.isZero(0.0)) {
        Vec db2 = sample_delta_b(A, b_, x, tau_bar, cfg_.eps_b, rng_);
        lam += h.h4 * db2;
    }
    xp_ = x;
    sp_ = s;
    return lam;
}

Vec FeasibilityMaintainer::maintain_feasibility(const Vec& x, const Vec& s, const Vec& tau_bar) {
    Vec lam = maintain_infeasibility(x, s, tau_bar);
    if (++since_ >= period_) {
        // correct the residual left after the move above
        const Mat& A = *A_;
        Vec w = x.cwiseQuotient(s);
        Vec xm = x + w.cwiseProduct(A * lam);
        lam += solve_(Vec(b_ - A.transpose() * xm), w);
        ops::add(6.0 * double(A.rows()) * A.cols());
        since_ = 0;
        ++corrections_;
    }
    return lam;
}

}  // namespace rlp
