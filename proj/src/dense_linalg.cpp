#include "rlp/dense_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rlp {

ScaledQr::ScaledQr(const Mat& A, const Vec& d, double rank_tol) : n_(A.rows()), d_(A.cols()) {
    if (d.size() != n_) throw LinalgError("ScaledQr: scaling length mismatch");
    if (n_ < d_) throw LinalgError("ScaledQr: matrix must be tall");

    Vec norms(n_);
    for (Index i = 0; i < n_; ++i) norms[i] = std::abs(d[i]) * A.row(i).norm();
    perm_.resize(n_);
    std::iota(perm_.begin(), perm_.end(), Index{0});
    std::stable_sort(perm_.begin(), perm_.end(),
                     [&](Index a, Index b) { return norms[a] > norms[b]; });

    Mat B(n_, d_);
    for (Index k = 0; k < n_; ++k) B.row(k) = d[perm_[k]] * A.row(perm_[k]);

    Eigen::HouseholderQR<Mat> qr(B);
    r_ = qr.matrixQR().topRows(d_).triangularView<Eigen::Upper>();
    double rmax = r_.diagonal().cwiseAbs().maxCoeff();
    double rmin = r_.diagonal().cwiseAbs().minCoeff();
    if (!(rmax > 0.0) || !std::isfinite(rmax) || rmin <= rank_tol * rmax)
        throw LinalgError("ScaledQr: matrix is numerically rank deficient");
    q_ = qr.householderQ() * Mat::Identity(n_, d_);
    ops::add(4.0 * double(n_) * double(d_) * double(d_));
}

Vec ScaledQr::leverage() const {
    Vec out(n_);
    for (Index k = 0; k < n_; ++k) out[perm_[k]] = q_.row(k).squaredNorm();
    ops::add(2.0 * double(n_) * double(d_));
    return out;
}

Vec ScaledQr::project(const Vec& u) const {
    Vec up(n_);
    for (Index k = 0; k < n_; ++k) up[k] = u[perm_[k]];
    Vec c = q_.transpose() * up;
    Vec pp = q_ * c;
    Vec out(n_);
    for (Index k = 0; k < n_; ++k) out[perm_[k]] = pp[k];
    ops::add(4.0 * double(n_) * double(d_));
    return out;
}

Vec ScaledQr::apply_rinv_t(const Vec& rhs) const {
    return r_.transpose().triangularView<Eigen::Lower>().solve(rhs);
}

Vec ScaledQr::solve_gram(const Vec& rhs) const {
    Vec y = apply_rinv_t(rhs);
    return r_.triangularView<Eigen::Upper>().solve(y);
}

double ScaledQr::inv_norm2(const Vec& rhs) const { return apply_rinv_t(rhs).squaredNorm(); }

Vec leverage_scores(const Mat& A) { return ScaledQr(A, Vec::Ones(A.rows())).leverage(); }

Vec regularized_tau(const Mat& A) {
    Vec sigma = leverage_scores(A);
    return sigma.array() + double(A.cols()) / double(A.rows());
}

Vec weighted_tau(const Mat& A, const Vec& x, const Vec& s, double alpha) {
    if (x.size() != A.rows() || s.size() != A.rows())
        throw LinalgError("weighted_tau: length mismatch");
    if ((x.array() <= 0.0).any() || (s.array() <= 0.0).any())
        throw LinalgError("weighted_tau: weights must be positive");
    // s^{-1/2-α} x^{1/2-α}, computed in log space to survive extreme ratios
    Vec d = ((0.5 - alpha) * x.array().log() - (0.5 + alpha) * s.array().log()).exp();
    Vec sigma = ScaledQr(A, d, 0.0).leverage();
    return sigma.array() + double(A.cols()) / double(A.rows());
}

GramSolver::GramSolver(const Mat& M, double pivot_tol) {
    llt_.compute(M);
    ops::add(double(M.rows()) * M.rows() * M.rows() / 3.0);
    if (llt_.info() == Eigen::Success) {
        Vec diag = Mat(llt_.matrixL()).diagonal().array().square();
        if (diag.minCoeff() > pivot_tol * diag.maxCoeff()) return;
    }
    fallback_ = true;
    ldlt_.compute(M);
    if (ldlt_.info() != Eigen::Success) throw LinalgError("GramSolver: factorization failed");
    Vec dv = ldlt_.vectorD();
    double dmax = dv.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || dv.minCoeff() <= pivot_tol * dmax)
        throw LinalgError("GramSolver: singular or indefinite matrix");
}

Vec GramSolver::solve(const Vec& rhs) const {
    ops::add(2.0 * double(rhs.size()) * rhs.size());
    return fallback_ ? Vec(ldlt_.solve(rhs)) : Vec(llt_.solve(rhs));
}

Mat GramSolver::solve(const Mat& rhs) const {
    ops::add(2.0 * double(rhs.rows()) * rhs.rows() * rhs.cols());
    return fallback_ ? Mat(ldlt_.solve(rhs)) : Mat(llt_.solve(rhs));
}

Mat GramSolver::inverse() const {
    Index d = fallback_ ? ldlt_.rows() : llt_.rows();
    return solve(Mat(Mat::Identity(d, d)));
}

Mat gram(const Mat& A, const Vec& w) {
    ops::add(double(A.rows()) * A.cols() * A.cols());
    return A.transpose() * w.asDiagonal() * A;
}

Vec solve_normal(const Mat& A, const Vec& w, const Vec& rhs) {
    if ((w.array() <= 0.0).any()) throw LinalgError("solve_normal: weights must be positive");
    if (rhs.size() != A.cols()) throw LinalgError("solve_normal: rhs length mismatch");
    return GramSolver(gram(A, w)).solve(rhs);
}

double mixed_norm(const Vec& z, const Vec& tau, double c_norm) {
    if (z.size() != tau.size()) throw LinalgError("mixed_norm: length mismatch");
    if (z.size() == 0) return 0.0;
    return z.cwiseAbs().maxCoeff() + c_norm * std::sqrt((tau.array() * z.array().square()).sum());
}

double spectral_gap(const Mat& M1, const Mat& M2) {
    if (M1.rows() != M2.rows() || M1.cols() != M2.cols())
        throw LinalgError("spectral_gap: dimension mismatch");
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(M1, M2, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw LinalgError("spectral_gap: reference matrix not PD");
    const Vec& ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0) throw LinalgError("spectral_gap: matrix not PD");
    return std::max(std::abs(std::log(ev.minCoeff())), std::abs(std::log(ev.maxCoeff())));
}

bool spectral_approx_check(const Mat& M1, const Mat& M2, double eps, double slack) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(M1, M2, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw LinalgError("spectral_approx_check: reference not PD");
    const Vec& ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0) throw LinalgError("spectral_approx_check: matrix not PD");
    return ev.minCoeff() >= std::exp(-eps) - slack && ev.maxCoeff() <= std::exp(eps) + slack;
}

Mat lambda_matrix(const Mat& A) {
    GramSolver gs(gram(A, Vec::Ones(A.rows())));
    Mat P = A * gs.solve(Mat(A.transpose()));
    Mat L = -P.cwiseProduct(P);
    L.diagonal() += P.diagonal();
    return L;
}

}  // namespace rlp
