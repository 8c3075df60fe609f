#include "rlp/lewis.hpp"

#include <cmath>
#include <string>

#include "rlp/dense_linalg.hpp"
#include "rlp/sketching.hpp"

namespace rlp {

namespace {

Vec sketched_leverage(const Mat& A, const Vec& d, double jl_eps, std::uint64_t seed) {
    // σ_i = ‖e_iᵀ DA R⁻¹‖², with the d-dimensional rows compressed by a JL map
    Mat B = d.asDiagonal() * A;
    Eigen::HouseholderQR<Mat> qr(B);
    Mat R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
    JlSketch jl(jl_eps, A.cols(), seed, A.rows());
    Mat Z = R.triangularView<Eigen::Upper>().solve(Mat(jl.matrix().transpose()));
    return (B * Z).rowwise().squaredNorm();
}

}  // namespace

Vec lewis_map(const Mat& A, const Vec& w, const LewisParams& params) {
    if (w.size() != A.rows()) throw LinalgError("lewis_map: length mismatch");
    if ((w.array() <= 0.0).any()) throw LinalgError("lewis_map: weights must be positive");
    const double p = params.p;
    Vec d = w.array().pow(0.5 - 1.0 / p);
    Vec sigma = params.jl_eps > 0.0 ? sketched_leverage(A, d, params.jl_eps, params.seed)
                                    : ScaledQr(A, d, 0.0).leverage();
    Vec inner = w.array().pow(2.0 / p - 1.0) * (sigma.array() + params.eta);
    return inner.array().pow(p / 2.0);
}

LewisResult lewis_weights(const Mat& A, const LewisParams& params) {
    if (!(params.p > 0.0 && params.p < 4.0)) throw std::invalid_argument("lewis_weights: p must lie in (0,4)");
    if (!(params.eta > 0.0)) throw std::invalid_argument("lewis_weights: eta must be positive");
    LewisResult res;
    res.w = Vec::Constant(A.rows(), params.eta);
    LewisParams step = params;
    for (int k = 0; k <= params.max_iters; ++k) {
        step.seed = params.seed + std::uint64_t(k);
        Vec t = lewis_map(A, res.w, step);
        res.residual = log_gap(res.w, t);
        if (res.residual <= params.eps) return res;
        if (k == params.max_iters) break;
        res.w = t;
        ++res.iterations;
    }
    throw ConvergenceError("lewis_weights: no convergence after " + std::to_string(params.max_iters) +
                           " iterations");
}

}  // namespace rlp
