#include "rlp/modified_lp.hpp"

#include <cmath>

namespace rlp {

bool needs_padding(const Mat& A, const Vec& b, double R) {
    Vec gap = A.transpose() * Vec::Ones(A.rows()) - b / R;
    return gap.cwiseAbs().maxCoeff() < 0.5 * (A.norm() + b.norm() / R);
}

ModifiedLp build_modified_lp(const Mat& A0, const Vec& b0, const Vec& c0, double delta, double R, double L) {
    const Index n0 = A0.rows(), d0 = A0.cols();
    if (b0.size() != d0 || c0.size() != n0) throw std::invalid_argument("build_modified_lp: dimension mismatch");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("build_modified_lp: delta must lie in (0,1]");
    if (!(R > 0.0 && L > 0.0)) throw std::invalid_argument("build_modified_lp: R and L must be positive");
    if (c0.norm() > L * (1.0 + 1e-12)) throw std::invalid_argument("build_modified_lp: ‖c‖ exceeds L");
    for (Index i = 0; i < n0; ++i)
        if (A0.row(i).cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("build_modified_lp: A has a zero row");
    Eigen::ColPivHouseholderQR<Mat> rq(A0);
    if (rq.rank() < d0) throw std::invalid_argument("build_modified_lp: A is rank deficient");

    ModifiedLp m;
    m.R = R;
    m.L = L;
    m.delta = delta;
    m.n_orig = n0;
    m.d_orig = d0;

    Mat A = A0;
    Vec b = b0, c = c0;
    if (needs_padding(A0, b0, R)) {
        // extra variable pinned to zero by its own constraint
        const double k = A0.norm() + b0.norm() / R;
        A = Mat::Zero(n0 + 1, d0 + 1);
        A.topLeftCorner(n0, d0) = A0;
        A(n0, d0) = k;
        b = Vec::Zero(d0 + 1);
        b.head(d0) = b0;
        c = Vec::Zero(n0 + 1);
        c.head(n0) = c0;
        m.padded = true;
    }
    const Index n = A.rows(), d = A.cols();
    const double fro = A.norm();
    m.norm_f = fro;

    m.A = Mat::Zero(n + 2, d + 1);
    m.A.topLeftCorner(n, d) = A;
    m.A.block(0, d, n, 1).setConstant(fro);
    m.A(n, d) = fro;
    m.A.row(n + 1).head(d) = (b / R - A.transpose() * Vec::Ones(n)).transpose();

    m.b = Vec(d + 1);
    m.b.head(d) = b / R;
    m.b[d] = double(n + 1) * fro;

    m.c = Vec::Zero(n + 2);
    m.c.head(n) = (delta / L) * c;
    m.c[n + 1] = 1.0;

    m.x0 = Vec::Ones(n + 2);
    m.y0 = Vec::Zero(d + 1);
    m.y0[d] = -1.0 / fro;
    m.s0 = Vec::Ones(n + 2);
    m.s0.head(n).array() += (delta / L) * c.array();

    double scale = std::max(1.0, m.b.cwiseAbs().maxCoeff());
    if ((m.A.transpose() * m.x0 - m.b).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw InvariantViolation("build_modified_lp: all-ones point is not primal feasible");
    if ((m.A * m.y0 + m.s0 - m.c).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, fro))
        throw InvariantViolation("build_modified_lp: initial dual point is not feasible");
    if (m.s0.minCoeff() < 0.0) throw InvariantViolation("build_modified_lp: negative initial slack");
    return m;
}

Vec extract_solution(const ModifiedLp& m, const Vec& xbar) {
    if (xbar.size() != m.A.rows()) throw std::invalid_argument("extract_solution: wrong length");
    return (m.R * xbar.head(m.n_orig)).cwiseMax(0.0);
}

}  // namespace rlp
