#include "rlp/baseline.hpp"

#include <cmath>
#include <limits>

namespace rlp {

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        default: return "stalled";
    }
}

namespace {

struct Hsd {
    Vec y, x, s;
    double tau = 1, theta = 1, kappa = 1;
};

}  // namespace

BaselineResult baseline_solve(const Mat& A, const Vec& b, const Vec& c, const BaselineOptions& opt) {
    const Index n = A.rows(), d = A.cols();
    if (b.size() != d || c.size() != n) throw std::invalid_argument("baseline_solve: dimension mismatch");
    // embedding data
    const Vec bb = b - A.transpose() * Vec::Ones(n);
    const Vec cb = c - Vec::Ones(n);
    const double zb = c.sum() + 1.0;
    const double m = double(n + 1);
    const double sigma = 1.0 - 0.4 / std::sqrt(m);

    Hsd p;
    p.y = Vec::Zero(d);
    p.x = Vec::Ones(n);
    p.s = Vec::Ones(n);

    const Index N = d + n + 2;
    Mat K = Mat::Zero(N, N);
    K.block(0, d, d, n) = A.transpose();
    K.block(0, d + n, d, 1) = -b;
    K.block(0, d + n + 1, d, 1) = bb;
    K.block(d, 0, n, d) = -A;
    K.block(d, d + n, n, 1) = c;
    K.block(d, d + n + 1, n, 1) = -cb;
    K.block(d + n, 0, 1, d) = b.transpose();
    K.block(d + n, d, 1, n) = -c.transpose();
    K(d + n, d + n + 1) = zb;
    K.block(d + n + 1, 0, 1, d) = -bb.transpose();
    K.block(d + n + 1, d, 1, n) = cb.transpose();
    K(d + n + 1, d + n) = -zb;

    BaselineResult res;
    for (long it = 0; it < opt.max_iters; ++it) {
        double mu = (p.x.dot(p.s) + p.tau * p.kappa) / m;
        Vec xs = p.x.cwiseProduct(p.s);
        double cen = std::sqrt((xs.array() / mu - 1.0).square().sum() + std::pow(p.tau * p.kappa / mu - 1.0, 2));

        Vec xo = p.x / p.tau;
        double obj = c.dot(xo);
        if (p.theta / p.tau <= opt.gap && p.x.dot(p.s) / (p.tau * p.tau) <= opt.gap * std::max(1.0, std::abs(obj))) {
            res.status = LpStatus::optimal;
            res.iterations = it;
            break;
        }
        if (p.tau < 1e-10 * std::max(1.0, p.kappa) && mu < 1e-12) {
            res.status = b.dot(p.y) > 0 ? LpStatus::infeasible : (c.dot(p.x) < 0 ? LpStatus::unbounded : LpStatus::stalled);
            res.iterations = it;
            break;
        }
        if (mu < 1e-300) break;

        // drifted off the neighbourhood (round-off): recentre without shrinking μ
        double target = cen > 0.45 ? mu : sigma * mu;
        Vec rx = target - xs.array();
        double rt = target - p.tau * p.kappa;
        for (Index i = 0; i < n; ++i) K(d + i, d + i) = p.s[i] / p.x[i];
        K(d + n, d + n) = p.kappa / p.tau;
        Vec rhs = Vec::Zero(N);
        rhs.segment(d, n) = rx.cwiseQuotient(p.x);
        rhs[d + n] = rt / p.tau;
        Vec z = K.partialPivLu().solve(rhs);
        ops::add(2.0 / 3.0 * double(N) * N * N);

        Vec dy = z.head(d), dx = z.segment(d, n);
        double dt = z[d + n], dth = z[d + n + 1];
        Vec ds = (rx - p.s.cwiseProduct(dx)).cwiseQuotient(p.x);
        double dk = (rt - p.kappa * dt) / p.tau;

        // full step; shorten only if round-off would leave the orthant
        double step = 1.0;
        auto limit = [&](double v, double dv) {
            if (dv < 0) step = std::min(step, -0.9 * v / dv);
        };
        for (Index i = 0; i < n; ++i) {
            limit(p.x[i], dx[i]);
            limit(p.s[i], ds[i]);
        }
        limit(p.tau, dt);
        limit(p.kappa, dk);
        p.y += step * dy;
        p.x += step * dx;
        p.s += step * ds;
        p.tau += step * dt;
        p.theta += step * dth;
        p.kappa += step * dk;
        res.iterations = it + 1;
    }

    res.x = (p.x / p.tau).cwiseMax(0.0);
    res.ipm_objective = c.dot(res.x);
    res.objective = res.ipm_objective;

    if (res.status == LpStatus::optimal && n <= opt.enumerate_max_n) {
        VertexResult v = enumerate_vertices(A, b, c);
        res.enumerated = true;
        if (v.found) {
            res.enum_gap = std::abs(v.objective - res.ipm_objective);
            res.x = v.x;
            res.objective = v.objective;
        } else {
            res.enum_gap = std::numeric_limits<double>::infinity();
        }
    }
    return res;
}

VertexResult enumerate_vertices(const Mat& A, const Vec& b, const Vec& c, double tol) {
    const Index n = A.rows(), d = A.cols();
    VertexResult best;
    std::vector<Index> idx(d);
    for (Index k = 0; k < d; ++k) idx[k] = k;
    const double bscale = std::max(1.0, b.cwiseAbs().maxCoeff());
    while (true) {
        Mat B(d, d);
        for (Index k = 0; k < d; ++k) B.col(k) = A.row(idx[k]).transpose();
        Eigen::FullPivLU<Mat> lu(B);
        if (lu.rank() == d) {
            Vec xb = lu.solve(b);
            if ((B * xb - b).cwiseAbs().maxCoeff() <= 1e-9 * bscale && xb.minCoeff() >= -1e-10 * bscale) {
                Vec x = Vec::Zero(n);
                for (Index k = 0; k < d; ++k) x[idx[k]] = std::max(0.0, xb[k]);
                double obj = c.dot(x);
                if (!best.found || obj < best.objective - tol * std::max(1.0, std::abs(best.objective))) {
                    best.found = true;
                    best.x = x;
                    best.objective = obj;
                    best.basis = idx;
                }
            }
        }
        // next combination in lexicographic order
        Index k = d - 1;
        while (k >= 0 && idx[k] == n - d + k) --k;
        if (k < 0) break;
        ++idx[k];
        for (Index j = k + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
    }
    return best;
}

}  // namespace rlp
