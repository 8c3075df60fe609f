#include <gtest/gtest.h>

#include <cmath>

#include "../common/oracles.hpp"
#include "rlp/dense_linalg.hpp"
#include "rlp/gradient.hpp"
#include "rlp/rng.hpp"

using namespace rlp;

TEST(Potential, AtOne) {
    Vec v = Vec::Ones(7);
    EXPECT_DOUBLE_EQ(potential(v, 3.0), 14.0);
    EXPECT_EQ(potential_gradient(v, 3.0).norm(), 0.0);
    EXPECT_EQ(potential_gradient_normalized(v, 3.0).norm(), 0.0);
}

TEST(Potential, ExponentialBounds) {
    Rng rng(1);
    for (int k = 0; k < 50; ++k) {
        Vec v = (1.0 + 0.3 * rng.normal_vec(9).array()).matrix();
        double lam = 1.0 + 20.0 * rng.uniform();
        double e = std::exp(lam * (v.array() - 1.0).abs().maxCoeff());
        double phi = potential(v, lam);
        EXPECT_LE(e, phi * (1 + 1e-12));
        EXPECT_LE(phi, 2.0 * 9 * e * (1 + 1e-12));
        EXPECT_NEAR(std::log(phi), log_potential(v, lam), 1e-12);
    }
}

TEST(Potential, LogFormSurvivesOverflow) {
    Vec v = Vec::Constant(3, 1.0);
    v[0] = 40.0;
    double lp = log_potential(v, 100.0);
    EXPECT_TRUE(std::isfinite(lp));
    EXPECT_NEAR(lp, 3900.0, 1e-9);
    Vec g = potential_gradient_normalized(v, 100.0);
    EXPECT_DOUBLE_EQ(g[0], 1.0);
    EXPECT_EQ(g[1], 0.0);
}

TEST(Potential, GradientFiniteDifference) {
    Rng rng(2);
    Vec v = (1.0 + 0.2 * rng.normal_vec(6).array()).matrix();
    double lam = 5.0;
    Vec g = potential_gradient(v, lam);
    for (Index i = 0; i < 6; ++i) {
        double h = 1e-6;
        Vec p = v, m = v;
        p[i] += h;
        m[i] -= h;
        double fd = (potential(p, lam) - potential(m, lam)) / (2 * h);
        EXPECT_LE(std::abs(fd - g[i]), 1e-6 * std::max(1.0, std::abs(g[i])));
    }
    Vec gn = potential_gradient_normalized(v, lam);
    EXPECT_LT((gn - g / g.cwiseAbs().maxCoeff()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Flat, ZeroGradient) { EXPECT_EQ(flat(Vec::Zero(4), Vec::Ones(4), 2.0).norm(), 0.0); }

TEST(Flat, OneDimensional) {
    Vec g(1), t(1);
    g << 5;
    t << 1;
    Vec w = flat(g, t, 2.0);
    EXPECT_NEAR(w[0], 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(g.dot(w), 5.0 / 3.0, 1e-13);
}

TEST(Flat, MatchesGridOracle) {
    Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        Index n = 1 + Index(rng.next() % 8);
        Vec g = rng.normal_vec(n);
        Vec tau = (0.05 + rng.uniform() * 2.0) * rng.normal_vec(n).array().abs().matrix();
        tau.array() += 0.01;
        double c = 0.3 + 4.0 * rng.uniform();
        Vec w = flat(g, tau, c);
        EXPECT_LE(mixed_norm(w, tau, c), 1.0 + 1e-9);
        double grid = oracle::flat_value_grid(g, tau, c, 4000);
        EXPECT_GE(g.dot(w), grid - 1e-4);
        EXPECT_LE(g.dot(w), grid + 1e-3);  // grid is a lower bound up to its resolution
    }
}

TEST(Flat, TwoDimensionalBruteForce) {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        Vec g = rng.normal_vec(2);
        Vec tau = rng.normal_vec(2).array().abs() + 0.1;
        double c = 0.5 + rng.uniform() * 2;
        double best = 0.0;
        const int G = 1000;
        for (int i = -G; i <= G; ++i)
            for (int j = -G; j <= G; ++j) {
                Vec w(2);
                w << double(i) / G, double(j) / G;
                double nrm = mixed_norm(w, tau, c);
                if (nrm > 0) best = std::max(best, g.dot(w) / nrm);
            }
        EXPECT_NEAR(g.dot(flat(g, tau, c)), best, 2e-3 * std::abs(best) + 1e-9);
    }
}

// Second route: with u = √τ∘w the problem is max <g/√τ, u> subject to
// C‖u‖₂ + ‖u/√τ‖_∞ <= 1, solved here over a Euclidean ball and a scaled box.
double rescaled_value(const Vec& g, const Vec& tau, double c) {
    Vec h = g.array() / tau.array().sqrt();
    Vec cap = tau.array().sqrt();
    auto at = [&](double a) {
        double rho = (1.0 - a) / c;
        auto u_of = [&](double t) {
            Vec u(h.size());
            for (Index i = 0; i < h.size(); ++i) u[i] = std::copysign(std::min(a * cap[i], t * std::abs(h[i])), h[i]);
            return u;
        };
        double lo = 0, hi = 1;
        if (u_of(1e300).norm() <= rho) return h.dot(u_of(1e300));
        while (u_of(hi).norm() < rho) hi *= 2;
        for (int k = 0; k < 200; ++k) {
            double mid = 0.5 * (lo + hi);
            (u_of(mid).norm() < rho ? lo : hi) = mid;
        }
        return h.dot(u_of(lo));
    };
    double best = 0;
    for (int k = 0; k <= 20000; ++k) best = std::max(best, at(k / 20000.0));
    return best;
}

TEST(Flat, RescaledRouteAgrees) {
    Rng rng(9);
    for (int trial = 0; trial < 25; ++trial) {
        Index n = 1 + Index(rng.next() % 6);
        Vec g = rng.normal_vec(n);
        Vec tau = rng.normal_vec(n).array().abs() + 0.05;
        double c = 0.5 + 3.0 * rng.uniform();
        Vec w = flat(g, tau, c);
        Vec u = tau.array().sqrt() * w.array();
        Vec h = g.array() / tau.array().sqrt();
        EXPECT_LE(c * u.norm() + (u.array() / tau.array().sqrt()).abs().maxCoeff(), 1.0 + 1e-9);
        EXPECT_NEAR(h.dot(u), g.dot(w), 1e-12 * (1 + std::abs(g.dot(w))));
        double r = rescaled_value(g, tau, c);
        EXPECT_GE(h.dot(u), r - 1e-9);
        EXPECT_LE(h.dot(u), r + 1e-3);
    }
}

TEST(Flat, GroupedEqualsExpanded) {
    Rng rng(5);
    Vec g = rng.normal_vec(3), tau = rng.normal_vec(3).array().abs() + 0.2;
    Vec cnt(3);
    cnt << 2, 1, 3;
    Vec wg = flat_grouped(g, tau, cnt, 1.5);
    Vec ge(6), te(6);
    ge << g[0], g[0], g[1], g[2], g[2], g[2];
    te << tau[0], tau[0], tau[1], tau[2], tau[2], tau[2];
    Vec we = flat(ge, te, 1.5);
    EXPECT_NEAR(we[0], wg[0], 1e-12);
    EXPECT_NEAR(we[2], wg[1], 1e-12);
    EXPECT_NEAR(we[5], wg[2], 1e-12);
}

namespace {

struct GmFixture {
    std::shared_ptr<const Mat> A;
    Vec v, tau, x;
};

GmFixture make_fixture(Rng& rng, Index n, Index d) {
    GmFixture f;
    Mat A = rng.normal_mat(n, d);
    f.A = std::make_shared<const Mat>(A);
    f.v = (1.0 + 0.2 * rng.normal_vec(n).array()).cwiseMax(0.55).cwiseMin(1.9).matrix();
    f.tau = (leverage_scores(A).array() + double(d) / n).matrix();
    f.x = rng.normal_vec(n).array().exp();
    return f;
}

}  // namespace

TEST(GradientMaintainer, CenteredGivesZero) {
    Rng rng(6);
    auto f = make_fixture(rng, 30, 3);
    GradientMaintainer gm(f.A, Vec::Constant(30, 1.0 + 1e-9), f.tau, f.x, 0.1, 10.0, 1.0);
    auto [h, axh] = gm.query();
    EXPECT_EQ(h.norm(), 0.0);
    EXPECT_EQ(axh.norm(), 0.0);
}

TEST(GradientMaintainer, MatchesDirectFlat) {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        auto f = make_fixture(rng, 50, 4);
        double eps = 0.05, lam = 12.0, c = 1.5;
        GradientMaintainer gm(f.A, f.v, f.tau, f.x, eps, lam, c);
        for (int u = 0; u < 40; ++u) {
            Index i = Index(rng.next() % 50);
            f.v[i] = std::clamp(f.v[i] + 0.05 * rng.normal(), 0.55, 1.9);
            f.x[i] *= std::exp(0.1 * rng.normal());
            gm.update(i, f.v[i], f.tau[i], f.x[i]);
        }
        Vec vbar = gm.rounded_v(), tbar = gm.rounded_tau();
        EXPECT_LE((vbar - f.v).cwiseAbs().maxCoeff(), eps / 2 + 1e-15);
        EXPECT_LE(log_gap(tbar, f.tau), -std::log1p(-eps) + 1e-12);
        EXPECT_TRUE(((vbar - f.v).array() <= 1e-15).all());
        Vec direct = flat(potential_gradient(vbar, lam), tbar, c);
        auto [h, axh] = gm.query();
        EXPECT_LT((h - direct).cwiseAbs().maxCoeff(), 1e-10);
        Vec axh_direct = f.A->transpose() * (f.x.asDiagonal() * h);
        EXPECT_LT((axh - axh_direct).cwiseAbs().maxCoeff(), 1e-9 * (1 + axh_direct.norm()));
        EXPECT_LT(gm.max_cache_error(), 1e-10);
    }
}

TEST(GradientMaintainer, SingleBucket) {
    Rng rng(8);
    Mat A = rng.normal_mat(10, 2);
    auto Ap = std::make_shared<const Mat>(A);
    Vec x = rng.normal_vec(10).array().exp();
    GradientMaintainer gm(Ap, Vec::Constant(10, 1.31), Vec::Constant(10, 0.5), x, 0.1, 4.0, 1.0);
    EXPECT_EQ(gm.bucket_count(), 1u);
    auto [h, axh] = gm.query();
    EXPECT_LT((h.array() - h[0]).abs().maxCoeff(), 1e-15);
    EXPECT_GT(h[0], 0.0);
    EXPECT_LT((axh - h[0] * A.transpose() * x).norm(), 1e-12 * axh.norm());
}

TEST(GradientMaintainer, RangeViolation) {
    Rng rng(9);
    auto f = make_fixture(rng, 20, 2);
    GradientMaintainer gm(f.A, f.v, f.tau, f.x, 0.1, 4.0, 1.0);
    EXPECT_THROW(gm.update(0, 2.5, f.tau[0], 1.0), InvariantViolation);
    EXPECT_THROW(gm.update(0, 1.0, 1e-6, 1.0), InvariantViolation);
    EXPECT_LT(gm.max_cache_error(), 1e-12);
}
