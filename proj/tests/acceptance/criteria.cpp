#include "acceptance/criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "common/oracles.hpp"
#include "rlp/baseline.hpp"
#include "rlp/dense_linalg.hpp"
#include "rlp/feasibility.hpp"
#include "rlp/gradient.hpp"
#include "rlp/inverse_maintenance.hpp"
#include "rlp/ipm.hpp"
#include "rlp/leverage_maintenance.hpp"
#include "rlp/lewis.hpp"
#include "rlp/lp_io.hpp"
#include "rlp/modified_lp.hpp"
#include "rlp/rng.hpp"
#include "rlp/sketching.hpp"
#include "rlp/solver.hpp"
#include "rlp/vector_maintenance.hpp"

namespace rlp::acceptance {

namespace {

// Tolerances and frozen constants.
constexpr double kLevTol = 1e-8;
constexpr double kLevSeconds = 1.0;
constexpr double kLewisResidual = 0.01;
constexpr int kLewisIters = 60;
constexpr double kHeavyRate = 0.9;
constexpr double kVmEps = 0.1;
constexpr double kExactTol = 1e-10;
constexpr double kLsEps = 0.2;
constexpr double kWoodburyTol = 1e-8;
constexpr double kInvEps = 0.5;
constexpr int kSpectralPass = 95;
constexpr double kSigmas = 4.0;
constexpr double kFlatTol = 1e-4;
constexpr double kFlatFeas = 1e-9;
constexpr double kGmTol = 1e-10;
// Iteration bound C·√d·ln n·ln 2/(εα). With the practical schedule the
// ratio is 10/(ln n·ln(4n/d)), at most 0.98 for n >= 40, d <= 10.
constexpr double kIterC = 1.0;
constexpr double kIpmSeconds = 120.0;
constexpr double kEpsH = 0.05;
constexpr double kWindowRate = 0.4;
constexpr double kDelta = 1e-3;
constexpr double kIdentityTol = 1e-10;
constexpr double kOpsGrowth = 2.5;
constexpr double kSqrtDSpread = 0.3;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << v;
    return os.str();
}

struct Ctx {
    bool quick;
    int pick(int full, int quick_n) const { return quick ? quick_n : full; }
};

// Independent leverage scores: row norms of a thin Householder Q.
Vec leverage_oracle(const Mat& B) {
    Eigen::HouseholderQR<Mat> qr(B);
    Mat Q = qr.householderQ() * Mat::Identity(B.rows(), B.cols());
    return Q.rowwise().squaredNorm();
}

double alpha_of(Index n, Index d) { return 1.0 / (4.0 * std::log(4.0 * double(n) / double(d))); }

// x = 1, s = Lewis weights: centred at μ = 1 for b = Aᵀ1.
PathState centred_start(const Mat& A, double lewis_eps) {
    const Index n = A.rows(), d = A.cols();
    LewisParams lp;
    lp.p = 1.0 / (1.0 + alpha_of(n, d));
    lp.eta = double(d) / double(n);
    lp.eps = lewis_eps;
    lp.max_iters = 5000;
    Vec s = lewis_weights(A, lp).w;
    return PathState{Vec::Ones(n), s, s, 1.0};
}

// ---------------------------------------------------------------- 1
Outcome c1(const Ctx& cx) {
    Outcome o{1, "leverage-score oracle"};
    Rng rng(101);
    double worst = 0, secs = 0;
    const int count = cx.pick(100, 30);
    for (int t = 0; t < count; ++t) {
        Index d = 1 + Index(rng.next() % 20);
        Index n = d + Index(rng.next() % (501 - d));
        Mat A = rng.normal_mat(n, d);
        auto t0 = Clock::now();
        Vec sig = leverage_scores(A);
        secs += since(t0);
        worst = std::max(worst, std::abs(sig.sum() - double(d)));
    }
    o.pass = worst <= kLevTol && secs < kLevSeconds;
    o.detail = std::to_string(count) + " matrices up to 500x20, max |sum sigma - d| = " + fmt(worst) + ", " +
               fmt(secs) + " s";
    return o;
}

// ---------------------------------------------------------------- 2
Outcome c2(const Ctx& cx) {
    Outcome o{2, "Lewis weights"};
    Rng rng(202);
    bool ok = true;
    // p = 2: one step to σ(A) + η
    Mat A2 = rng.normal_mat(80, 6);
    LewisParams p2{2.0, 6.0 / 80.0, 1e-12};
    LewisResult r2 = lewis_weights(A2, p2);
    double e2 = (r2.w - (leverage_oracle(A2).array() + p2.eta).matrix()).cwiseAbs().maxCoeff();
    ok = ok && r2.iterations == 1 && e2 <= 1e-12;
    // p = 1/(1+α): residual against an independent evaluation of T
    double worst_res = 0;
    int worst_it = 0;
    const int seeds = cx.pick(20, 5);
    for (int sd = 0; sd < seeds; ++sd) {
        Index n = 40 + 20 * sd, d = 3 + sd % 6;
        Mat A = rng.normal_mat(n, d);
        LewisParams p{1.0 / (1.0 + alpha_of(n, d)), double(d) / double(n), kLewisResidual};
        p.max_iters = kLewisIters;
        LewisResult r = lewis_weights(A, p);
        Vec scale = r.w.array().pow(0.5 - 1.0 / p.p);
        Vec sig = leverage_oracle(Mat(scale.asDiagonal() * A));
        Vec T = (r.w.array().pow(2.0 / p.p - 1.0) * (sig.array() + p.eta)).pow(p.p / 2.0);
        worst_res = std::max(worst_res, log_gap(r.w, T));
        worst_it = std::max(worst_it, r.iterations);
    }
    ok = ok && worst_res <= kLewisResidual && worst_it <= kLewisIters;
    o.pass = ok;
    o.detail = "p=2: " + std::to_string(r2.iterations) + " iteration, err " + fmt(e2) + "; p=1/(1+alpha): max residual " +
               fmt(worst_res) + ", max iterations " + std::to_string(worst_it) + " over " + std::to_string(seeds) +
               " seeds";
    return o;
}

// ---------------------------------------------------------------- 3
Outcome c3(const Ctx&) {
    Outcome o{3, "heavy-hitter recovery"};
    Rng rng(303);
    const Index n = 2000;
    const int trials = 200;
    const int reps = 5 * int(std::ceil(std::log2(double(n))));
    int single = 0, amplified = 0;
    for (int t = 0; t < trials; ++t) {
        Vec x = rng.normal_vec(n);
        Index p = Index(rng.next() % n);
        x[p] = 0.0;
        x[p] = 5.0 * x.norm();
        bool any = false;
        for (int r = 0; r < reps; ++r) {
            HeavyHitterSketch sk(1.0, n, rng.next());
            auto list = sk.decode(sk.apply(x));
            bool hit = std::find(list.begin(), list.end(), p) != list.end();
            if (r == 0 && hit) ++single;
            any = any || hit;
        }
        if (any) ++amplified;
    }
    o.pass = single >= int(kHeavyRate * trials) && amplified == trials;
    o.detail = "single repetition " + std::to_string(single) + "/200, " + std::to_string(reps) + " repetitions " +
               std::to_string(amplified) + "/200";
    return o;
}

// ---------------------------------------------------------------- 4
struct VmHarness {
    std::shared_ptr<const Mat> A;
    Vec g, x;
    VectorMaintainer vm;
    Rng rng;
    double worst_gap = 0.0, worst_exact = 0.0;

    VmHarness(Index n, Index d, double eps, const VmConfig& cfg, std::uint64_t seed) : rng(seed) {
        A = std::make_shared<const Mat>(rng.normal_mat(n, d));
        g = (0.3 * rng.normal_vec(n)).array().exp();
        x = (0.5 * rng.normal_vec(n)).array().exp();
        vm = VectorMaintainer(A, g, x, eps, cfg);
    }

    // the next step is scaled from the maintainer's own last output
    void step() {
        const Index n = x.size();
        const Vec& y = vm.y();
        Vec h = rng.normal_vec(A->cols());
        Vec gah = g.cwiseProduct(*A * h);
        double worst = (gah.cwiseAbs().array() / y.array()).maxCoeff();
        if (worst > 0) h *= 0.04 * rng.uniform() / worst;
        Vec delta = Vec::Zero(n);
        for (int k = 0; k < 3; ++k) {
            Index i = Index(rng.next() % n);
            delta[i] = 0.02 * y[i] * (2.0 * rng.uniform() - 1.0);
        }
        if (rng.uniform() < 0.3) {
            Index i = Index(rng.next() % n);
            g[i] *= std::exp(0.1 * (2.0 * rng.uniform() - 1.0));
            vm.scale(i, g[i]);
        }
        x += g.cwiseProduct(*A * h) + delta;
        const Vec& out = vm.query(h, delta);
        worst_gap = std::max(worst_gap, log_gap(out, x));
        Vec ex = vm.compute_exact_all();
        worst_exact = std::max(worst_exact, ((ex - x).array() / x.array()).abs().maxCoeff());
    }
};

Outcome c4(const Ctx& cx) {
    Outcome o{4, "vector maintenance vs oracle"};
    const int seeds = cx.pick(50, 5);
    double gap = 0, exact = 0;
    long viol = 0;
    for (int sd = 0; sd < seeds; ++sd) {
        VmConfig cfg;
        cfg.halt_on_violation = false;
        cfg.amv.kappa = 1.0;
        cfg.amv.dense_cap = false;
        cfg.amv.jl_eps = 0.3;
        cfg.amv.seed = 400 + sd;
        VmHarness hs(256, 8, kVmEps, cfg, 4000 + sd);
        for (int t = 0; t < 100; ++t) hs.step();
        gap = std::max(gap, hs.worst_gap);
        exact = std::max(exact, hs.worst_exact);
        viol += hs.vm.violations();
    }
    o.pass = gap <= kVmEps && exact <= kExactTol && viol == 0;
    o.detail = std::to_string(seeds) + " seeds x 100 adaptive steps, n=256 d=8: max gap " + fmt(gap) +
               ", max exact err " + fmt(exact) + ", violations " + std::to_string(viol);
    return o;
}

// ---------------------------------------------------------------- 5
Outcome c5(const Ctx& cx) {
    Outcome o{5, "leverage maintenance vs oracle"};
    const int seeds = cx.pick(20, 3);
    const Index n = 96, d = 5;
    double worst = 0;
    bool identical = true;
    for (int sd = 0; sd < seeds; ++sd) {
        Rng rng(500 + sd);
        auto A = std::make_shared<const Mat>(rng.normal_mat(n, d));
        Vec g = Vec::Ones(n);
        LsConfig base;
        base.seed = 50 + sd;
        LsConfig full = base;
        full.all_candidates = true;
        LeverageMaintainer a(A, g, kLsEps, base), b(A, g, kLsEps, full);
        for (int t = 0; t < 64; ++t) {
            if (t > 0)
                for (Index j = 0; j < n; ++j) {
                    g[j] *= std::exp((2.0 * rng.uniform() - 1.0) / 16.0);
                    a.scale(j, g[j]);
                    b.scale(j, g[j]);
                }
            Mat GA = g.asDiagonal() * *A;
            Mat P = (GA.transpose() * GA).inverse();
            Vec truth = leverage_oracle(GA).array() + double(d) / double(n);
            const Vec& ta = a.query(P, P);
            const Vec& tb = b.query(P, P);
            worst = std::max(worst, log_gap(ta, truth));
            if ((ta - tb).cwiseAbs().maxCoeff() != 0.0) identical = false;
        }
    }
    o.pass = worst <= kLsEps && identical;
    o.detail = std::to_string(seeds) + " seeds x 64 steps: max |ln tau~ - ln tau| = " + fmt(worst) +
               ", all-rows substitution " + (identical ? "identical" : "DIFFERS");
    return o;
}

// ---------------------------------------------------------------- 6
Outcome c6(const Ctx& cx) {
    Outcome o{6, "inverse maintenance"};
    // (a) Woodbury against the direct inverse
    double wood = 0;
    {
        Rng rng(601);
        const Index n = 1500, d = 20;
        auto A = std::make_shared<const Mat>(rng.normal_mat(n, d));
        Vec w = Vec::Ones(n);
        Vec tau = leverage_oracle(*A).array() + double(d) / double(n);
        InvConfig cfg;
        cfg.c1 = 0.5;
        InverseMaintainer im(A, w, tau, 0.5, cfg);
        for (int t = 0; t < cx.pick(40, 10); ++t) {
            for (int r = 0; r < 3; ++r) w[Index(rng.next() % n)] *= 1.5;
            im.update(w, tau);
            Mat direct = gram(*A, im.v()).inverse();
            wood = std::max(wood, (im.psi() - direct).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff());
        }
    }
    // (b) spectral approximation at the default oversampling
    int pass = 0;
    const int runs = cx.pick(100, 20);
    {
        Rng rng(602);
        const Index n = 4000, d = 4;
        auto A = std::make_shared<const Mat>(rng.normal_mat(n, d));
        Vec w = (0.5 * rng.normal_vec(n)).array().exp();
        Vec tau = leverage_oracle(Mat(w.cwiseSqrt().asDiagonal() * *A)).array() + double(d) / double(n);
        Mat H = gram(*A, w);
        for (int s = 0; s < runs; ++s) {
            InvConfig cfg;
            cfg.seed = 6000 + s;
            InverseMaintainer im(A, w, tau, kInvEps, cfg);
            if (spectral_approx_check(im.sampled_gram(), H, kInvEps)) ++pass;
        }
    }
    // (c) Solve is unbiased
    int within = 0;
    const Index dd = 5;
    {
        Rng rng(603);
        auto A = std::make_shared<const Mat>(rng.normal_mat(30, dd));
        Vec w = rng.normal_vec(30).array().exp();
        Vec tau = leverage_oracle(Mat(w.cwiseSqrt().asDiagonal() * *A)).array() + double(dd) / 30.0;
        InvConfig cfg;
        cfg.c1 = 0.15;
        cfg.c3 = 0.0;
        InverseMaintainer im(A, w, tau, 0.5, cfg);
        Vec b = rng.normal_vec(dd);
        Vec exact = gram(*A, w).ldlt().solve(b);
        const int R = 10000;
        Mat draws(R, dd);
        for (int k = 0; k < R; ++k) draws.row(k) = im.solve(b, w, 0.5).transpose();
        Vec mean = draws.colwise().mean().transpose();
        Vec sd = ((draws.rowwise() - mean.transpose()).array().square().colwise().sum() / (R - 1)).sqrt().transpose();
        for (Index j = 0; j < dd; ++j)
            if (std::abs(mean[j] - exact[j]) <= kSigmas * sd[j] / std::sqrt(double(R)) + 1e-12) ++within;
    }
    int need = (runs * kSpectralPass + 99) / 100;
    o.pass = wood <= kWoodburyTol && pass >= need && within == dd;
    o.detail = "(a) max rel err " + fmt(wood) + "; (b) spectral " + std::to_string(pass) + "/" + std::to_string(runs) +
               " at eps " + fmt(kInvEps) + "; (c) " + std::to_string(within) + "/" + std::to_string(dd) +
               " coords within 4 SE";
    return o;
}

// ---------------------------------------------------------------- 7
Outcome c7(const Ctx& cx) {
    Outcome o{7, "geometric-truncation estimators"};
    Rng rng(701);
    const int draws = cx.pick(100000, 20000);
    std::ostringstream det;
    bool ok = true;
    for (double a : {0.1, 0.3, 0.45}) {
        double sum = 0, sq = 0;
        for (int t = 0; t < draws; ++t) {
            int X = rng.geometric_half();
            double z = 0, term = 1;
            for (int k = 1; k <= X; ++k) z += (term *= 2.0 * a);
            sum += z;
            sq += z * z;
        }
        double mean = sum / draws, var = sq / draws - mean * mean;
        double se = std::sqrt(var / draws), truth = a / (1.0 - a);
        double z = std::abs(mean - truth) / se;
        ok = ok && z <= kSigmas;
        det << "a=" << a << ": " << fmt(z) << " SE; ";
    }
    // H4 against Q^{-1} - Q'^{-1} on a 20 x 3 instance with row sampling on
    Rng r2(702);
    const Index n = 20, d = 3;
    Mat A = r2.normal_mat(n, d);
    Vec xp = r2.normal_vec(n).array().exp(), sp = r2.normal_vec(n).array().exp();
    Vec x = xp, s = sp;
    for (Index i = 0; i < n; ++i) {
        x[i] *= std::exp(0.05 * (2 * r2.uniform() - 1));
        s[i] *= std::exp(0.05 * (2 * r2.uniform() - 1));
    }
    Vec wp = xp.cwiseQuotient(sp);
    Vec tau = leverage_oracle(Mat(wp.cwiseSqrt().asDiagonal() * A)).array() + double(d) / double(n);
    Mat truth = gram(A, Vec(x.cwiseQuotient(s))).inverse() - gram(A, wp).inverse();
    FeasConfig cfg;
    cfg.eps_h = 1.0;
    cfg.sample_c = 0.5;
    const int m = cx.pick(20000, 5000);
    Mat sum = Mat::Zero(d, d), sq = Mat::Zero(d, d);
    int used = 0;
    for (int t = 0; t < m; ++t) {
        H2H4 h = make_h2_h4(A, x, s, xp, sp, tau, cfg, r2);
        sum += h.h4;
        sq += h.h4.cwiseProduct(h.h4);
        ++used;
    }
    Mat mean = sum / used;
    Mat se = ((sq / used - mean.cwiseProduct(mean)) / used).cwiseSqrt();
    double worst = 0;
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) worst = std::max(worst, std::abs(mean(i, j) - truth(i, j)) / se(i, j));
    ok = ok && worst <= kSigmas;
    det << "H4 worst entry " << fmt(worst) << " SE over " << used << " draws";
    o.pass = ok;
    o.detail = det.str();
    return o;
}

// ---------------------------------------------------------------- 8
Outcome c8(const Ctx& cx) {
    Outcome o{8, "flat operator"};
    Rng rng(801);
    double opt_err = 0, feas = 0;
    const int count = cx.pick(200, 40);
    for (int t = 0; t < count; ++t) {
        Index n = 1 + Index(rng.next() % 8);
        Vec g = rng.normal_vec(n);
        Vec tau = (0.05 + 2.0 * rng.uniform()) * rng.normal_vec(n).array().abs().matrix();
        tau.array() += 0.01;
        double c = 0.3 + 4.0 * rng.uniform();
        Vec w = flat(g, tau, c);
        feas = std::max(feas, mixed_norm(w, tau, c) - 1.0);
        opt_err = std::max(opt_err, std::abs(g.dot(w) - oracle::flat_value_refined(g, tau, c)));
    }
    double gm_err = 0;
    for (int t = 0; t < cx.pick(20, 5); ++t) {
        const Index n = 60, d = 4;
        Mat A = rng.normal_mat(n, d);
        auto Ap = std::make_shared<const Mat>(A);
        Vec v = (1.0 + 0.2 * rng.normal_vec(n).array()).cwiseMax(0.55).cwiseMin(1.9).matrix();
        Vec tau = leverage_oracle(A).array() + double(d) / double(n);
        Vec x = rng.normal_vec(n).array().exp();
        const double eps = 0.05, lam = 12.0, c = 1.5;
        GradientMaintainer gm(Ap, v, tau, x, eps, lam, c);
        for (int u = 0; u < 40; ++u) {
            Index i = Index(rng.next() % n);
            v[i] = std::clamp(v[i] + 0.05 * rng.normal(), 0.55, 1.9);
            x[i] *= std::exp(0.1 * rng.normal());
            gm.update(i, v[i], tau[i], x[i]);
        }
        Vec direct = flat(potential_gradient(gm.rounded_v(), lam), gm.rounded_tau(), c);
        gm_err = std::max(gm_err, (gm.query().first - direct).cwiseAbs().maxCoeff());
    }
    o.pass = opt_err <= kFlatTol && feas <= kFlatFeas && gm_err <= kGmTol;
    o.detail = std::to_string(count) + " instances: max value gap " + fmt(opt_err) + ", max norm excess " +
               fmt(std::max(0.0, feas)) + "; gm_query err " + fmt(gm_err);
    return o;
}

// ---------------------------------------------------------------- 9
Outcome c9(const Ctx& cx) {
    Outcome o{9, "IPM exact mode"};
    Rng rng(901);
    const int count = cx.pick(30, 3);
    long viol = 0, misses = 0;
    double worst_cen = 0, worst_step = 0, worst_ratio = 0, worst_secs = 0;
    bool reached = true;
    for (int t = 0; t < count; ++t) {
        Index n = 40 + Index(rng.next() % 161), d = 3 + Index(rng.next() % 8);
        Mat A = rng.normal_mat(n, d);
        auto Ap = std::make_shared<const Mat>(A);
        Vec b = A.transpose() * Vec::Ones(n);
        IpmConfig cfg;
        cfg.halt_on_violation = false;
        PathFollower pf(Ap, b, cfg);
        const IpmConstants& k = pf.constants();
        auto t0 = Clock::now();
        pf.centering(centred_start(A, 1e-3), 0.5);
        worst_secs = std::max(worst_secs, since(t0));
        const CenteringReport& r = pf.report();
        viol += r.violations;
        misses += r.phi_decrement_misses;
        reached = reached && r.reached_target;
        worst_cen = std::max(worst_cen, r.max_centrality / (4.0 * k.eps));
        worst_step = std::max(worst_step, std::max(r.max_dx, r.max_ds) / (k.eps / 2.0));
        double bound = std::sqrt(double(d)) * std::log(double(n)) * std::log(2.0) / (k.eps * k.alpha);
        worst_ratio = std::max(worst_ratio, double(r.iterations) / bound);
    }
    o.pass = viol == 0 && reached && worst_cen <= 1.0 && worst_step <= 1.0 + 1e-9 && worst_ratio <= kIterC &&
             worst_secs < kIpmSeconds && misses == 0;
    o.detail = std::to_string(count) + " instances: violations " + std::to_string(viol) + ", max gap/(4eps) " +
               fmt(worst_cen) + ", max step/(eps/2) " + fmt(worst_step) + ", iterations/bound " + fmt(worst_ratio) +
               " (C=" + fmt(kIterC) + "), potential misses " + std::to_string(misses) + ", slowest " +
               fmt(worst_secs) + " s";
    return o;
}

// ---------------------------------------------------------------- 10
Outcome c10(const Ctx& cx) {
    Outcome o{10, "feasibility machinery"};
    // (a) contraction with H ≈_{ε_H} Q
    double worst_c = 0;
    for (int t = 0; t < 50; ++t) {
        Rng rng(1000 + t);
        const Index n = 60, d = 6;
        Mat A = rng.normal_mat(n, d);
        Vec x = rng.normal_vec(n).array().exp(), s = rng.normal_vec(n).array().exp();
        Vec b = A.transpose() * x + 0.3 * rng.normal_vec(d);
        Mat Q = gram(A, Vec(x.cwiseQuotient(s)));
        Eigen::SelfAdjointEigenSolver<Mat> qe(Q);
        Mat G = rng.normal_mat(d, d);
        Mat E = 0.5 * (G + G.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> ee(E);
        E *= kEpsH / ee.eigenvalues().cwiseAbs().maxCoeff();
        ee.compute(E);
        Mat expE = ee.eigenvectors() * ee.eigenvalues().array().exp().matrix().asDiagonal() * ee.eigenvectors().transpose();
        Mat H = qe.operatorSqrt() * expE * qe.operatorSqrt();
        WeightedSolve solve = [H](const Vec& rhs, const Vec&) { return Vec(H.ldlt().solve(rhs)); };
        double before = phi_b(A, b, x, x, s, 1.0);
        Vec xn = exact_correction(A, b, x, x, s, solve);
        worst_c = std::max(worst_c, phi_b(A, b, xn, x, s, 1.0) / before);
    }
    // (b) sample_delta_b is unbiased
    int within = 0;
    const Index dd = 4;
    {
        Rng rng(1101);
        const Index n = 50;
        Mat A = rng.normal_mat(n, dd);
        Vec x = rng.normal_vec(n).array().exp();
        Vec b = A.transpose() * x + rng.normal_vec(dd);
        Vec tau = leverage_oracle(A).array() + double(dd) / double(n);
        const int R = 10000;
        Mat draws(R, dd);
        for (int k = 0; k < R; ++k) draws.row(k) = sample_delta_b(A, b, x, tau, 0.5, rng).transpose();
        Vec mean = draws.colwise().mean().transpose();
        Vec sd = ((draws.rowwise() - mean.transpose()).array().square().colwise().sum() / (R - 1)).sqrt().transpose();
        Vec truth = b - A.transpose() * x;
        for (Index j = 0; j < dd; ++j)
            if (std::abs(mean[j] - truth[j]) <= kSigmas * sd[j] / std::sqrt(double(R))) ++within;
    }
    // (c) Φ_b along sketched runs, no rollback
    const int runs = cx.pick(100, 10);
    int good = 0;
    double worst_pb = 0, limit = 0;
    long window = 0;
    for (int rsd = 0; rsd < runs; ++rsd) {
        Rng rng(1200 + rsd);
        const Index n = 40, d = 4;
        Mat A = rng.normal_mat(n, d);
        auto Ap = std::make_shared<const Mat>(A);
        Vec b = A.transpose() * Vec::Ones(n);
        IpmConfig cfg;
        cfg.mode = Mode::sketched;
        cfg.seed = 12000 + rsd;
        cfg.max_retries = 0;
        cfg.halt_on_violation = false;
        cfg.budget_is_error = false;
        // four reinitialisation periods; the analysed window is shorter
        window = 4 * long(std::ceil(std::sqrt(double(d))));
        cfg.max_iters = window;
        PathFollower pf(Ap, b, cfg);
        pf.centering(centred_start(A, 1e-3), 1e-3);
        limit = pf.phi_b_limit();
        worst_pb = std::max(worst_pb, pf.report().max_phi_b);
        if (pf.report().max_phi_b <= limit && pf.report().iterations == window) ++good;
    }
    o.pass = worst_c <= 5.0 * kEpsH && within == dd && good >= int(std::ceil(kWindowRate * runs));
    o.detail = "(a) worst contraction " + fmt(worst_c) + " (limit " + fmt(5 * kEpsH) + "); (b) " +
               std::to_string(within) + "/" + std::to_string(dd) + " coords within 4 SE; (c) " + std::to_string(good) +
               "/" + std::to_string(runs) + " runs of " + std::to_string(window) + " steps below " + fmt(limit) +
               ", max phi_b " + fmt(worst_pb);
    return o;
}

// ---------------------------------------------------------------- 11
Outcome c11(const Ctx& cx) {
    Outcome o{11, "end-to-end vs baseline"};
    const int count = cx.pick(20, 2);
    int ok_obj = 0, ok_res = 0, ok_agree = 0, base_ok = 0;
    double worst_obj = 0, worst_res = 0, worst_agree = 0, secs_s = 0;
    for (int i = 0; i < count; ++i) {
        Index n = 16 + 2 * i, d = 2 + i % 6;
        LpProblem lp = generate_lp(n, d, 1100 + i);
        BaselineResult br = baseline_solve(lp.A, lp.b, lp.c);
        if (br.status == LpStatus::optimal) ++base_ok;
        double obj[2] = {0, 0};
        double tol = 0;
        for (int mode = 0; mode < 2; ++mode) {
            SolveConfig cfg;
            cfg.ipm.mode = mode == 0 ? Mode::exact : Mode::sketched;
            cfg.ipm.seed = 77 + i;
            auto t0 = Clock::now();
            SolveReport r = lp_solve(lp, kDelta, cfg);
            if (mode == 1) secs_s += since(t0);
            obj[mode] = r.objective;
            tol = r.objective_tol;
            double eo = std::abs(r.objective - br.objective) / r.objective_tol;
            double er = r.residual / r.residual_tol;
            worst_obj = std::max(worst_obj, eo);
            worst_res = std::max(worst_res, er);
            if (eo <= 1.0) ++ok_obj;
            if (er <= 1.0) ++ok_res;
        }
        double ea = std::abs(obj[0] - obj[1]) / (2.0 * tol);
        worst_agree = std::max(worst_agree, ea);
        if (ea <= 1.0) ++ok_agree;
    }
    o.pass = base_ok == count && ok_obj == 2 * count && ok_res == 2 * count && ok_agree == count;
    o.detail = std::to_string(count) + " LPs (n 16.." + std::to_string(16 + 2 * (count - 1)) +
               ", d 2..7) x 2 modes: max objective gap/tol " + fmt(worst_obj) + ", max residual/tol " +
               fmt(worst_res) + ", max mode disagreement/(2 tol) " + fmt(worst_agree) + ", sketched total " +
               fmt(secs_s) + " s";
    return o;
}

// ---------------------------------------------------------------- 12
Outcome c12(const Ctx&) {
    Outcome o{12, "initial point"};
    Rng rng(1201);
    double worst = 0, min_s = 1;
    int padded = 0;
    for (int t = 0; t < 100; ++t) {
        Index d = 1 + Index(rng.next() % 10);
        Index n = d + Index(rng.next() % 100);
        Mat A = rng.normal_mat(n, d);
        Vec b = rng.normal_vec(d), c = rng.normal_vec(n);
        if (t % 4 == 0) b = A.transpose() * Vec::Ones(n);  // forces padding at R = 1
        double R = t % 4 == 0 ? 1.0 : 0.5 + 10.0 * rng.uniform();
        double delta = 0.01 + 0.99 * rng.uniform();
        ModifiedLp m = build_modified_lp(A, b, c, delta, R, c.norm());
        if (m.padded) ++padded;
        Vec one = Vec::Ones(m.A.rows());
        worst = std::max(worst, (m.A.transpose() * one - m.b).cwiseAbs().maxCoeff());
        min_s = std::min(min_s, m.s0.minCoeff());
    }
    o.pass = worst <= kIdentityTol && min_s >= 0.0;
    o.detail = "100 reductions (" + std::to_string(padded) + " padded): max |Abar^T 1 - bbar| = " + fmt(worst) +
               ", min sbar = " + fmt(min_s);
    return o;
}

// ---------------------------------------------------------------- 13
Outcome c13(const Ctx& cx) {
    Outcome o{13, "scaling telemetry"};
    std::ostringstream det;
    // per-iteration work when n doubles at d = 8
    const Index d = 8;
    std::vector<Index> ns = cx.quick ? std::vector<Index>{64, 128} : std::vector<Index>{64, 128, 256, 512};
    double worst_growth = 0;
    for (int mode = 0; mode < 2; ++mode) {
        double prev = 0;
        det << (mode == 0 ? "exact" : "sketched") << " ops/iter:";
        for (Index n : ns) {
            Rng rng(1300 + n);
            Mat A = rng.normal_mat(n, d);
            IpmConfig cfg;
            cfg.mode = mode == 0 ? Mode::exact : Mode::sketched;
            cfg.max_iters = 24;
            cfg.budget_is_error = false;
            cfg.check_every = 0;
            PathFollower pf(std::make_shared<const Mat>(A), Vec(A.transpose() * Vec::Ones(n)), cfg);
            pf.centering(centred_start(A, 1e-3), 1e-3);
            double per = double(pf.report().ops) / double(std::max(1L, pf.report().iterations));
            det << " " << n << ":" << fmt(per);
            if (prev > 0) worst_growth = std::max(worst_growth, per / prev);
            prev = per;
        }
        det << "; ";
    }
    // iterations against √d at n = 8d
    std::vector<Index> ds = cx.quick ? std::vector<Index>{4, 16} : std::vector<Index>{4, 16, 64};
    double lo = 1e300, hi = 0;
    det << "iterations/sqrt(d):";
    for (Index dd : ds) {
        Index n = 8 * dd;
        Rng rng(1400 + dd);
        Mat A = rng.normal_mat(n, dd);
        IpmConfig cfg;
        cfg.check_every = 0;
        PathFollower pf(std::make_shared<const Mat>(A), Vec(A.transpose() * Vec::Ones(n)), cfg);
        pf.centering(centred_start(A, 1e-3), 0.01);
        double r = double(pf.report().iterations) / std::sqrt(double(dd));
        det << " d=" << dd << ":" << fmt(r);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    double spread = hi / lo - 1.0;
    det << " (spread " << fmt(spread) << "); max growth per doubling " << fmt(worst_growth);
    o.pass = worst_growth <= kOpsGrowth && spread <= kSqrtDSpread;
    o.detail = det.str();
    return o;
}

}  // namespace

std::vector<Outcome> run(const Options& opt, std::ostream& out) {
    Ctx cx{opt.quick};
    std::vector<std::function<Outcome(const Ctx&)>> all = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13};
    std::vector<Outcome> res;
    for (int i = 0; i < kCriteria; ++i) {
        if (!opt.only.empty() && !opt.only.count(i + 1)) continue;
        auto t0 = Clock::now();
        Outcome o;
        try {
            o = all[i](cx);
        } catch (const std::exception& e) {
            o.id = i + 1;
            o.title = "criterion " + std::to_string(i + 1);
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        o.seconds = since(t0);
        out << (o.pass ? "PASS" : "FAIL") << " [" << std::setw(2) << o.id << "] " << o.title << " | " << o.detail
            << " | " << fmt(o.seconds) << " s" << std::endl;
        res.push_back(o);
    }
    return res;
}

}  // namespace rlp::acceptance
