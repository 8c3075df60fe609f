#include "rlp/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rlp/dense_linalg.hpp"

namespace rlp {

const char* to_string(Mode m) { return m == Mode::exact ? "exact" : "sketched"; }
const char* to_string(Profile p) { return p == Profile::theory ? "theory" : "practical"; }

Mode parse_mode(const std::string& s) {
    if (s == "exact") return Mode::exact;
    if (s == "sketched") return Mode::sketched;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

Profile parse_profile(const std::string& s) {
    if (s == "theory") return Profile::theory;
    if (s == "practical") return Profile::practical;
    throw std::invalid_argument("unknown profile '" + s + "'");
}

namespace {

double alpha_of(Index n, Index d) { return 1.0 / (4.0 * std::log(4.0 * double(n) / double(d))); }

}  // namespace

double IpmConstants::phi_decrement() const {
    return gamma * alpha * alpha * lambda / (1280.0 * std::sqrt(double(d)));
}

void IpmConstants::validate() const {
    if (!(alpha > 0 && eps > 0 && lambda > 0 && gamma > 0 && c_norm > 0 && mu_rate > 0 && mu_rate < 1))
        throw std::invalid_argument("IpmConstants: every constant must be positive");
    if (profile == Profile::theory && eps > alpha / 16000.0 * (1.0 + 1e-12))
        throw std::invalid_argument("IpmConstants: theory profile needs eps <= alpha/16000");
}

IpmConstants theory_constants(Index n, Index d, double eps) {
    IpmConstants k;
    k.profile = Profile::theory;
    k.n = n;
    k.d = d;
    k.alpha = alpha_of(n, d);
    k.eps = eps > 0 ? eps : k.alpha / 16000.0;
    const double big = std::log(65536.0 * double(n) * std::sqrt(double(d)) / (k.alpha * k.alpha));
    k.lambda = 2.0 / k.eps * big;
    k.gamma = std::min(k.eps / 4.0, k.alpha / (50.0 * k.lambda));
    k.c_norm = 10.0 / k.alpha;
    k.mu_rate = k.gamma * k.alpha / (32768.0 * std::sqrt(double(d)));
    k.log_phi_break = big;
    return k;
}

IpmConstants practical_constants(Index n, Index d, double eps) {
    IpmConstants k;
    k.profile = Profile::practical;
    k.n = n;
    k.d = d;
    k.alpha = alpha_of(n, d);
    k.eps = eps > 0 ? eps : 0.25;
    k.lambda = std::max(8.0, 2.0 * std::log(2.0 * double(n)) / k.eps);
    k.gamma = k.eps / 5.0;
    k.c_norm = 2.0;
    k.mu_rate = k.gamma / (4.0 * k.c_norm * std::sqrt(double(d)));
    // Φ <= 2n·e^{λε/4} forces |v_i - 1| <= 3ε/4
    k.log_phi_break = std::log(2.0 * double(n)) + k.lambda * k.eps / 4.0;
    return k;
}

IpmConstants make_constants(Profile p, Index n, Index d, double eps) {
    return p == Profile::theory ? theory_constants(n, d, eps) : practical_constants(n, d, eps);
}

Direction newton_direction(const Mat& A, const Vec& xbar, const Vec& sbar, const Vec& h, double alpha,
                           const std::function<Vec(const Vec&)>& h_solve) {
    Vec xh = xbar.cwiseProduct(h);
    Vec Au = A * h_solve(Vec(A.transpose() * xh));
    ops::add(4.0 * double(A.rows()) * A.cols());
    Direction out;
    out.dx = (1.0 + 2.0 * alpha) * (xh - xbar.cwiseQuotient(sbar).cwiseProduct(Au));
    out.ds = (1.0 - 2.0 * alpha) * Au;
    return out;
}

Direction newton_direction_exact(const Mat& A, const Vec& xbar, const Vec& sbar, const Vec& h, double alpha) {
    Vec lx = xbar.array().log(), ls = sbar.array().log();
    Vec dsc = (0.5 * (lx - ls)).array().exp();  // √(x̄/s̄)
    Vec rw = (0.5 * (lx + ls)).array().exp();   // √w̄
    ScaledQr qr(A, dsc, 0.0);
    Vec z = rw.cwiseProduct(h);
    Vec p = qr.project(z);
    Direction out;
    out.dx = (1.0 + 2.0 * alpha) * dsc.cwiseProduct(z - p);
    out.ds = (1.0 - 2.0 * alpha) * p.cwiseQuotient(dsc);
    return out;
}

struct PathFollower::Sketch {
    InverseMaintainer inv;
    LeverageMaintainer lev;
    VectorMaintainer vx, vs;
    GradientMaintainer grad;
    std::vector<std::pair<int, int>> gkey;
    Vec xbar, sbar, taubar, xtmp, stmp, tautmp, walpha;
    FeasibilityMaintainer feas;
};

PathFollower::PathFollower(std::shared_ptr<const Mat> A, const Vec& b, const IpmConfig& cfg)
    : A_(std::move(A)), b_(b), cfg_(cfg) {
    if (!A_ || A_->rows() < A_->cols() || A_->cols() < 1) throw std::invalid_argument("PathFollower: need n >= d >= 1");
    if (b_.size() != A_->cols()) throw std::invalid_argument("PathFollower: b has the wrong length");
    k_ = make_constants(cfg_.profile, A_->rows(), A_->cols(), cfg_.eps);
    if (cfg_.gamma > 0) k_.gamma = cfg_.gamma;
    if (cfg_.c_norm > 0) k_.c_norm = cfg_.c_norm;
    if (cfg_.mu_rate > 0) k_.mu_rate = cfg_.mu_rate;
    k_.validate();
}

PathFollower::~PathFollower() = default;

double PathFollower::phi_b_limit() const {
    double ln = std::log(double(std::max<Index>(A_->rows(), 3)));
    return 5.0 * cfg_.zeta * k_.eps * k_.eps / std::pow(ln, 6.0);
}

void PathFollower::advance_mu(double& mu, double target) const {
    if (mu > target)
        mu = std::max(target, (1.0 - k_.mu_rate) * mu);
    else if (mu < target)
        mu = std::min(target, (1.0 + k_.mu_rate) * mu);
}

void PathFollower::violation(const std::string& what) {
    ++rep_.violations;
    if (rep_.first_violation.empty()) rep_.first_violation = what;
    if (cfg_.halt_on_violation) throw InvariantViolation(what);
}

void PathFollower::check(long iter, const Vec& x_old, const Vec& s_old, const Vec& tau_old, const Vec& x,
                         const Vec& s, double mu, double log_phi_old, Vec* tau_new) {
    const Mat& A = *A_;
    ++rep_.checks;
    Vec tau = weighted_tau(A, x, s, k_.alpha);
    double gap = log_gap(Vec(x.cwiseProduct(s)), Vec(mu * tau));
    Vec dxr = (x - x_old).cwiseQuotient(x_old);
    Vec dsr = (s - s_old).cwiseQuotient(s_old);
    Vec dtr = (tau - tau_old).cwiseQuotient(tau_old);
    double nx = mixed_norm(dxr, tau_old, k_.c_norm);
    double ns = mixed_norm(dsr, tau_old, k_.c_norm);
    double nt = mixed_norm(dtr, tau_old, k_.c_norm);
    rep_.max_centrality = std::max(rep_.max_centrality, gap);
    rep_.max_dx = std::max(rep_.max_dx, nx);
    rep_.max_ds = std::max(rep_.max_ds, ns);
    rep_.max_dtau = std::max(rep_.max_dtau, nt);
    const double slack = 1e-9;
    auto fail = [&](const char* what, double val, double lim) {
        std::ostringstream os;
        os << "iteration " << iter << ": " << what << " = " << val << " exceeds " << lim;
        violation(os.str());
    };
    if (gap > 4.0 * k_.eps + slack) fail("centrality gap", gap, 4.0 * k_.eps);
    if (nx > k_.eps / 2.0 + slack) fail("primal step norm", nx, k_.eps / 2.0);
    if (ns > k_.eps / 2.0 + slack) fail("dual step norm", ns, k_.eps / 2.0);
    if (nt > 2.0 * k_.eps + slack) fail("weight change norm", nt, 2.0 * k_.eps);
    if (log_phi_old >= k_.log_phi_break) {
        ++rep_.phi_checks;
        Vec v = mu * tau.array() / (x.array() * s.array());
        if (log_potential(v, k_.lambda) > log_phi_old + std::log1p(-k_.phi_decrement())) ++rep_.phi_decrement_misses;
    }
    if (tau_new) *tau_new = std::move(tau);
}

void PathFollower::emit(long iter, double mu, double log_phi, const Vec& x, const Vec& s, const Vec& dx_rel,
                        const Vec& ds_rel, const Vec& tau) {
    if (!cfg_.trace) return;
    TraceRecord r;
    r.iter = iter;
    r.mu = mu;
    r.phi = log_phi > 700.0 ? HUGE_VAL : std::exp(log_phi);
    r.phi_b = phi_b(*A_, b_, x, x, s, mu);
    r.dxnorm = mixed_norm(dx_rel, tau, k_.c_norm);
    r.dsnorm = mixed_norm(ds_rel, tau, k_.c_norm);
    cfg_.trace(r);
}

PathState PathFollower::centering(const PathState& init, double mu_target) {
    if (!(mu_target > 0.0) || !(init.mu > 0.0)) throw std::invalid_argument("centering: mu must be positive");
    if (init.x.size() != A_->rows() || init.s.size() != A_->rows())
        throw std::invalid_argument("centering: x and s must have n entries");
    if (!(init.x.minCoeff() > 0.0 && init.s.minCoeff() > 0.0))
        throw std::invalid_argument("centering: x and s must be positive");
    rep_ = CenteringReport{};
    std::uint64_t ops0 = ops::read();
    PathState out = cfg_.mode == Mode::exact ? center_exact(init, mu_target) : center_sketched(init, mu_target);
    rep_.ops = ops::read() - ops0;
    return out;
}

PathState PathFollower::center_exact(const PathState& init, double target) {
    const Mat& A = *A_;
    auto solve = exact_weighted_solve(A_);
    Vec x = init.x, s = init.s;
    double mu = init.mu;
    Vec tau = weighted_tau(A, x, s, k_.alpha);
    for (long it = 0;; ++it) {
        Vec v = mu * tau.array() / (x.array() * s.array());
        double lp = log_potential(v, k_.lambda);
        rep_.final_log_phi = lp;
        if (mu == target && lp <= k_.log_phi_break) {
            rep_.reached_target = true;
            break;
        }
        if (it >= cfg_.max_iters) {
            if (cfg_.budget_is_error) throw ConvergenceError("centering: iteration budget exhausted");
            break;
        }
        Vec h = k_.gamma * flat(potential_gradient_normalized(v, k_.lambda), tau, k_.c_norm);
        Direction st = newton_direction_exact(A, x, s, h, k_.alpha);
        Vec x_old = x, s_old = s;
        x += st.dx;
        s += st.ds;
        if (!(x.minCoeff() > 0.0 && s.minCoeff() > 0.0))
            throw InvariantViolation("iteration " + std::to_string(it) + ": iterate left the positive orthant");
        x = exact_correction(A, b_, x, x, s, solve);
        double mu_old = mu;
        advance_mu(mu, target);
        ++rep_.iterations;
        Vec tau_new;
        if (cfg_.check_every > 0 && it % cfg_.check_every == 0)
            check(it, x_old, s_old, tau, x, s, mu, lp, &tau_new);
        else
            tau_new = weighted_tau(A, x, s, k_.alpha);
        if (cfg_.trace)
            emit(it, mu_old, lp, x, s, Vec((x - x_old).cwiseQuotient(x_old)), Vec((s - s_old).cwiseQuotient(s_old)),
                 tau);
        tau = std::move(tau_new);
    }
    return {x, s, tau, mu};
}

void PathFollower::build_sketch(const Vec& x, const Vec& s, const Vec& tau, double mu) {
    const Index n = A_->rows(), d = A_->cols();
    const double ln = std::log(double(std::max<Index>(n, 3)));
    std::optional<FeasibilityMaintainer> keep;
    if (sk_) keep = std::move(sk_->feas);
    sk_ = std::make_unique<Sketch>();
    Sketch& S = *sk_;
    const std::uint64_t seed = derive_seed(cfg_.seed, 0x5c00 + std::uint64_t(rep_.reinits) * 7 + reseeds_);
    S.xbar = S.xtmp = x;
    S.sbar = S.stmp = s;
    S.taubar = S.tautmp = tau;
    S.walpha = (-(1.0 + 2.0 * k_.alpha) * s.array().log() + (1.0 - 2.0 * k_.alpha) * x.array().log()).exp();

    double inv_eps = cfg_.inv_eps > 0 ? cfg_.inv_eps
                     : k_.profile == Profile::theory ? k_.gamma / (512.0 * ln)
                                                     : 0.2;
    InvConfig ic = cfg_.inv;
    ic.seed = derive_seed(seed, 1);
    S.inv = InverseMaintainer(A_, S.walpha, S.taubar, inv_eps, ic);

    LsConfig lc = cfg_.ls;
    lc.seed = derive_seed(seed, 2);
    lc.amv.seed = derive_seed(seed, 3);
    S.lev = LeverageMaintainer(A_, S.inv.w_alg().cwiseSqrt(), std::min(0.25, k_.gamma / 8.0), lc);

    VmConfig vc = cfg_.vm;
    vc.amv.seed = derive_seed(seed, 4);
    S.vx = VectorMaintainer(A_, x.cwiseQuotient(s), x, k_.gamma / 8.0, vc);
    vc.amv.seed = derive_seed(seed, 5);
    S.vs = VectorMaintainer(A_, Vec::Ones(n), s, k_.gamma / 8.0, vc);

    Vec v = mu * tau.array() / (x.array() * s.array());
    S.grad = GradientMaintainer(A_, v, tau, x, k_.gamma, k_.lambda, k_.c_norm);
    S.gkey.resize(n);
    for (Index i = 0; i < n; ++i) S.gkey[i] = S.grad.bucket_of(v[i], tau[i]);

    if (keep) {
        S.feas = std::move(*keep);
    } else {
        FeasConfig fc = cfg_.feas;
        fc.seed = derive_seed(seed, 6);
        const double eh = fc.eps_h;
        S.feas = FeasibilityMaintainer(A_, b_, fc, [this, eh](const Vec& rhs, const Vec& w) {
            return scaled_solve(rhs, w, eh);
        });
    }
    (void)d;
}

// The maintained sample follows s^{-1-2α}x^{1-2α}; x/s differs from it by
// about (μτ)^{2α}, so the solve runs on a rescaled copy of w.
Vec PathFollower::scaled_solve(const Vec& rhs, const Vec& w, double delta) {
    const Vec& wa = sk_->inv.w_alg();
    double kappa = std::exp((w.array().log() - wa.array().log()).mean());
    return sk_->inv.solve(rhs, Vec(w / kappa), delta) / kappa;
}

PathState PathFollower::center_sketched(const PathState& init, double target) {
    const Mat& A = *A_;
    const Index n = A.rows(), d = A.cols();
    const double ln = std::log(double(std::max<Index>(n, 3)));
    const double a = k_.alpha;
    const double solve_delta = cfg_.solve_delta > 0 ? cfg_.solve_delta
                               : k_.profile == Profile::theory
                                   ? k_.eps / (std::pow(double(d), 0.25) * ln * ln * ln)
                                   : 0.1;
    const int reinit_every = cfg_.reinit_every > 0 ? cfg_.reinit_every : int(std::ceil(std::sqrt(double(d))));
    const int snap_every = cfg_.snapshot_every > 0
                               ? cfg_.snapshot_every
                               : std::max(1, int(std::floor(std::sqrt(double(d)) / std::pow(ln, 6.0))));

    Vec tau0 = init.tau.size() == n ? init.tau : weighted_tau(A, init.x, init.s, a);
    sk_.reset();
    build_sketch(init.x, init.s, tau0, init.mu);
    sk_->feas.forget_reference();

    struct Snap {
        Sketch sk;
        Vec x, s, tau;
        bool tau_valid;
        double mu;
        long it;
    };
    Vec x = init.x, s = init.s;
    Vec tau_ex = weighted_tau(A, x, s, a);
    double mu = init.mu;
    bool tau_valid = true;
    Snap snap{*sk_, x, s, tau_ex, tau_valid, mu, 0};
    int tries = 0;
    long since_build = 0;

    for (long it = 0;;) {
        Sketch& S = *sk_;
        const double trig = k_.gamma / 8.0;
        std::vector<char> chx(n, 0), chs(n, 0), cht(n, 0);
        for (Index i = 0; i < n; ++i) {
            if (std::abs(std::log(S.xbar[i] / S.xtmp[i])) > trig) S.xbar[i] = S.xtmp[i], chx[i] = 1;
            if (std::abs(std::log(S.sbar[i] / S.stmp[i])) > trig) S.sbar[i] = S.stmp[i], chs[i] = 1;
            if (std::abs(std::log(S.taubar[i] / S.tautmp[i])) > trig) S.taubar[i] = S.tautmp[i], cht[i] = 1;
        }
        Vec vbar = mu * S.taubar.array() / (S.xbar.array() * S.sbar.array());
        double lp = log_potential(vbar, k_.lambda);
        rep_.final_log_phi = lp;
        if (mu == target && lp <= k_.log_phi_break) {
            rep_.reached_target = true;
            break;
        }
        if (it >= cfg_.max_iters) {
            if (cfg_.budget_is_error) throw ConvergenceError("centering: iteration budget exhausted");
            break;
        }

        for (Index i = 0; i < n; ++i) {
            auto key = S.grad.bucket_of(vbar[i], S.taubar[i]);
            if (chx[i] || cht[i] || key != S.gkey[i]) {
                S.grad.update(i, vbar[i], S.taubar[i], S.xbar[i]);
                S.gkey[i] = key;
            }
        }
        auto [hf, rf] = S.grad.query();
        Vec h = k_.gamma * hf, r = k_.gamma * rf;

        for (Index i = 0; i < n; ++i)
            if (chx[i] || chs[i])
                S.walpha[i] = std::exp(-(1.0 + 2.0 * a) * std::log(S.sbar[i]) + (1.0 - 2.0 * a) * std::log(S.xbar[i]));
        Vec w_old = S.inv.w_alg();
        const Vec& w_new = S.inv.update(S.walpha, S.taubar);
        for (Index j = 0; j < n; ++j)
            if (w_new[j] != w_old[j]) S.lev.scale(j, std::sqrt(w_new[j]));

        Vec g = S.xbar.cwiseQuotient(S.sbar);
        Vec u = scaled_solve(r, g, solve_delta);
        for (Index i = 0; i < n; ++i)
            if (chx[i] || chs[i]) S.vx.scale(i, g[i]);
        S.xtmp = S.vx.query(Vec(-(1.0 + 2.0 * a) * u), Vec((1.0 + 2.0 * a) * S.xbar.cwiseProduct(h)));
        S.stmp = S.vs.query(Vec((1.0 - 2.0 * a) * u), Vec::Zero(n));

        // Ψ_safe^(α) materialized exactly
        ScaledQr qa(A, S.walpha.cwiseSqrt(), 0.0);
        Mat psi_safe(d, d);
        for (Index j = 0; j < d; ++j) psi_safe.col(j) = qa.solve_gram(Vec::Unit(d, j));
        psi_safe = 0.5 * (psi_safe + psi_safe.transpose()).eval();
        S.tautmp = S.lev.query(S.inv.psi(), psi_safe);

        Vec x_mid = S.vx.compute_exact_all();
        Vec s_new = S.vs.compute_exact_all();
        if (!(x_mid.minCoeff() > 0.0 && s_new.minCoeff() > 0.0))
            throw InvariantViolation("iteration " + std::to_string(it) + ": iterate left the positive orthant");
        Vec lam = S.feas.maintain_feasibility(x_mid, s_new, S.tautmp);
        S.xtmp = S.vx.query(lam, Vec::Zero(n));
        Vec x_new = S.vx.compute_exact_all();
        if (!(x_new.minCoeff() > 0.0))
            throw InvariantViolation("iteration " + std::to_string(it) + ": iterate left the positive orthant");
        double mu_old = mu;
        advance_mu(mu, target);
        ++rep_.iterations;

        double pb = phi_b(A, b_, x_new, x_new, s_new, mu);
        if (pb > phi_b_limit()) {
            if (++tries > cfg_.max_retries) {
                std::ostringstream os;
                os << "iteration " << it << ": feasibility potential " << pb << " above " << phi_b_limit()
                   << " after " << cfg_.max_retries << " retries";
                violation(os.str());
            } else {
                ++rep_.retries;
                *sk_ = snap.sk;
                x = snap.x, s = snap.s, tau_ex = snap.tau, tau_valid = snap.tau_valid;
                mu = snap.mu, it = snap.it;
                ++reseeds_;
                sk_->inv.reseed(derive_seed(cfg_.seed, 0xbad0 + reseeds_));
                sk_->feas.reseed(derive_seed(cfg_.seed, 0xbad1 + reseeds_));
                since_build = 0;
                continue;
            }
        }
        rep_.max_phi_b = std::max(rep_.max_phi_b, pb);

        const bool due = cfg_.check_every > 0 && it % cfg_.check_every == 0;
        Vec tau_new;
        if ((due || cfg_.trace) && !tau_valid) tau_ex = weighted_tau(A, x, s, a);
        if (due) {
            double lp_old = log_potential(Vec(mu_old * tau_ex.array() / (x.array() * s.array())), k_.lambda);
            check(it, x, s, tau_ex, x_new, s_new, mu, lp_old, &tau_new);
        }
        if (cfg_.trace)
            emit(it, mu_old, lp, x_new, s_new, Vec((x_new - x).cwiseQuotient(x)), Vec((s_new - s).cwiseQuotient(s)),
                 tau_ex);
        x = std::move(x_new);
        s = std::move(s_new);
        tau_valid = due;
        if (due) tau_ex = std::move(tau_new);
        ++it;

        if (++since_build >= reinit_every) {
            Vec t = sk_->tautmp;
            build_sketch(x, s, t, mu);
            ++rep_.reinits;
            since_build = 0;
        }
        if (it % snap_every == 0) {
            snap = Snap{*sk_, x, s, tau_ex, tau_valid, mu, it};
            tries = 0;
        }
    }
    Vec xf = sk_->vx.compute_exact_all(), sf = sk_->vs.compute_exact_all();
    return {xf, sf, sk_->tautmp, mu};
}

}  // namespace rlp
