#include "rlp/solver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "rlp/dense_linalg.hpp"
#include "rlp/inverse_maintenance.hpp"
#include "rlp/lewis.hpp"

namespace rlp {

PolishResult final_polish(const Mat& A, const Vec& b, const Vec& x, const Vec& s, double mu, double target,
                          const WeightedSolve& solve, int max_rounds, double c_norm) {
    const Index n = A.rows(), d = A.cols();
    PolishResult out;
    out.x = x;
    double pb = phi_b(A, b, out.x, out.x, s, mu);
    out.phi_b.push_back(pb);
    while (pb > target && out.rounds < max_rounds) {
        Vec nx = exact_correction(A, b, out.x, out.x, s, solve);
        if (!(nx.minCoeff() > 0.0)) throw InvariantViolation("final_polish: correction left the positive orthant");
        Vec tau = ScaledQr(A, Vec(nx.cwiseQuotient(s).cwiseSqrt()), 0.0).leverage().array() + double(d) / double(n);
        out.moves.push_back(mixed_norm(Vec((nx - out.x).cwiseQuotient(out.x)), tau, c_norm));
        out.x = std::move(nx);
        ++out.rounds;
        double next = phi_b(A, b, out.x, out.x, s, mu);
        out.phi_b.push_back(next);
        // round-off floor: no further progress possible
        if (next >= pb) break;
        pb = next;
    }
    return out;
}

Vec extract_solution(const ModifiedLp& m, const Vec& xbar, const Vec& s, double mu, double alpha) {
    const double dd = double(m.A.cols());
    if (!(mu < m.delta * m.delta / (8.0 * dd)))
        throw InvariantViolation("extract_solution: mu = " + std::to_string(mu) + " is not below delta^2/(8d)");
    Vec tau = weighted_tau(m.A, xbar, s, alpha);
    double gap = log_gap(Vec(xbar.cwiseProduct(s)), Vec(mu * tau));
    if (gap > 0.5) throw InvariantViolation("extract_solution: xs is not within 1/2 of mu*tau (gap " + std::to_string(gap) + ")");
    return extract_solution(m, xbar);
}

namespace {

PhaseStats phase_stats(const CenteringReport& r, double mu0, double mu1) {
    PhaseStats p;
    p.iterations = r.iterations;
    p.violations = r.violations;
    p.retries = r.retries;
    p.reinits = r.reinits;
    p.ops = r.ops;
    p.mu_start = mu0;
    p.mu_end = mu1;
    p.max_centrality = r.max_centrality;
    p.max_dx = r.max_dx;
    p.max_ds = r.max_ds;
    p.max_phi_b = r.max_phi_b;
    return p;
}

}  // namespace

SolveReport lp_solve(const LpProblem& lp, double delta, const SolveConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    std::uint64_t ops0 = ops::read();
    if (!lp.R) throw std::invalid_argument("lp_solve: a diameter bound R is required");
    const double R = *lp.R;
    const double L = lp.L ? *lp.L : std::max(lp.c.norm(), 1e-300);

    SolveReport rep;
    rep.n = lp.n();
    rep.d = lp.d();
    rep.R = R;
    rep.L = L;
    rep.delta = delta;
    rep.mode = cfg.ipm.mode;
    rep.profile = cfg.ipm.profile;
    rep.seed = cfg.ipm.seed;

    ModifiedLp m = build_modified_lp(lp.A, lp.b, lp.c, delta, R, L);
    const Index n = m.A.rows(), d = m.A.cols();
    rep.n_mod = n;
    rep.d_mod = d;
    rep.padded = m.padded;
    auto Abar = std::make_shared<const Mat>(m.A);

    IpmConfig icfg = cfg.ipm;
    long offset = 0;
    if (cfg.ipm.trace) {
        icfg.trace = [&offset, tr = cfg.ipm.trace](const TraceRecord& r) {
            TraceRecord q = r;
            q.iter += offset;
            tr(q);
        };
    }
    PathFollower pf(Abar, m.b, icfg);
    const IpmConstants& k = pf.constants();
    rep.constants = k;

    // s ≈ σ(S^{-1/2-α}A) + d/n, so (x = 1, s) is centred at μ = 1 for the cost c_tmp = s
    LewisParams lw;
    lw.p = 1.0 / (1.0 + k.alpha);
    lw.eta = double(d) / double(n);
    lw.eps = cfg.lewis_eps > 0 ? cfg.lewis_eps : std::min(0.01, k.eps / 4.0);
    lw.max_iters = 2000;
    lw.seed = derive_seed(cfg.ipm.seed, 0x1e3);
    LewisResult lr = lewis_weights(m.A, lw);
    if (lr.residual > lw.eps) throw ConvergenceError("lp_solve: Lewis weights did not converge");
    rep.lewis_iterations = lr.iterations;
    rep.lewis_residual = lr.residual;
    const Vec c_tmp = lr.w;

    const double nn = double(n), sd = std::sqrt(double(d));
    const double mu1 = cfg.phase1_const * nn * nn * sd / (k.gamma * k.alpha * k.alpha);
    const double mu2 = delta * delta / (512.0 * nn * nn * nn * nn * double(d));

    PathState st{Vec::Ones(n), c_tmp, c_tmp, 1.0};
    st = pf.centering(st, mu1);
    rep.phase1 = phase_stats(pf.report(), 1.0, st.mu);
    offset = rep.phase1.iterations;

    // cost switch
    Vec s_new = st.s + m.c - c_tmp;
    rep.switch_ratio = ((s_new - st.s).cwiseQuotient(st.s)).cwiseAbs().maxCoeff();
    rep.switch_bound = 16.0 * nn * nn / st.mu;
    if (!(rep.switch_ratio <= rep.switch_bound))
        throw InvariantViolation("lp_solve: cost switch moved s by " + std::to_string(rep.switch_ratio) +
                                 ", above 16n^2/mu = " + std::to_string(rep.switch_bound));
    if (!(s_new.minCoeff() > 0.0)) throw InvariantViolation("lp_solve: cost switch produced a non-positive slack");
    Vec tau_sw = weighted_tau(m.A, st.x, s_new, k.alpha);
    rep.switch_centrality = log_gap(Vec(st.x.cwiseProduct(s_new)), Vec(st.mu * tau_sw));
    if (rep.switch_centrality > 2.0 * k.eps)
        throw InvariantViolation("lp_solve: centrality after the cost switch is " + std::to_string(rep.switch_centrality));
    st.s = s_new;
    st.tau = tau_sw;

    st = pf.centering(st, mu2);
    rep.phase2 = phase_stats(pf.report(), mu1, st.mu);

    WeightedSolve solve;
    if (cfg.ipm.mode == Mode::exact) {
        solve = exact_weighted_solve(Abar);
    } else {
        Vec w = st.x.cwiseQuotient(st.s);
        Vec tau = ScaledQr(m.A, Vec(w.cwiseSqrt()), 0.0).leverage().array() + double(d) / nn;
        InvConfig ic = cfg.ipm.inv;
        ic.seed = derive_seed(cfg.ipm.seed, 0x9011);
        auto inv = std::make_shared<InverseMaintainer>(Abar, w, tau, 0.2, ic);
        solve = [inv](const Vec& rhs, const Vec& wb) { return inv->solve(rhs, wb, 1e-8); };
    }
    PolishResult pr = final_polish(m.A, m.b, st.x, st.s, st.mu, delta, solve, cfg.polish_max_rounds, k.c_norm);
    rep.polish_rounds = pr.rounds;
    rep.phi_b_before_polish = pr.phi_b.front();
    rep.phi_b_after_polish = pr.phi_b.back();
    for (double mv : pr.moves) rep.polish_movement += mv;

    Vec tau_end = weighted_tau(m.A, pr.x, st.s, k.alpha);
    rep.final_centrality = log_gap(Vec(pr.x.cwiseProduct(st.s)), Vec(st.mu * tau_end));
    rep.x = extract_solution(m, pr.x, st.s, st.mu, k.alpha);
    rep.objective = lp.c.dot(rep.x);
    rep.residual = (lp.A.transpose() * rep.x - lp.b).norm();
    rep.objective_tol = delta * lp.c.norm() * R;
    rep.residual_tol = delta * (lp.A.norm() * R + lp.b.norm());
    rep.ops = ops::read() - ops0;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::string report_json(const SolveReport& r, int indent) {
    using nlohmann::json;
    auto phase = [](const PhaseStats& p) {
        return json{{"iterations", p.iterations}, {"violations", p.violations}, {"retries", p.retries},
                    {"reinits", p.reinits},       {"ops", p.ops},               {"mu_start", p.mu_start},
                    {"mu_end", p.mu_end},         {"max_centrality", p.max_centrality},
                    {"max_dx", p.max_dx},         {"max_ds", p.max_ds},         {"max_phi_b", p.max_phi_b}};
    };
    json j;
    j["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
    j["objective"] = r.objective;
    j["residual"] = r.residual;
    j["objective_tol"] = r.objective_tol;
    j["residual_tol"] = r.residual_tol;
    j["n"] = r.n;
    j["d"] = r.d;
    j["n_mod"] = r.n_mod;
    j["d_mod"] = r.d_mod;
    j["padded"] = r.padded;
    j["R"] = r.R;
    j["L"] = r.L;
    j["delta"] = r.delta;
    j["mode"] = to_string(r.mode);
    j["profile"] = to_string(r.profile);
    j["seed"] = r.seed;
    j["constants"] = {{"alpha", r.constants.alpha}, {"eps", r.constants.eps},       {"lambda", r.constants.lambda},
                      {"gamma", r.constants.gamma}, {"c_norm", r.constants.c_norm}, {"mu_rate", r.constants.mu_rate}};
    j["lewis"] = {{"iterations", r.lewis_iterations}, {"residual", r.lewis_residual}};
    j["phase1"] = phase(r.phase1);
    j["phase2"] = phase(r.phase2);
    j["switch"] = {{"ratio", r.switch_ratio}, {"bound", r.switch_bound}, {"centrality", r.switch_centrality}};
    j["polish"] = {{"rounds", r.polish_rounds},
                   {"phi_b_before", r.phi_b_before_polish},
                   {"phi_b_after", r.phi_b_after_polish},
                   {"movement", r.polish_movement}};
    j["final_centrality"] = r.final_centrality;
    j["iterations"] = r.iterations();
    j["ops"] = r.ops;
    j["seconds"] = r.seconds;
    return j.dump(indent);
}

}  // namespace rlp
