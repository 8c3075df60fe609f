#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rlp/feasibility.hpp"
#include "rlp/gradient.hpp"
#include "rlp/inverse_maintenance.hpp"
#include "rlp/leverage_maintenance.hpp"
#include "rlp/types.hpp"
#include "rlp/vector_maintenance.hpp"

namespace rlp {

enum class Mode { exact, sketched };
enum class Profile { theory, practical };

const char* to_string(Mode m);
const char* to_string(Profile p);
Mode parse_mode(const std::string& s);
Profile parse_profile(const std::string& s);

struct IpmConstants {
    Profile profile = Profile::practical;
    Index n = 0, d = 0;
    double alpha = 0, eps = 0, lambda = 0, gamma = 0;
    double c_norm = 0;         // weight of the τ-norm in ‖·‖_{τ+∞}
    double mu_rate = 0;        // μ ← (1 - mu_rate)μ
    double log_phi_break = 0;  // stop once ln Φ(v̄) <= this at μ = μ_target

    // Guaranteed per-iteration shrink of Φ while Φ is above the break level.
    double phi_decrement() const;
    void validate() const;
};

// Theory: ε defaults to α/16000 and every constant follows the analysis.
IpmConstants theory_constants(Index n, Index d, double eps = 0.0);
// Practical: λ = max(8, 2ln(2n)/ε), larger γ and μ steps, same invariants.
IpmConstants practical_constants(Index n, Index d, double eps = 0.0);
IpmConstants make_constants(Profile p, Index n, Index d, double eps = 0.0);

struct Direction {
    Vec dx, ds;
};

// δx = (1+2α)(X̄h - X̄S̄^{-1}A H^{-1}AᵀX̄h), δs = (1-2α)A H^{-1}AᵀX̄h.
Direction newton_direction(const Mat& A, const Vec& xbar, const Vec& sbar, const Vec& h, double alpha,
                           const std::function<Vec(const Vec&)>& h_solve);
// Same step with H = AᵀX̄S̄^{-1}A, via an orthogonal projection.
Direction newton_direction_exact(const Mat& A, const Vec& xbar, const Vec& sbar, const Vec& h, double alpha);

struct PathState {
    Vec x, s;
    Vec tau;  // shifted leverage estimate handed between phases
    double mu = 1.0;
};

struct TraceRecord {
    long iter = 0;
    double mu = 0, phi = 0, phi_b = 0, dxnorm = 0, dsnorm = 0;
};

struct IpmConfig {
    Mode mode = Mode::exact;
    Profile profile = Profile::practical;
    // 0 keeps the profile value
    double eps = 0, gamma = 0, c_norm = 0, mu_rate = 0;
    std::uint64_t seed = 1;

    long max_iters = 2000000;
    bool budget_is_error = true;  // otherwise return the partial path
    int check_every = 1;          // exact invariant checks; 0 disables
    bool halt_on_violation = true;

    // Φ_b breach level 5ζε²/ln⁶n (sketched mode); ζ is empirical
    double zeta = 1.0;
    int max_retries = 8;
    int snapshot_every = 0;  // 0 -> max(1, floor(√d/ln⁶n))
    int reinit_every = 0;    // 0 -> ceil(√d)
    double solve_delta = 0;  // accuracy of Ψ_safe; 0 -> profile value
    double inv_eps = 0;      // inverse maintenance accuracy; 0 -> profile value

    FeasConfig feas;
    InvConfig inv;
    LsConfig ls;
    VmConfig vm;

    std::function<void(const TraceRecord&)> trace;
};

struct CenteringReport {
    long iterations = 0;
    long checks = 0;
    long violations = 0;
    long phi_checks = 0, phi_decrement_misses = 0;
    long retries = 0, reinits = 0;
    bool reached_target = false;
    double max_centrality = 0;  // max |ln(xs) - ln(μτ)| over checked iterates
    double max_dx = 0, max_ds = 0, max_dtau = 0;
    double max_phi_b = 0;
    double final_log_phi = 0;
    std::uint64_t ops = 0;
    std::string first_violation;
};

class PathFollower {
public:
    PathFollower(std::shared_ptr<const Mat> A, const Vec& b, const IpmConfig& cfg);
    ~PathFollower();
    PathFollower(const PathFollower&) = delete;
    PathFollower& operator=(const PathFollower&) = delete;

    PathState centering(const PathState& init, double mu_target);

    const IpmConstants& constants() const { return k_; }
    const CenteringReport& report() const { return rep_; }
    const IpmConfig& config() const { return cfg_; }
    const Mat& A() const { return *A_; }
    const Vec& b() const { return b_; }

    // Φ_b level that triggers a rollback.
    double phi_b_limit() const;

private:
    struct Sketch;

    PathState center_exact(const PathState& init, double mu_target);
    PathState center_sketched(const PathState& init, double mu_target);

    void build_sketch(const Vec& x, const Vec& s, const Vec& tau, double mu);
    Vec scaled_solve(const Vec& rhs, const Vec& w, double delta);

    // Exact checks on (x_old, s_old) -> (x, s); tau_old is τ(x_old, s_old).
    void check(long iter, const Vec& x_old, const Vec& s_old, const Vec& tau_old, const Vec& x, const Vec& s,
               double mu, double log_phi_old, Vec* tau_new);
    void violation(const std::string& what);
    void emit(long iter, double mu, double log_phi, const Vec& x, const Vec& s, const Vec& dx_rel,
              const Vec& ds_rel, const Vec& tau);
    void advance_mu(double& mu, double target) const;

    std::shared_ptr<const Mat> A_;
    Vec b_;
    IpmConfig cfg_;
    IpmConstants k_;
    CenteringReport rep_;
    std::unique_ptr<Sketch> sk_;
    std::uint64_t reseeds_ = 0;
};

}  // namespace rlp
