#include "rlp/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rlp {

double log_potential(const Vec& v, double lambda) {
    if (v.size() == 0) return -INFINITY;
    double m = lambda * (v.array() - 1.0).abs().maxCoeff();
    double acc = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
        double t = lambda * (v[i] - 1.0);
        acc += std::exp(t - m) + std::exp(-t - m);
    }
    return m + std::log(acc);
}

double potential(const Vec& v, double lambda) {
    double m = lambda * (v.array() - 1.0).abs().maxCoeff();
    if (m <= 500.0) {
        double acc = 0.0;
        for (Index i = 0; i < v.size(); ++i) {
            double t = lambda * (v[i] - 1.0);
            acc += std::exp(t) + std::exp(-t);
        }
        return acc;
    }
    return std::exp(log_potential(v, lambda));
}

Vec potential_gradient(const Vec& v, double lambda) {
    Vec g(v.size());
    for (Index i = 0; i < v.size(); ++i) g[i] = 2.0 * lambda * std::sinh(lambda * (v[i] - 1.0));
    return g;
}

Vec potential_gradient_normalized(const Vec& v, double lambda) {
    Vec g = Vec::Zero(v.size());
    if (v.size() == 0) return g;
    double m = lambda * (v.array() - 1.0).abs().maxCoeff();
    if (m == 0.0) return g;
    for (Index i = 0; i < v.size(); ++i) {
        double t = lambda * (v[i] - 1.0);
        double a = std::abs(t);
        // sinh(a)/sinh(m) without overflow
        double r = std::exp(a - m) * (-std::expm1(-2.0 * a)) / (-std::expm1(-2.0 * m));
        g[i] = t < 0 ? -r : r;
    }
    return g;
}

Vec flat_grouped(const Vec& g, const Vec& tau, const Vec& counts, double c_norm) {
    const Index n = g.size();
    if (tau.size() != n || counts.size() != n) throw std::invalid_argument("flat: length mismatch");
    if (!(c_norm > 0.0)) throw std::invalid_argument("flat: c_norm must be positive");
    Vec out = Vec::Zero(n);

    std::vector<Index> act;
    for (Index j = 0; j < n; ++j) {
        if (!(tau[j] > 0.0)) throw std::invalid_argument("flat: tau must be positive");
        if (g[j] != 0.0 && counts[j] > 0.0) act.push_back(j);
    }
    if (act.empty()) return out;
    auto ratio = [&](Index j) { return tau[j] / std::abs(g[j]); };
    std::stable_sort(act.begin(), act.end(), [&](Index a, Index b) { return ratio(a) < ratio(b); });

    // The optimum has w_j = sign(g_j)·min(a, θ|g_j|/τ_j): entries with the
    // smallest τ/|g| saturate the ∞-part. For each number m of saturated
    // groups the value is a·S + θ·G subject to a²T + θ²G = (1-a)²K.
    const Index M = Index(act.size());
    const double K = 1.0 / (c_norm * c_norm);
    std::vector<double> r(M + 2), T(M + 1), S(M + 1), G(M + 1);
    r[0] = 0.0;
    r[M + 1] = INFINITY;
    for (Index k = 0; k < M; ++k) r[k + 1] = ratio(act[k]);
    T[0] = S[0] = 0.0;
    for (Index k = 0; k < M; ++k) {
        Index j = act[k];
        T[k + 1] = T[k] + counts[j] * tau[j];
        S[k + 1] = S[k] + counts[j] * std::abs(g[j]);
    }
    G[M] = 0.0;
    for (Index k = M - 1; k >= 0; --k) {
        Index j = act[k];
        G[k] = G[k + 1] + counts[j] * g[j] * g[j] / tau[j];
    }

    double best_v = -1.0, best_a = 0.0, best_theta = 0.0;
    auto consider = [&](double a, double theta, double val) {
        if (val > best_v) {
            best_v = val;
            best_a = a;
            best_theta = theta;
        }
    };

    // breakpoints: θ = a·r_m with the first m groups saturated
    for (Index m = 1; m <= M; ++m) {
        double a = std::sqrt(K) / (std::sqrt(T[m] + r[m] * r[m] * G[m]) + std::sqrt(K));
        consider(a, a * r[m], a * (S[m] + r[m] * G[m]));
    }
    // interior stationary points of each piece
    for (Index m = 0; m < M; ++m) {
        double Tm = T[m], Sm = S[m], Gm = G[m];
        if (!(Gm > 0.0)) continue;
        double A2 = Sm * Sm * (K - Tm) - Gm * (Tm - K) * (Tm - K);
        double A1 = -2.0 * K * Sm * Sm - 2.0 * Gm * K * (Tm - K);
        double A0 = Sm * Sm * K - Gm * K * K;
        double roots[2];
        int nr = 0;
        double scale = std::abs(A2) + std::abs(A1) + std::abs(A0);
        if (std::abs(A2) <= 1e-14 * scale) {
            if (A1 != 0.0) roots[nr++] = -A0 / A1;
        } else {
            double disc = A1 * A1 - 4.0 * A2 * A0;
            if (disc >= 0.0) {
                double sq = std::sqrt(disc);
                double qq = -0.5 * (A1 + (A1 >= 0 ? sq : -sq));
                roots[nr++] = qq / A2;
                if (qq != 0.0) roots[nr++] = A0 / qq;
            }
        }
        for (int k = 0; k < nr; ++k) {
            double a = roots[k];
            if (!(a > 0.0 && a < 1.0)) continue;
            double q = K * (1.0 - a) * (1.0 - a) - Tm * a * a;
            if (!(q > 0.0)) continue;
            double theta = std::sqrt(q / Gm);
            double t = theta / a;
            if (t < r[m] || t > r[m + 1]) continue;
            consider(a, theta, a * Sm + theta * Gm);
        }
    }

    for (Index k = 0; k < M; ++k) {
        Index j = act[k];
        double mag = std::min(best_a, best_theta * std::abs(g[j]) / tau[j]);
        out[j] = g[j] > 0 ? mag : -mag;
    }
    // guard against rounding pushing the point outside the ball
    double nrm = out.cwiseAbs().maxCoeff() +
                 c_norm * std::sqrt((counts.array() * tau.array() * out.array().square()).sum());
    if (nrm > 1.0) out /= nrm;
    return out;
}

Vec flat(const Vec& g, const Vec& tau, double c_norm) {
    return flat_grouped(g, tau, Vec::Ones(g.size()), c_norm);
}

GradientMaintainer::GradientMaintainer(std::shared_ptr<const Mat> A, const Vec& v, const Vec& tau,
                                       const Vec& x, double eps, double lambda, double c_norm)
    : A_(std::move(A)), v_(v), tau_(tau), x_(x), eps_(eps), lambda_(lambda), c_norm_(c_norm) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("GradientMaintainer: eps must lie in (0,1)");
    log1m_ = std::log1p(-eps_);
    key_.resize(v_.size());
    for (Index i = 0; i < v_.size(); ++i) insert(i);
}

std::pair<int, int> GradientMaintainer::bucket_of(double v, double tau) const {
    const double n = double(A_->rows()), d = double(A_->cols());
    if (!(v >= 0.5 && v <= 2.0))
        throw InvariantViolation("GradientMaintainer: v outside [0.5, 2]");
    if (!(tau >= (d / n) * std::exp(-1.0) && tau <= 2.0 * std::exp(1.0)))
        throw InvariantViolation("GradientMaintainer: tau outside its assumed range");
    int l = int(std::floor((v - 0.5) / (eps_ / 2.0)));
    int k = int(std::floor(std::log(tau) / log1m_));
    return {k, l};
}

double GradientMaintainer::rounded_v(Index i) const { return 0.5 + key_[i].second * eps_ / 2.0; }
double GradientMaintainer::rounded_tau(Index i) const { return std::exp((key_[i].first + 1) * log1m_); }

Vec GradientMaintainer::rounded_v() const {
    Vec out(v_.size());
    for (Index i = 0; i < v_.size(); ++i) out[i] = rounded_v(i);
    return out;
}

Vec GradientMaintainer::rounded_tau() const {
    Vec out(v_.size());
    for (Index i = 0; i < v_.size(); ++i) out[i] = rounded_tau(i);
    return out;
}

void GradientMaintainer::insert(Index i) {
    Key key = bucket_of(v_[i], tau_[i]);
    key_[i] = key;
    auto& b = buckets_[key];
    if (b.count == 0) b.w = Vec::Zero(A_->cols());
    ++b.count;
    b.w += x_[i] * A_->row(i).transpose();
}

void GradientMaintainer::remove(Index i) {
    auto it = buckets_.find(key_[i]);
    it->second.w -= x_[i] * A_->row(i).transpose();
    if (--it->second.count == 0) buckets_.erase(it);
}

void GradientMaintainer::update(Index i, double v, double tau, double x) {
    Key key = bucket_of(v, tau);  // validates before mutating
    (void)key;
    remove(i);
    v_[i] = v;
    tau_[i] = tau;
    x_[i] = x;
    insert(i);
}

std::pair<Vec, Vec> GradientMaintainer::query() const {
    const Index B = Index(buckets_.size());
    Vec gv(B), tv(B), cnt(B);
    std::map<Key, Index> pos;
    Index b = 0;
    double mmax = 0.0;
    for (const auto& [key, bucket] : buckets_) {
        double vbar = 0.5 + key.second * eps_ / 2.0;
        gv[b] = lambda_ * (vbar - 1.0);
        mmax = std::max(mmax, std::abs(gv[b]));
        tv[b] = std::exp((key.first + 1) * log1m_);
        cnt[b] = double(bucket.count);
        pos[key] = b++;
    }
    // ∇φ(v̄) up to a positive factor, which ♭ ignores
    Vec grad = Vec::Zero(B);
    if (mmax > 0.0)
        for (Index k = 0; k < B; ++k) {
            double a = std::abs(gv[k]);
            double r = std::exp(a - mmax) * (-std::expm1(-2.0 * a)) / (-std::expm1(-2.0 * mmax));
            grad[k] = gv[k] < 0 ? -r : r;
        }
    Vec s = flat_grouped(grad, tv, cnt, c_norm_);

    Vec h(v_.size());
    for (Index i = 0; i < v_.size(); ++i) h[i] = s[pos.at(key_[i])];
    Vec axh = Vec::Zero(A_->cols());
    b = 0;
    for (const auto& kv : buckets_) axh += s[b++] * kv.second.w;
    return {h, axh};
}

double GradientMaintainer::max_cache_error() const {
    double err = 0.0;
    std::map<Key, Vec> fresh;
    for (Index i = 0; i < v_.size(); ++i) {
        auto& w = fresh[key_[i]];
        if (w.size() == 0) w = Vec::Zero(A_->cols());
        w += x_[i] * A_->row(i).transpose();
    }
    if (fresh.size() != buckets_.size()) return INFINITY;
    for (const auto& [key, bucket] : buckets_) err = std::max(err, (bucket.w - fresh.at(key)).cwiseAbs().maxCoeff());
    return err;
}

}  // namespace rlp
