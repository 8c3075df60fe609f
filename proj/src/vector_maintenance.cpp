#include "rlp/vector_maintenance.hpp"

#include <cmath>

#include "rlp/rng.hpp"

namespace rlp {

AccumulatedProduct::AccumulatedProduct(std::shared_ptr<const Mat> A, const Vec& g, const AmvConfig& cfg)
    : A_(A), D_(A, g, cfg), g_(g), g_old_(g), hsum_(Vec::Zero(A->cols())),
      in_f_(A->rows(), 0), gbar_old_(g) {}

void AccumulatedProduct::update(const Vec& h) {
    h_.push_back(h);
    hsum_ += h;
}

void AccumulatedProduct::scale(Index i, double u) {
    if (u == g_[i]) return;
    // takes effect from the next update on
    int k = int(h_.size()) + 1;
    auto& list = delta_[i];
    if (!list.empty() && list.back().first == k)
        list.back().second = u;
    else
        list.emplace_back(k, u);
    g_[i] = u;
    D_.scale(i, u);
    mark_exact(i);
}

void AccumulatedProduct::mark_exact(Index i) {
    if (!in_f_[i]) {
        in_f_[i] = 1;
        f_.push_back(i);
    }
}

double AccumulatedProduct::exact_entry(const Mat& A, Index i, double g_old, const std::vector<Vec>& hsuf,
                                       const Journal& journal) {
    const int t = int(hsuf.size());
    if (t == 0) return 0.0;
    auto row = A.row(i);
    auto it = journal.find(i);
    if (it == journal.end()) return g_old * row.dot(hsuf[0]);
    // segment by segment with the scaling in force on each
    double val = 0.0, gc = g_old;
    int from = 1;
    for (const auto& [k, u] : it->second) {
        if (k > t) break;
        if (k > from) val += gc * row.dot(hsuf[from - 1] - hsuf[k - 1]);
        gc = u;
        from = k;
    }
    return val + gc * row.dot(hsuf[from - 1]);
}

Vec AccumulatedProduct::query(double eps) {
    const Index n = A_->rows();
    const int t = int(h_.size());
    std::vector<Vec> hs(t);
    if (t > 0) {
        hs[t - 1] = h_[t - 1];
        for (int k = t - 2; k >= 0; --k) hs[k] = hs[k + 1] + h_[k];
    }

    Vec v = Vec::Zero(n);
    for (Index i : f_) v[i] = exact_entry(*A_, i, g_old_[i], hs, delta_);
    ops::add(double(f_.size()) * A_->cols() * 2.0);

    if (t > 0) {
        for (Index i : f_) D_.scale(i, 0.0);
        Vec w = D_.query(hsum_, eps);
        for (Index i : f_) D_.scale(i, g_[i]);
        for (Index i = 0; i < n; ++i)
            if (!in_f_[i]) v[i] = w[i];
    }

    gbar_old_ = g_old_;
    hbar_ = std::move(hs);
    deltabar_ = std::move(delta_);
    delta_.clear();
    g_old_ = g_;
    h_.clear();
    hsum_.setZero();
    for (Index i : f_) in_f_[i] = 0;
    f_.clear();
    return v;
}

double AccumulatedProduct::compute_exact(Index i) const {
    return exact_entry(*A_, i, gbar_old_[i], hbar_, deltabar_);
}

VectorMaintainer::VectorMaintainer(std::shared_ptr<const Mat> A, const Vec& g, const Vec& x0, double eps,
                                   const VmConfig& cfg)
    : A_(std::move(A)), g_(g), eps_(eps), cfg_(cfg) {
    if (!(eps > 0.0)) throw std::invalid_argument("VectorMaintainer: eps must be positive");
    if ((x0.array() <= 0.0).any()) throw std::invalid_argument("VectorMaintainer: x0 must be positive");
    build(x0);
}

void VectorMaintainer::build(const Vec& x0) {
    const Index n = A_->rows();
    log_n_ = std::max(1, int(std::ceil(std::log2(double(std::max<Index>(n, 2))))));
    x_init_ = x0;
    y_ = x0;
    t_ = 1;
    since_init_ = 0;
    lv_.clear();
    lv_.resize(log_n_ + 1);
    for (int l = 0; l <= log_n_; ++l) {
        Level& L = lv_[l];
        AmvConfig c = cfg_.amv;
        c.seed = derive_seed(cfg_.amv.seed, std::uint64_t(l) + 1000ULL * std::uint64_t(reinits_));
        L.z = x0;
        L.z_prev = x0;
        L.v = Vec::Zero(n);
        L.acc_delta = Vec::Zero(n);
        L.last_delta = Vec::Zero(n);
        L.in_f.assign(n, 0);
        L.D = AccumulatedProduct(A_, g_.cwiseQuotient(x0), c);
    }
}

void VectorMaintainer::scale(Index i, double u) {
    g_[i] = u;
    for (auto& L : lv_) L.D.scale(i, u / L.z[i]);
}

const Vec& VectorMaintainer::query(const Vec& h, const Vec& delta) {
    const Index n = A_->rows();
    const double lo = 8.0 / 9.0, hi = 9.0 / 8.0;
    const double level_eps = eps_ / (4.0 * log_n_);

    for (int l = 0; l <= log_n_; ++l) {
        Level& L = lv_[l];
        L.D.update(h);
        L.acc_delta += delta;
        for (Index i = 0; i < n; ++i) {
            if (L.in_f[i]) continue;
            double z = L.z[i], yy = y_[i];
            if (z < lo * yy || z > hi * yy) {
                // the snapshot no longer tracks x: replace the cached window
                // value by its exact counterpart and keep row i exact
                L.v[i] = L.z_prev[i] * L.D.compute_exact(i) + L.last_delta[i];
                L.D.mark_exact(i);
                L.in_f[i] = 1;
                L.f.push_back(i);
                ++exact_marks_;
            }
        }
        if (t_ % (1L << l) == 0) {
            Vec w = L.D.query(level_eps);
            L.v = L.z.cwiseProduct(w) + L.acc_delta;
            L.last_delta = L.acc_delta;
            L.acc_delta.setZero();
            L.z_prev = L.z;
            for (Index i : L.f) {
                L.z[i] = y_[i];
                L.D.scale(i, g_[i] / L.z[i]);
                L.in_f[i] = 0;
            }
            L.f.clear();
        }
    }

    Vec y = x_init_;
    for (int l = 0; l <= log_n_; ++l)
        if ((t_ >> l) & 1L) y += lv_[l].v;

    const double slo = lo * std::exp(-2.0 * eps_), shi = hi * std::exp(2.0 * eps_);
    bool bad = false;
    for (Index i = 0; i < n; ++i) {
        double r = y[i] / y_[i];
        if (!(y[i] > 0.0) || r < slo || r > shi) bad = true;
    }
    y_ = std::move(y);
    ++t_;
    ++since_init_;
    if (bad) {
        ++violations_;
        if (cfg_.halt_on_violation)
            throw InvariantViolation("VectorMaintainer: per-step stability assumption violated");
    }
    // the levels can only represent t < 2^(log n + 1)
    bool full = (t_ >> (log_n_ + 1)) != 0;
    if ((cfg_.periodic_reinit && since_init_ >= n) || full) {
        Vec x = compute_exact_all();
        ++reinits_;
        build(x);
    }
    return y_;
}

double VectorMaintainer::compute_exact(Index i) const {
    const long tl = t_ - 1;
    double val = x_init_[i];
    for (int l = 0; l <= log_n_; ++l)
        if ((tl >> l) & 1L) {
            const Level& L = lv_[l];
            val += L.z_prev[i] * L.D.compute_exact(i) + L.last_delta[i];
        }
    return val;
}

Vec VectorMaintainer::compute_exact_all() const {
    Vec x(A_->rows());
    for (Index i = 0; i < x.size(); ++i) x[i] = compute_exact(i);
    return x;
}

}  // namespace rlp
