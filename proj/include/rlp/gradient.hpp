#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "rlp/types.hpp"

namespace rlp {

// Φ(v) = Σ exp(λ(v_i-1)) + exp(-λ(v_i-1))
double potential(const Vec& v, double lambda);
double log_potential(const Vec& v, double lambda);
Vec potential_gradient(const Vec& v, double lambda);
// ∇Φ(v)/‖∇Φ(v)‖_∞, safe when λ|v-1| is large; returns 0 for v ≡ 1.
Vec potential_gradient_normalized(const Vec& v, double lambda);

// argmax of <g, w> over ‖w‖_∞ + c_norm·sqrt(Σ τ_i w_i²) <= 1.
Vec flat(const Vec& g, const Vec& tau, double c_norm);

// Same problem where entry j stands for counts[j] identical coordinates.
// Returns the common value for each group.
Vec flat_grouped(const Vec& g, const Vec& tau, const Vec& counts, double c_norm);

// Maintains the partition of [n] into (τ, v) buckets and Aᵀ X 1_bucket so
// that ∇Φ(v̄)^♭(τ̄) and Aᵀ X ∇Φ(v̄)^♭(τ̄) cost O(#buckets·d) per query.
class GradientMaintainer {
public:
    GradientMaintainer() = default;
    GradientMaintainer(std::shared_ptr<const Mat> A, const Vec& v, const Vec& tau, const Vec& x,
                       double eps, double lambda, double c_norm);

    void update(Index i, double v, double tau, double x);
    // (flat vector, Aᵀ X flat vector)
    std::pair<Vec, Vec> query() const;

    // Bucket-rounded values: v̄ rounds down to the ε/2 grid from 0.5,
    // τ̄ rounds down to a power of (1-ε).
    double rounded_v(Index i) const;
    double rounded_tau(Index i) const;
    Vec rounded_v() const;
    Vec rounded_tau() const;
    std::pair<int, int> bucket_of(double v, double tau) const;
    std::size_t bucket_count() const { return buckets_.size(); }

    // For coherence tests: the maintained Aᵀ X 1_bucket vs a recomputation.
    double max_cache_error() const;

private:
    struct Bucket {
        Index count = 0;
        Vec w;
    };
    using Key = std::pair<int, int>;  // (k, l)

    void insert(Index i);
    void remove(Index i);

    std::shared_ptr<const Mat> A_;
    Vec v_, tau_, x_;
    double eps_ = 0.1, lambda_ = 1.0, c_norm_ = 1.0;
    double log1m_ = 0.0;
    std::vector<Key> key_;
    std::map<Key, Bucket> buckets_;
};

}  // namespace rlp
