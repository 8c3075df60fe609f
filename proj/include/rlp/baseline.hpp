#pragma once

#include <string>
#include <vector>

#include "rlp/types.hpp"

namespace rlp {

enum class LpStatus { optimal, infeasible, unbounded, stalled };
const char* to_string(LpStatus s);

struct BaselineOptions {
    double gap = 1e-9;          // stop once (xᵀs + τκ)/τ² <= gap·max(1, |cᵀx|)
    Index enumerate_max_n = 12; // vertex enumeration cross-check up to this n
    long max_iters = 200000;
};

struct BaselineResult {
    LpStatus status = LpStatus::stalled;
    Vec x;  // optimal vertex when enumerated, interior near-optimal point otherwise
    double objective = 0.0;
    double ipm_objective = 0.0;
    long iterations = 0;
    bool enumerated = false;
    double enum_gap = 0.0;  // |IPM objective - vertex objective|
};

// Textbook short-step primal-dual path following (uniform weights) on the
// homogeneous self-dual embedding of min cᵀx, Aᵀx = b, x >= 0.
BaselineResult baseline_solve(const Mat& A, const Vec& b, const Vec& c, const BaselineOptions& opt = {});

struct VertexResult {
    bool found = false;
    Vec x;
    double objective = 0.0;
    std::vector<Index> basis;
};

// Best basic feasible solution; ties within tol go to the lexicographically
// smallest basis.
VertexResult enumerate_vertices(const Mat& A, const Vec& b, const Vec& c, double tol = 1e-9);

}  // namespace rlp
