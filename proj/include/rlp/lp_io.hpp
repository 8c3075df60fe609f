#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "rlp/types.hpp"

namespace rlp {

// min cᵀx s.t. Aᵀx = b, x >= 0; A is n x d.
struct LpProblem {
    Mat A;
    Vec b, c;
    std::optional<double> R;  // bound on ‖x‖₂ over the feasible set
    std::optional<double> L;  // bound on ‖c‖₂

    Index n() const { return A.rows(); }
    Index d() const { return A.cols(); }
};

// JSON document {"n","d","A" (row-major, flat or nested),"b","c","R"?,"L"?}.
// Throws ParseError naming the line or field at fault.
LpProblem parse_lp(const std::string& text);
LpProblem read_lp_file(const std::string& path);
std::string dump_lp(const LpProblem& lp);
void write_lp_file(const std::string& path, const LpProblem& lp);

// Gaussian A with a positive first column, so the feasible set is bounded;
// b = Aᵀ1 (x = 1 is interior), c Gaussian. R is the ℓ₁ bound b₁/min_i A_{i1}.
LpProblem generate_lp(Index n, Index d, std::uint64_t seed);

}  // namespace rlp
