#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rlp {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

struct LinalgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an iterate leaves the region where the method's guarantees hold.
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rough flop counter for dense kernels. Only used for scaling telemetry.
namespace ops {
inline std::uint64_t counter = 0;
inline void add(double flops) { counter += static_cast<std::uint64_t>(flops); }
inline std::uint64_t read() { return counter; }
inline void reset() { counter = 0; }
}  // namespace ops

// x ~_eps y in the multiplicative sense: max |ln x_i - ln y_i|.
inline double log_gap(const Vec& x, const Vec& y) {
    if (x.size() == 0) return 0.0;
    return (x.array().log() - y.array().log()).abs().maxCoeff();
}

inline bool approx_eq(const Vec& x, const Vec& y, double eps) {
    return log_gap(x, y) <= eps;
}

}  // namespace rlp
