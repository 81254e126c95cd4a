#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace rdlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when a shifted or assembled operator is (numerically) singular.
struct singular_operator_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when an iteration fails to converge within its budget.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when eigenvalues are too close to match by index.
struct cluster_ambiguity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a graph-transform iteration fails to contract.
struct contraction_failure_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Formats a double with 17 significant digits (round-trip exact).
inline std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline constexpr double pi = 3.14159265358979323846;

}  // namespace rdlab
