#pragma once

#include "rdlab/gaps.hpp"

#include <Eigen/Eigenvalues>

#include <vector>

namespace rdlab {

/// Ordered eigenpairs of the generalized symmetric problem K phi = lambda M phi.
/// Eigenvectors are M-orthonormal columns with a deterministic sign convention
/// (the entry of largest magnitude is positive).
struct EigenSystem {
    Vector eigenvalues;   // ascending
    Matrix eigenvectors;  // one column per eigenvalue
    DiscreteOperator op;

    int count() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

inline void fix_sign(Eigen::Ref<Vector> v) {
    int imax = 0;
    double amax = -1.0;
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > amax) {
            amax = std::abs(v[i]);
            imax = i;
        }
    }
    if (v[imax] < 0.0) v = -v;
}

}  // namespace detail

/// Lowest `count` generalized eigenpairs of (K, M). Dense symmetric solve,
/// deterministic given inputs.
inline EigenSystem eigenpairs(const DiscreteOperator& op, int count) {
    if (count < 1 || count > op.size())
        throw std::invalid_argument("eigenpairs: count out of range");
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(op.K, op.M,
                                                            Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success)
        throw convergence_error("eigenpairs: eigensolver failed");
    EigenSystem sys;
    sys.eigenvalues = solver.eigenvalues().head(count);
    sys.eigenvectors = solver.eigenvectors().leftCols(count);
    for (int k = 0; k < count; ++k) detail::fix_sign(sys.eigenvectors.col(k));
    sys.op = op;
    return sys;
}

/// Residual and M-orthonormality checks; throws on violation.
inline void validate_eigensystem(const EigenSystem& sys, double residual_tol = 1e-9,
                                 double ortho_tol = 1e-10) {
    Eigen::LLT<Matrix> mllt(sys.op.M);
    for (int k = 0; k < sys.count(); ++k) {
        const Vector r =
            sys.op.K * sys.eigenvectors.col(k) - sys.eigenvalues[k] * (sys.op.M * sys.eigenvectors.col(k));
        const double rnorm = std::sqrt(r.dot(mllt.solve(r)));
        if (rnorm > residual_tol * std::max(std::abs(sys.eigenvalues[k]), 1.0))
            throw convergence_error("eigenpairs: residual too large for mode " + std::to_string(k));
    }
    const Matrix gram = sys.eigenvectors.transpose() * sys.op.M * sys.eigenvectors;
    const double dev = (gram - Matrix::Identity(sys.count(), sys.count())).lpNorm<Eigen::Infinity>();
    if (dev > ortho_tol)
        throw convergence_error("eigenpairs: M-orthonormality violated");
}

/// Rank-m spectral projection Q u = sum_{k<m} (phi_k' M u) phi_k.
struct SpectralProjector {
    int rank = 0;
    Matrix basis;  // n x rank
    DiscreteOperator op;

    Vector apply(const Vector& u) const {
        if (rank == 0) return Vector::Zero(u.size());
        return basis * (basis.transpose() * (op.M * u));
    }
    Matrix matrix() const {
        if (rank == 0) return Matrix::Zero(op.size(), op.size());
        return basis * basis.transpose() * op.M;
    }
};

inline SpectralProjector spectral_projection(const EigenSystem& sys, int m) {
    if (m < 0 || m > sys.count())
        throw std::invalid_argument("spectral_projection: rank out of range");
    if (m > 0 && m < sys.count() &&
        std::abs(sys.eigenvalues[m] - sys.eigenvalues[m - 1]) < 1e-8)
        throw cluster_ambiguity_error("spectral_projection: degenerate spectral cut at m=" +
                                      std::to_string(m));
    SpectralProjector q;
    q.rank = m;
    q.basis = sys.eigenvectors.leftCols(m);
    q.op = sys.op;
    return q;
}

/// Operator norm of Q_a - Q_b between the tagged norms (dense SVD).
inline double projection_gap(const SpectralProjector& qa, const SpectralProjector& qb,
                             NormTag in_norm, NormTag out_norm) {
    if (qa.op.size() != qb.op.size())
        throw std::invalid_argument("projection_gap: different meshes");
    if (qa.rank != qb.rank) throw std::invalid_argument("projection_gap: rank mismatch");
    const Matrix diff = qa.matrix() - qb.matrix();
    return weighted_operator_norm(diff, gram_matrix(qa.op, in_norm), gram_matrix(qa.op, out_norm));
}

/// |lambda_k^A - lambda_k^B| with matching by sorted index. Throws
/// cluster_ambiguity_error when either system has a near-degenerate pair
/// adjacent to k (matching by order would be unreliable).
inline double eigenvalue_gap(const EigenSystem& a, const EigenSystem& b, int k) {
    if (k < 0 || k >= a.count() || k >= b.count())
        throw std::invalid_argument("eigenvalue_gap: index out of range");
    for (const EigenSystem* s : {&a, &b}) {
        if (k > 0 && std::abs(s->eigenvalues[k] - s->eigenvalues[k - 1]) < 1e-8)
            throw cluster_ambiguity_error("eigenvalue_gap: cluster below index " + std::to_string(k));
        if (k + 1 < s->count() && std::abs(s->eigenvalues[k + 1] - s->eigenvalues[k]) < 1e-8)
            throw cluster_ambiguity_error("eigenvalue_gap: cluster above index " + std::to_string(k));
    }
    return std::abs(a.eigenvalues[k] - b.eigenvalues[k]);
}

/// Successive spectral gaps lambda_m - lambda_{m-1}, m = 1 .. count-1.
/// Used to pick the reduction rank at a wide gap.
inline std::vector<double> gap_condition_profile(const EigenSystem& sys) {
    if (sys.count() < 2)
        throw std::invalid_argument("gap_condition_profile: need at least 2 eigenvalues");
    std::vector<double> gaps(sys.count() - 1);
    for (int m = 1; m < sys.count(); ++m) gaps[m - 1] = sys.eigenvalues[m] - sys.eigenvalues[m - 1];
    return gaps;
}

}  // namespace rdlab
