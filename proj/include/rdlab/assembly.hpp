#pragma once

#include "rdlab/family.hpp"
#include "rdlab/mesh.hpp"

#include <Eigen/Cholesky>

#include <array>
#include <ostream>

namespace rdlab {

/// P1 discretization of the elliptic operator at one eps:
///   K_ij = int p_eps phi_i' phi_j' + int (lambda+V_eps) phi_i phi_j
///        + sum_endpoints (lambda+b_eps) phi_i phi_j,
///   M    = standard mass matrix,
///   K1   = unit-diffusion stiffness (p=1, no potentials, no boundary term).
/// Norms: energy^2 = u'Ku, h1^2 = u'(K1+M)u, l2^2 = u'Mu.
struct DiscreteOperator {
    Matrix K;
    Matrix M;
    Matrix K1;
    double eps = 0.0;
    Mesh1D mesh;
    std::array<int, 2> boundary_nodes{0, 0};

    int size() const { return static_cast<int>(K.rows()); }
};

namespace detail {

// 3-point Gauss-Legendre on [0,1]: exact for degree <= 5.
struct Gauss3 {
    static constexpr double t0 = 0.1127016653792583114820735;
    static constexpr double t1 = 0.5;
    static constexpr double t2 = 0.8872983346207416885179265;
    static constexpr double w0 = 5.0 / 18.0;
    static constexpr double w1 = 8.0 / 18.0;
    static constexpr double w2 = 5.0 / 18.0;
    static constexpr std::array<double, 3> t() { return {t0, t1, t2}; }
    static constexpr std::array<double, 3> w() { return {w0, w1, w2}; }
};

}  // namespace detail

inline DiscreteOperator assemble_operator(const CoefficientFamily& fam, const Mesh1D& mesh,
                                          double eps) {
    validate_mesh(mesh);
    if (eps < 0.0 || eps > fam.eps_max)
        throw std::invalid_argument("assemble: eps outside [0, eps_max]");

    const int n = mesh.n_nodes();
    DiscreteOperator op;
    op.K = Matrix::Zero(n, n);
    op.M = Matrix::Zero(n, n);
    op.K1 = Matrix::Zero(n, n);
    op.eps = eps;
    op.mesh = mesh;
    op.boundary_nodes = {0, n - 1};

    const auto qt = detail::Gauss3::t();
    const auto qw = detail::Gauss3::w();
    for (int e = 0; e < mesh.n_elements; ++e) {
        const double xl = mesh.nodes[e], xr = mesh.nodes[e + 1];
        const double he = xr - xl;
        double ip = 0.0;                        // int p over element
        double ic[2][2] = {{0, 0}, {0, 0}};     // int (lambda+V) Ni Nj
        double im[2][2] = {{0, 0}, {0, 0}};     // int Ni Nj
        for (int q = 0; q < 3; ++q) {
            const double x = xl + qt[q] * he;
            const double wq = qw[q] * he;
            const double pv = fam.p(x, eps);
            if (pv < fam.m0) {
                throw std::invalid_argument("assemble: p(x) below m0 at x=" + format_full(x));
            }
            ip += wq * pv;
            const double cv = fam.lambda + fam.V(x, eps);
            const double N[2] = {1.0 - qt[q], qt[q]};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    ic[i][j] += wq * cv * N[i] * N[j];
                    im[i][j] += wq * N[i] * N[j];
                }
        }
        const double grad2 = 1.0 / (he * he);
        const int idx[2] = {e, e + 1};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double sign = (i == j) ? 1.0 : -1.0;
                op.K(idx[i], idx[j]) += sign * grad2 * ip + ic[i][j];
                op.K1(idx[i], idx[j]) += sign * grad2 * he;  // p = 1 stiffness
                op.M(idx[i], idx[j]) += im[i][j];
            }
    }
    for (int e : {0, 1}) {
        const int node = op.boundary_nodes[e];
        op.K(node, node) += fam.lambda + fam.b(e, eps);
    }

    if (fam.m0 > 0.0) {
        Eigen::LLT<Matrix> llt(op.K);
        if (llt.info() != Eigen::Success)
            throw singular_operator_error("assemble: K not positive definite (m0 violated?)");
    }
    return op;
}

inline double energy_norm(const DiscreteOperator& op, const Vector& u) {
    if (u.size() != op.K.rows()) throw std::invalid_argument("energy_norm: dimension mismatch");
    return std::sqrt(u.dot(op.K * u));
}

inline double h1_norm(const DiscreteOperator& op, const Vector& u) {
    if (u.size() != op.K.rows()) throw std::invalid_argument("h1_norm: dimension mismatch");
    return std::sqrt(u.dot(op.K1 * u) + u.dot(op.M * u));
}

inline double l2_norm(const DiscreteOperator& op, const Vector& u) {
    if (u.size() != op.K.rows()) throw std::invalid_argument("l2_norm: dimension mismatch");
    return std::sqrt(u.dot(op.M * u));
}

/// Boundary load: places q0, q1 at the endpoint rows.
inline Vector boundary_load(const DiscreteOperator& op, double q0, double q1) {
    Vector load = Vector::Zero(op.size());
    load[op.boundary_nodes[0]] = q0;
    load[op.boundary_nodes[1]] = q1;
    return load;
}

/// Solves K u = M rhs_interior + B rhs_boundary. Verifies the residual.
inline Vector solve_elliptic(const DiscreteOperator& op, const Vector& rhs_interior,
                             std::array<double, 2> rhs_boundary) {
    if (rhs_interior.size() != op.K.rows())
        throw std::invalid_argument("solve_elliptic: dimension mismatch");
    const Vector load =
        op.M * rhs_interior + boundary_load(op, rhs_boundary[0], rhs_boundary[1]);
    Eigen::LLT<Matrix> llt(op.K);
    if (llt.info() != Eigen::Success)
        throw singular_operator_error("solve_elliptic: K not positive definite");
    Vector u = llt.solve(load);
    u += llt.solve(load - op.K * u);  // one refinement step
    const double load_max = load.lpNorm<Eigen::Infinity>();
    const double res = (op.K * u - load).lpNorm<Eigen::Infinity>();
    if (load_max > 0.0 && res > 1e-10 * load_max)
        throw singular_operator_error("solve_elliptic: residual too large");
    return u;
}

/// Solves (mu M + K) u = load. mu >= 0 is always admissible; for mu < 0 the
/// shifted matrix may be singular (mu inside the spectrum).
inline Vector resolvent_solve(const DiscreteOperator& op, double mu, const Vector& load) {
    if (load.size() != op.K.rows())
        throw std::invalid_argument("resolvent_solve: dimension mismatch");
    const Matrix shifted = mu * op.M + op.K;
    Eigen::LDLT<Matrix> ldlt(shifted);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-13)
        throw singular_operator_error("resolvent_solve: shifted operator singular at mu=" +
                                      format_full(mu));
    Vector u = ldlt.solve(load);
    u += ldlt.solve(load - shifted * u);
    const double rel =
        (shifted * u - load).lpNorm<Eigen::Infinity>() /
        std::max(load.lpNorm<Eigen::Infinity>(), 1e-300);
    if (rel > 1e-8)
        throw singular_operator_error("resolvent_solve: residual too large (near-singular shift)");
    return u;
}

/// Writes a matrix in the documented text format: one row per line,
/// space-separated decimals with 17 significant digits.
inline void serialize_matrix(std::ostream& os, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << format_full(m(i, j));
        }
        os << '\n';
    }
}

}  // namespace rdlab
