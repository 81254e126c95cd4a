#pragma once

#include "rdlab/assembly.hpp"
#include "rdlab/rng.hpp"

#include <Eigen/SVD>

#include <functional>

namespace rdlab {

/// Norm tags for operator-gap measurements. L2 uses the mass matrix M,
/// H1 uses K1 + M, ENERGY uses the (first) operator's K.
enum class NormTag { L2, H1, Energy };

inline Matrix gram_matrix(const DiscreteOperator& op, NormTag tag) {
    switch (tag) {
        case NormTag::L2: return op.M;
        case NormTag::H1: return op.K1 + op.M;
        case NormTag::Energy: return op.K;
    }
    throw std::invalid_argument("gram_matrix: unknown norm tag");
}

/// Operator norm of a dense map T between Gram norms: the largest singular
/// value of L_out' T L_in^{-T}, where G = L L' are Cholesky factors.
inline double weighted_operator_norm(const Matrix& T, const Matrix& G_in, const Matrix& G_out) {
    Eigen::LLT<Matrix> lin(G_in), lout(G_out);
    if (lin.info() != Eigen::Success || lout.info() != Eigen::Success)
        throw singular_operator_error("weighted_operator_norm: Gram matrix not SPD");
    // Z = T L_in^{-T}  via  Z' = L_in^{-1} T'
    Matrix Zt = lin.matrixL().solve(T.transpose());
    Matrix Y = lout.matrixL().transpose() * Zt.transpose();
    return Y.bdcSvd().singularValues()(0);
}

struct GapOptions {
    double rel_tol = 1e-8;    // Rayleigh-quotient stall tolerance
    double agree_tol = 1e-6;  // certification: two random starts must agree
    int max_iter = 50000;
    std::uint64_t seed = 0x9e3779b9;
};

/// Operator norm of the resolvent difference (K_A^{-1} - K_B^{-1}) acting on
/// L2 data, i.e. of w -> (K_A^{-1} - K_B^{-1}) M w, measured from in_norm to
/// out_norm. Power iteration on the Gram-weighted composition, certified by
/// two independent random starts. The ENERGY tag refers to A's energy norm.
inline double operator_gap_norm(const DiscreteOperator& A, const DiscreteOperator& B,
                                NormTag in_norm, NormTag out_norm, GapOptions opts = {}) {
    if (A.size() != B.size())
        throw std::invalid_argument("operator_gap_norm: operators on different meshes");
    const int n = A.size();
    Eigen::LLT<Matrix> ka(A.K), kb(B.K);
    if (ka.info() != Eigen::Success || kb.info() != Eigen::Success)
        throw singular_operator_error("operator_gap_norm: operator not positive definite");
    const Matrix G_in = gram_matrix(A, in_norm);
    const Matrix G_out = gram_matrix(A, out_norm);
    Eigen::LLT<Matrix> gin(G_in);

    const auto apply_T = [&](const Vector& w) -> Vector {
        const Vector load = A.M * w;
        return ka.solve(load) - kb.solve(load);
    };
    const auto apply_Tt = [&](const Vector& w) -> Vector {
        // T' = M (K_A^{-1} - K_B^{-1}) since K, M are symmetric
        return A.M * (ka.solve(w) - kb.solve(w));
    };

    const auto run = [&](std::uint64_t idx) -> double {
        auto rng = make_rng(opts.seed, "operator_gap_norm", idx);
        Vector u = random_vector(rng, n);
        u /= std::sqrt(u.dot(G_in * u));
        double rq_prev = -1.0;
        for (int it = 0; it < opts.max_iter; ++it) {
            const Vector Tu = apply_T(u);
            const double rq = Tu.dot(G_out * Tu);  // |u|_in = 1
            if (rq < 1e-250) return 0.0;           // identical operators
            if (rq_prev >= 0.0 && std::abs(rq - rq_prev) <= opts.rel_tol * rq)
                return std::sqrt(rq);
            rq_prev = rq;
            Vector next = gin.solve(apply_Tt(G_out * Tu));
            const double norm_in = std::sqrt(next.dot(G_in * next));
            if (norm_in == 0.0) return 0.0;
            u = next / norm_in;
        }
        throw convergence_error("operator_gap_norm: power iteration did not converge");
    };

    const double r1 = run(1);
    const double r2 = run(2);
    const double scale = std::max({r1, r2, 1e-300});
    if (std::abs(r1 - r2) > opts.agree_tol * scale)
        throw convergence_error("operator_gap_norm: independent starts disagree");
    return std::max(r1, r2);
}

/// Dense oracle for operator_gap_norm: explicitly forms the difference and
/// takes the Gram-weighted SVD. Intended for small n.
inline double operator_gap_norm_svd(const DiscreteOperator& A, const DiscreteOperator& B,
                                    NormTag in_norm, NormTag out_norm) {
    if (A.size() != B.size())
        throw std::invalid_argument("operator_gap_norm_svd: operators on different meshes");
    Eigen::LLT<Matrix> ka(A.K), kb(B.K);
    if (ka.info() != Eigen::Success || kb.info() != Eigen::Success)
        throw singular_operator_error("operator_gap_norm_svd: operator not positive definite");
    const Matrix T = ka.solve(A.M) - kb.solve(A.M);
    return weighted_operator_norm(T, gram_matrix(A, in_norm), gram_matrix(A, out_norm));
}

}  // namespace rdlab
