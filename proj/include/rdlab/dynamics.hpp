#pragma once

#include "rdlab/spectral.hpp"

#include <Eigen/LU>

namespace rdlab {

/// Nemitskii-type nonlinearity h(u): interior load M f(u) plus boundary
/// loads g(u) at the endpoint rows.
struct NonlinearTerm {
    CoefficientFamily fam;
    double eps = 0.0;

    Vector load(const DiscreteOperator& op, const Vector& u) const {
        Vector fv(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) fv[i] = fam.f(u[i], eps);
        Vector out = op.M * fv;
        out[op.boundary_nodes[0]] += fam.g(u[op.boundary_nodes[0]], eps);
        out[op.boundary_nodes[1]] += fam.g(u[op.boundary_nodes[1]], eps);
        return out;
    }

    /// Exact Jacobian of the steady-state residual F(u) = K u - h(u):
    /// J = K - M diag(f'(u)) - boundary diag(g'(u)). Nonsymmetric by O(h^2)
    /// (product approximation of the weighted mass matrix).
    Matrix steady_jacobian(const DiscreteOperator& op, const Vector& u) const {
        Matrix j = op.K;
        Vector dfv(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) dfv[i] = fam.df(u[i], eps);
        j -= op.M * dfv.asDiagonal();
        const int b0 = op.boundary_nodes[0], b1 = op.boundary_nodes[1];
        j(b0, b0) -= fam.dg(u[b0], eps);
        j(b1, b1) -= fam.dg(u[b1], eps);
        return j;
    }
};

enum class Scheme { ImexEuler, ImexCN };

struct IntegratorConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::ImexCN;
    double t_final = 1.0;
    double tolerance = 1e-4;  // dt-halving acceptance, certified per experiment
};

/// Prefactored IMEX stepper for a fixed (operator, nonlinearity, config).
/// IMEX-Euler:  (M + dt K) u+ = M u + dt h(u)
/// IMEX-CN:     predictor (M + dt/2 K) um = M u + dt/2 h(u), then
///              (M + dt/2 K) u+ = (M - dt/2 K) u + dt h(um)
class Flow {
public:
    Flow(const DiscreteOperator& op, const NonlinearTerm& nl, const IntegratorConfig& cfg)
        : op_(&op), nl_(&nl), cfg_(cfg) {
        const double c = (cfg.scheme == Scheme::ImexEuler) ? cfg.dt : 0.5 * cfg.dt;
        lhs_.compute(op.M + c * op.K);
        if (lhs_.info() != Eigen::Success)
            throw singular_operator_error("flow: implicit matrix not positive definite");
        if (cfg.scheme == Scheme::ImexCN) rhs_cn_ = op.M - 0.5 * cfg.dt * op.K;
        // Divergence guard: cheap Gershgorin bound on the H1 Gram spectrum.
        const Matrix g = op.K1 + op.M;
        h1_bound_ = std::sqrt(g.cwiseAbs().rowwise().sum().maxCoeff());
    }

    Vector step(const Vector& u) const {
        if (cfg_.scheme == Scheme::ImexEuler)
            return lhs_.solve(op_->M * u + cfg_.dt * nl_->load(*op_, u));
        const Vector um = lhs_.solve(op_->M * u + 0.5 * cfg_.dt * nl_->load(*op_, u));
        return lhs_.solve(rhs_cn_ * u + cfg_.dt * nl_->load(*op_, um));
    }

    /// Repeated stepping to time t (final partial step if t is not a step
    /// multiple). Aborts when the H1 norm exceeds 1e6.
    Vector evolve(Vector u, double t) const {
        if (t < 0.0) throw std::invalid_argument("evolve: negative time");
        const long nsteps = static_cast<long>(std::floor(t / cfg_.dt + 1e-12));
        for (long k = 0; k < nsteps; ++k) {
            u = step(u);
            guard(u);
        }
        const double rem = t - static_cast<double>(nsteps) * cfg_.dt;
        if (rem > 1e-12 * cfg_.dt) {
            IntegratorConfig partial = cfg_;
            partial.dt = rem;
            u = Flow(*op_, *nl_, partial).step(u);
            guard(u);
        }
        return u;
    }

    const IntegratorConfig& config() const { return cfg_; }

private:
    void guard(const Vector& u) const {
        if (h1_bound_ * u.norm() > 1e6 && h1_norm(*op_, u) > 1e6)
            throw std::runtime_error("evolve: H1 norm exceeded 1e6 (dt too large?)");
    }

    const DiscreteOperator* op_;
    const NonlinearTerm* nl_;
    IntegratorConfig cfg_;
    Eigen::LLT<Matrix> lhs_;
    Matrix rhs_cn_;
    double h1_bound_ = 0.0;
};

inline Vector step(const Vector& u, const DiscreteOperator& op, const NonlinearTerm& nl,
                   const IntegratorConfig& cfg) {
    return Flow(op, nl, cfg).step(u);
}

inline Vector evolve(const Vector& u0, double t, const DiscreteOperator& op,
                     const NonlinearTerm& nl, const IntegratorConfig& cfg) {
    return Flow(op, nl, cfg).evolve(u0, t);
}

/// Matrix of the time-t linear semigroup exp(-M^{-1}K t) from the full
/// generalized eigendecomposition (exact in finite dimension).
inline Matrix semigroup_matrix(const EigenSystem& sys, double t) {
    const Vector decay = (-t * sys.eigenvalues.array()).exp();
    return sys.eigenvectors * decay.asDiagonal() * sys.eigenvectors.transpose() * sys.op.M;
}

/// Operator norm of e^{-A t} - e^{-B t} between the tagged norms; the
/// eigendecompositions must carry all modes.
inline double linear_semigroup_gap(const EigenSystem& full_a, const EigenSystem& full_b, double t,
                                   NormTag in_norm, NormTag out_norm) {
    if (t <= 0.0) throw std::invalid_argument("linear_semigroup_gap: t must be positive");
    if (full_a.count() != full_a.op.size() || full_b.count() != full_b.op.size())
        throw std::invalid_argument("linear_semigroup_gap: need full eigendecompositions");
    const Matrix diff = semigroup_matrix(full_a, t) - semigroup_matrix(full_b, t);
    return weighted_operator_norm(diff, gram_matrix(full_a.op, in_norm),
                                  gram_matrix(full_a.op, out_norm));
}

inline double linear_semigroup_gap(const DiscreteOperator& a, const DiscreteOperator& b, double t,
                                   NormTag in_norm, NormTag out_norm) {
    return linear_semigroup_gap(eigenpairs(a, a.size()), eigenpairs(b, b.size()), t, in_norm,
                                out_norm);
}

/// H1 distance of the eps- and 0-flows from the same initial state with the
/// same step sequence (so time-discretization error cancels at first order;
/// eps = 0 gives bitwise zero).
inline double nonlinear_semigroup_gap(const CoefficientFamily& fam, const Mesh1D& mesh, double eps,
                                      const Vector& u0, double t, const IntegratorConfig& cfg) {
    const DiscreteOperator op_eps = assemble_operator(fam, mesh, eps);
    const DiscreteOperator op_0 = assemble_operator(fam, mesh, 0.0);
    const NonlinearTerm nl_eps{fam, eps};
    const NonlinearTerm nl_0{fam, 0.0};
    const Vector ue = Flow(op_eps, nl_eps, cfg).evolve(u0, t);
    const Vector u0t = Flow(op_0, nl_0, cfg).evolve(u0, t);
    return h1_norm(op_0, ue - u0t);
}

struct EquilibriumSet {
    std::vector<Vector> points;
    std::vector<int> unstable_dims;   // Morse index per point
    std::vector<bool> hyperbolic;
    std::vector<double> residuals;    // Newton residual in the M^{-1} norm
    double eps = 0.0;

    int count() const { return static_cast<int>(points.size()); }
};

struct EquilibriumOptions {
    double newton_tol = 1e-11;
    int max_newton = 60;
    double dedup_tol = 1e-6;         // H1 distance
    double hyperbolic_margin = 1e-6;
    double blowup_norm = 1e4;        // drop guesses whose iterates escape
};

/// Guess sweep: constants in [-u_max, u_max] plus +-0.5 eigenfunction
/// perturbations of each constant.
inline std::vector<Vector> default_equilibrium_guesses(const DiscreteOperator& op,
                                                       const CoefficientFamily& fam,
                                                       int n_constants = 21) {
    const EigenSystem sys = eigenpairs(op, 2);
    std::vector<Vector> guesses;
    guesses.reserve(static_cast<size_t>(n_constants) * 5);
    const int n = op.size();
    for (int i = 0; i < n_constants; ++i) {
        const double c = -fam.u_max + 2.0 * fam.u_max * i / (n_constants - 1);
        const Vector base = Vector::Constant(n, c);
        guesses.push_back(base);
        for (int k = 0; k < 2; ++k) {
            guesses.push_back(base + 0.5 * sys.eigenvectors.col(k));
            guesses.push_back(base - 0.5 * sys.eigenvectors.col(k));
        }
    }
    return guesses;
}

/// Newton search for equilibria K u = h(u) over a guess sweep, with
/// deduplication, Morse indices from the (J, M) pencil, and hyperbolicity
/// certification. Non-converging guesses are dropped; an empty result is an
/// error (0 is always an equilibrium of the default family).
inline EquilibriumSet find_equilibria(const CoefficientFamily& fam, const Mesh1D& mesh, double eps,
                                      const std::vector<Vector>& guesses,
                                      EquilibriumOptions opts = {}) {
    if (guesses.empty()) throw std::invalid_argument("find_equilibria: no guesses");
    const DiscreteOperator op = assemble_operator(fam, mesh, eps);
    const NonlinearTerm nl{fam, eps};
    Eigen::LLT<Matrix> mllt(op.M);

    const auto residual_norm = [&](const Vector& r) { return std::sqrt(r.dot(mllt.solve(r))); };

    EquilibriumSet set;
    set.eps = eps;
    for (const Vector& guess : guesses) {
        Vector u = guess;
        bool converged = false;
        for (int it = 0; it < opts.max_newton; ++it) {
            const Vector F = op.K * u - nl.load(op, u);
            if (residual_norm(F) <= opts.newton_tol) {
                converged = true;
                break;
            }
            const Matrix J = nl.steady_jacobian(op, u);
            Eigen::PartialPivLU<Matrix> lu(J);
            const Vector du = lu.solve(F);
            if (!du.allFinite()) break;
            u -= du;
            if (u.norm() > opts.blowup_norm) break;
        }
        if (!converged) continue;
        bool duplicate = false;
        for (const Vector& p : set.points) {
            if (h1_norm(op, u - p) < opts.dedup_tol) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) set.points.push_back(u);
    }
    if (set.points.empty()) throw std::runtime_error("find_equilibria: empty result set");

    std::sort(set.points.begin(), set.points.end(),
              [](const Vector& a, const Vector& b) { return a.mean() < b.mean(); });
    for (const Vector& u : set.points) {
        const Matrix D = mllt.solve(nl.steady_jacobian(op, u));
        Eigen::EigenSolver<Matrix> es(D, false);
        int index = 0;
        double min_abs_re = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double re = es.eigenvalues()[i].real();
            if (re < 0.0) ++index;
            min_abs_re = std::min(min_abs_re, std::abs(re));
        }
        set.unstable_dims.push_back(index);
        set.hyperbolic.push_back(min_abs_re >= opts.hyperbolic_margin);
        set.residuals.push_back(residual_norm(op.K * u - nl.load(op, u)));
    }
    return set;
}

/// Per-pair H1 distances after nearest-neighbor matching (which must be a
/// bijection). Cardinality mismatch is an error, not a heuristic.
inline std::vector<double> equilibrium_gap(const EquilibriumSet& a, const EquilibriumSet& b,
                                           const DiscreteOperator& norm_op) {
    if (a.count() != b.count())
        throw std::runtime_error("equilibrium_gap: cardinality mismatch (" +
                                 std::to_string(a.count()) + " vs " + std::to_string(b.count()) + ")");
    const int n = a.count();
    Matrix dist(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dist(i, j) = h1_norm(norm_op, a.points[i] - b.points[j]);
    std::vector<int> match(n);
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
        int jmin = 0;
        dist.row(i).minCoeff(&jmin);
        match[i] = jmin;
        if (used[jmin])
            throw std::runtime_error("equilibrium_gap: nearest-neighbor matching not a bijection");
        used[jmin] = true;
    }
    for (int j = 0; j < n; ++j) {  // mutual nearest-neighbor check
        int imin = 0;
        dist.col(j).minCoeff(&imin);
        if (match[imin] != j)
            throw std::runtime_error("equilibrium_gap: nearest-neighbor matching not mutual");
    }
    std::vector<double> gaps(n);
    for (int i = 0; i < n; ++i) gaps[i] = dist(i, match[i]);
    return gaps;
}

}  // namespace rdlab
