#include "rdlab/assembly.hpp"
#include "rdlab/gaps.hpp"
#include "rdlab/rng.hpp"
#include "rdlab/spectral.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace rdlab;

namespace {

// Independent 10-point Gauss-Legendre quadrature on [a, b] (test oracle).
double gauss10(const std::function<double(double)>& f, double a, double b) {
    static const double xs[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                 0.8650633666889845, 0.9739065285171717};
    static const double ws[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                 0.1494513491505806, 0.0666713443086881};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < 5; ++i)
        sum += ws[i] * (f(mid + half * xs[i]) + f(mid - half * xs[i]));
    return half * sum;
}

CoefficientFamily plain_family(std::function<double(double)> p, double lambda, double bval,
                               std::function<double(double)> V = [](double) { return 0.0; }) {
    CoefficientFamily fam;
    fam.p = [p](double x, double) { return p(x); };
    fam.V = [V](double x, double) { return V(x); };
    fam.b = [bval](int, double) { return bval; };
    fam.lambda = lambda;
    fam.f = [](double, double) { return 0.0; };
    fam.g = [](double, double) { return 0.0; };
    fam.df = [](double, double) { return 0.0; };
    fam.dg = [](double, double) { return 0.0; };
    auto zero = [](double) { return 0.0; };
    fam.p_gap = fam.eta = fam.tau = fam.kappa = fam.xi = zero;
    fam.m0 = 0.0;
    fam.M0 = compute_sandwich_bound(fam);
    return fam;
}

}  // namespace

TEST_CASE("assembly: n=2 pure stiffness matches the analytic P1 matrix") {
    const auto fam = neumann_family(0.0);
    const auto op = assemble_operator(fam, uniform_mesh(2), 0.0);
    Matrix expected(3, 3);
    expected << 2, -2, 0, -2, 4, -2, 0, -2, 2;
    REQUIRE((op.K - expected).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("assembly: variable diffusion entries match an exact integration oracle") {
    auto fam = plain_family([](double x) { return 1.0 + x; }, 0.0, 0.0);
    const auto mesh = uniform_mesh(2);
    const auto op = assemble_operator(fam, mesh, 0.0);
    // K_ij = int (1+x) phi_i' phi_j' (no potential, no boundary terms)
    const double h = 0.5;
    auto p = [](double x) { return 1.0 + x; };
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double exact = 0.0;
            for (int e = 0; e < 2; ++e) {
                const double xl = mesh.nodes[e], xr = mesh.nodes[e + 1];
                auto dphi = [&](int k, double) {
                    if (k == e) return -1.0 / h;
                    if (k == e + 1) return 1.0 / h;
                    return 0.0;
                };
                exact += gauss10([&](double x) { return p(x) * dphi(i, x) * dphi(j, x); }, xl, xr);
            }
            REQUIRE(op.K(i, j) == Catch::Approx(exact).margin(1e-13));
        }
    }
}

TEST_CASE("assembly: K and M are exactly symmetric") {
    const auto fam = default_family();
    for (double eps : {0.0, 0.125, 0.4}) {
        const auto op = assemble_operator(fam, uniform_mesh(33), eps);
        REQUIRE((op.K - op.K.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
        REQUIRE((op.M - op.M.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("assembly: quadrature rejects diffusion below m0") {
    auto fam = default_family();
    fam.p = [](double x, double) { return 1.0 - 0.8 * std::sin(pi * x); };  // dips to 0.2 < m0
    REQUIRE_THROWS_AS(assemble_operator(fam, uniform_mesh(32), 0.0), std::invalid_argument);
}

TEST_CASE("family: default invariants pass, broken declarations are caught") {
    const auto fam = default_family();
    REQUIRE_NOTHROW(validate_family(fam, {0.0, 0.0625, 0.25, 0.5}));
    auto broken = fam;
    broken.eta = [](double eps) { return 0.1 * eps; };  // V-gap is eps, declaration too small
    REQUIRE_THROWS_AS(validate_family(broken, {0.25}), std::invalid_argument);
}

TEST_CASE("energy norm: zero vector, Lemma-type sandwich, coefficient coincidence") {
    const auto fam = default_family();
    const auto op = assemble_operator(fam, uniform_mesh(64), 0.3);
    REQUIRE(energy_norm(op, Vector::Zero(op.size())) == 0.0);

    auto rng = make_rng(7, "sandwich");
    for (int trial = 0; trial < 100; ++trial) {
        const Vector u = random_vector(rng, op.size());
        const double e2 = energy_norm(op, u) * energy_norm(op, u);
        const double h2 = h1_norm(op, u) * h1_norm(op, u);
        REQUIRE(e2 >= fam.m0 * h2 * (1.0 - 1e-12));
        REQUIRE(e2 <= fam.M0 * h2 * (1.0 + 1e-12));
    }

    // Coefficients chosen so the energy and H1 forms coincide: p = 1,
    // lambda + V = 1, zero Robin weight.
    const auto coincide = neumann_family(1.0);
    const auto op2 = assemble_operator(coincide, uniform_mesh(32), 0.0);
    auto rng2 = make_rng(8, "coincide");
    const Vector u = random_vector(rng2, op2.size());
    REQUIRE(energy_norm(op2, u) == Catch::Approx(h1_norm(op2, u)).epsilon(1e-13));
}

TEST_CASE("solve_elliptic: zero data gives zero") {
    const auto fam = default_family();
    const auto op = assemble_operator(fam, uniform_mesh(32), 0.1);
    const Vector u = solve_elliptic(op, Vector::Zero(op.size()), {0.0, 0.0});
    REQUIRE(u.lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("solve_elliptic: manufactured cos(pi x) solution converges at O(h^2)") {
    // p = 1, V = 0, lambda = 1, b = 1:  -u'' + u = f in (0,1),
    // conormal + 2 u = q at the endpoints. With u = cos(pi x):
    //   f = (pi^2 + 1) cos(pi x),  q0 = 2 u(0) = 2,  q1 = 2 u(1) = -2
    // (u'(0) = u'(1) = 0, so the conormal part vanishes).
    auto fam = plain_family([](double) { return 1.0; }, 1.0, 1.0);
    fam.m0 = 1.0;
    std::vector<double> errors;
    for (int n : {16, 32, 64, 128}) {
        const auto mesh = uniform_mesh(n);
        const auto op = assemble_operator(fam, mesh, 0.0);
        Vector f_nodes(op.size()), exact(op.size());
        for (int i = 0; i < op.size(); ++i) {
            const double x = mesh.nodes[i];
            f_nodes[i] = (pi * pi + 1.0) * std::cos(pi * x);
            exact[i] = std::cos(pi * x);
        }
        const Vector u = solve_elliptic(op, f_nodes, {2.0, -2.0});
        errors.push_back(l2_norm(op, u - exact));
    }
    for (size_t k = 0; k + 1 < errors.size(); ++k)
        REQUIRE(errors[k] / errors[k + 1] >= 3.5);
}

TEST_CASE("solve_elliptic: round trip recovers a random state") {
    const auto fam = default_family();
    const auto op = assemble_operator(fam, uniform_mesh(48), 0.2);
    auto rng = make_rng(11, "roundtrip");
    const Vector w = random_vector(rng, op.size());
    Eigen::LLT<Matrix> mllt(op.M);
    const Vector rhs_interior = mllt.solve(op.K * w);
    const Vector u = solve_elliptic(op, rhs_interior, {0.0, 0.0});
    REQUIRE((u - w).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("resolvent_solve: mu = 0 reduces to the elliptic solve") {
    const auto fam = default_family();
    const auto op = assemble_operator(fam, uniform_mesh(40), 0.1);
    auto rng = make_rng(12, "resolvent");
    const Vector w = random_vector(rng, op.size());
    const Vector via_resolvent = resolvent_solve(op, 0.0, op.M * w);
    const Vector via_elliptic = solve_elliptic(op, w, {0.0, 0.0});
    REQUIRE((via_resolvent - via_elliptic).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("resolvent_solve: eigenvector identity and exact singularity") {
    const auto fam = default_family();
    const auto op = assemble_operator(fam, uniform_mesh(64), 0.0);
    const auto sys = eigenpairs(op, 2);
    const double l0 = sys.eigenvalues[0];
    const Vector phi = sys.eigenvectors.col(0);
    const Vector u = resolvent_solve(op, 1.0, op.M * phi);
    REQUIRE((u - phi / (1.0 + l0)).lpNorm<Eigen::Infinity>() < 1e-10);
    REQUIRE_THROWS_AS(resolvent_solve(op, -l0, op.M * phi), singular_operator_error);
}

TEST_CASE("operator gap: identical operators give zero") {
    const auto fam = default_family();
    const auto op = assemble_operator(fam, uniform_mesh(32), 0.25);
    REQUIRE(operator_gap_norm(op, op, NormTag::L2, NormTag::H1) <= 1e-12);
}

TEST_CASE("operator gap: power iteration agrees with the dense SVD oracle") {
    const auto fam = default_family();
    const auto mesh = uniform_mesh(48);
    const auto a = assemble_operator(fam, mesh, 0.25);
    const auto b = assemble_operator(fam, mesh, 0.0);
    for (auto [in, out] : {std::pair{NormTag::L2, NormTag::H1},
                           std::pair{NormTag::L2, NormTag::L2},
                           std::pair{NormTag::H1, NormTag::Energy}}) {
        const double via_power = operator_gap_norm(a, b, in, out);
        const double via_svd = operator_gap_norm_svd(a, b, in, out);
        REQUIRE(via_power == Catch::Approx(via_svd).epsilon(1e-6));
    }
}

TEST_CASE("operator gap: monotone in eps and slope near one") {
    const auto fam = default_family();
    const auto mesh = uniform_mesh(128);
    const auto op0 = assemble_operator(fam, mesh, 0.0);
    std::vector<double> eps_list, gaps;
    for (int k = 4; k <= 8; ++k) {
        const double eps = std::ldexp(1.0, -k);
        const auto ope = assemble_operator(fam, mesh, eps);
        eps_list.push_back(eps);
        gaps.push_back(operator_gap_norm(ope, op0, NormTag::L2, NormTag::H1));
    }
    for (size_t i = 0; i + 1 < gaps.size(); ++i)
        REQUIRE(gaps[i + 1] <= gaps[i] * 1.05);  // eps halves along the sweep
    // log-log slope against delta(eps)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(gaps.size());
    for (int i = 0; i < n; ++i) {
        const double x = std::log(perturbation_size(fam, eps_list[i]));
        const double y = std::log(gaps[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    REQUIRE(slope == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("serialize_matrix: row-per-line full-precision text") {
    Matrix m(2, 2);
    m << 1.0 / 3.0, 2.0, -4.5, 1e-17;
    std::ostringstream os;
    serialize_matrix(os, m);
    std::istringstream is(os.str());
    std::string line;
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        std::istringstream ls(line);
        double a, b;
        REQUIRE((ls >> a >> b));
    }
    REQUIRE(rows == 2);
    std::istringstream round(os.str());
    double a;
    round >> a;
    REQUIRE(a == 1.0 / 3.0);  // 17 significant digits round-trip
}
