#pragma once

#include "rdlab/common.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace rdlab {

/// The eps-parametrized problem data: diffusion p, potential V, boundary
/// potential b, shift lambda, reactions f (interior) and g (boundary),
/// together with the declared perturbation-size functions and the
/// coercivity floor m0 / coefficient bound M0.
///
/// Conventions: x in [0,1]; endpoint index 0 or 1 for b; all reactions are
/// globally Lipschitz and bounded in u (clamped families enforce this).
struct CoefficientFamily {
    std::function<double(double, double)> p;   // p(x, eps) > 0
    std::function<double(double, double)> V;   // V(x, eps)
    std::function<double(int, double)> b;      // b(endpoint, eps)
    double lambda = 0.0;

    std::function<double(double, double)> f;   // f(u, eps)
    std::function<double(double, double)> g;   // g(u, eps)
    std::function<double(double, double)> df;  // d/du f
    std::function<double(double, double)> dg;  // d/du g

    // Declared perturbation sizes, each a bound on the sup-gap to eps = 0.
    std::function<double(double)> p_gap;
    std::function<double(double)> eta;    // potential gap
    std::function<double(double)> tau;    // boundary potential gap
    std::function<double(double)> kappa;  // interior reaction gap
    std::function<double(double)> xi;     // boundary reaction gap

    double m0 = 0.0;       // coercivity floor (>= 0 only in test mode)
    double M0 = 0.0;       // energy/H1 sandwich upper constant
    double eps_max = 0.5;
    double u_max = 3.0;    // a-priori sup bound used by guess sweeps / clamps
};

/// Total perturbation size delta(eps): sum of the five declared gaps.
inline double perturbation_size(const CoefficientFamily& fam, double eps) {
    return fam.p_gap(eps) + fam.eta(eps) + fam.tau(eps) + fam.kappa(eps) + fam.xi(eps);
}

namespace detail {

// C^2 saturation: identity on [-u0, u0], constant +-(u0 + w/2) outside
// [-(u0+w), u0+w], quintic-smoothstep blend of the derivative in between.
struct SmoothClamp {
    double u0, w;

    static double smoothstep(double t) { return ((6.0 * t - 15.0) * t + 10.0) * t * t * t; }
    static double smoothstep_int(double t) { return ((t - 3.0) * t + 2.5) * t * t * t * t; }

    double value(double u) const {
        const double a = std::abs(u);
        if (a <= u0) return u;
        const double s = std::copysign(1.0, u);
        if (a >= u0 + w) return s * (u0 + 0.5 * w);
        const double t = (a - u0) / w;
        return s * (u0 + w * (t - smoothstep_int(t)));
    }
    double deriv(double u) const {
        const double a = std::abs(u);
        if (a <= u0) return 1.0;
        if (a >= u0 + w) return 0.0;
        return 1.0 - smoothstep((a - u0) / w);
    }
};

}  // namespace detail

/// Computes the sandwich constant M0 = sup(coefficients) + 4 * sup(boundary
/// coefficient) by dense sampling. The factor 4 absorbs the 1D endpoint
/// bound u(e)^2 <= 2 |u|_{H1}^2 summed over both endpoints.
inline double compute_sandwich_bound(const CoefficientFamily& fam, int n_samples = 2001) {
    double mc = 0.0, mb = 0.0;
    const std::vector<double> eps_probe = {0.0, 0.5 * fam.eps_max, fam.eps_max};
    for (double eps : eps_probe) {
        for (int i = 0; i < n_samples; ++i) {
            const double x = static_cast<double>(i) / (n_samples - 1);
            mc = std::max(mc, fam.p(x, eps));
            mc = std::max(mc, fam.lambda + fam.V(x, eps));
        }
        mb = std::max(mb, fam.lambda + fam.b(0, eps));
        mb = std::max(mb, fam.lambda + fam.b(1, eps));
    }
    return mc + 4.0 * std::max(mb, 0.0);
}

/// The default perturbation family. All five rate functions are active and
/// proportional to eps, so delta(eps) = 4.25 eps:
///   p_eps(x) = 1 + eps sin(2 pi x),   V_eps(x) = eps cos(pi x),  b_eps = eps,
///   f_eps(u) = a u - u^3 + eps tanh(u) (C^2-clamped outside |u| <= 3),
///   g_eps(u) = (1 + eps) 0.25 tanh(u),  lambda = 1.
inline CoefficientFamily default_family(double a = 5.0) {
    CoefficientFamily fam;
    const detail::SmoothClamp clamp{3.0, 1.0};
    fam.p = [](double x, double eps) { return 1.0 + eps * std::sin(2.0 * pi * x); };
    fam.V = [](double x, double eps) { return eps * std::cos(pi * x); };
    fam.b = [](int, double eps) { return eps; };
    fam.lambda = 1.0;
    fam.f = [a, clamp](double u, double eps) {
        const double v = clamp.value(u);
        return a * v - v * v * v + eps * std::tanh(v);
    };
    fam.df = [a, clamp](double u, double eps) {
        const double v = clamp.value(u);
        const double th = std::tanh(v);
        return (a - 3.0 * v * v + eps * (1.0 - th * th)) * clamp.deriv(u);
    };
    fam.g = [](double u, double eps) { return (1.0 + eps) * 0.25 * std::tanh(u); };
    fam.dg = [](double u, double eps) {
        const double th = std::tanh(u);
        return (1.0 + eps) * 0.25 * (1.0 - th * th);
    };
    fam.p_gap = [](double eps) { return eps; };
    fam.eta = [](double eps) { return eps; };
    fam.tau = [](double eps) { return eps; };
    fam.kappa = [](double eps) { return eps; };
    fam.xi = [](double eps) { return 0.25 * eps; };
    fam.m0 = 0.5;
    fam.eps_max = 0.5;
    fam.u_max = 3.0;
    fam.M0 = compute_sandwich_bound(fam);
    return fam;
}

/// Test-mode family with constant coefficients and no reaction:
/// lambda = 0, b = 0 (zero Robin weight, i.e. pure Neumann), V = c, p = 1.
/// Spectrum of the assembled operator converges to c + (k pi)^2.
inline CoefficientFamily neumann_family(double c) {
    CoefficientFamily fam;
    fam.p = [](double, double) { return 1.0; };
    fam.V = [c](double, double) { return c; };
    fam.b = [](int, double) { return 0.0; };
    fam.lambda = 0.0;
    fam.f = [](double, double) { return 0.0; };
    fam.g = [](double, double) { return 0.0; };
    fam.df = [](double, double) { return 0.0; };
    fam.dg = [](double, double) { return 0.0; };
    auto zero = [](double) { return 0.0; };
    fam.p_gap = zero;
    fam.eta = zero;
    fam.tau = zero;
    fam.kappa = zero;
    fam.xi = zero;
    fam.m0 = std::min(1.0, c);  // 0 when c = 0: test mode
    fam.eps_max = 0.5;
    fam.u_max = 3.0;
    fam.M0 = compute_sandwich_bound(fam);
    return fam;
}

/// Dense-sampling validation of the family invariants: coefficient floors
/// and the declared perturbation-size bounds. Throws std::invalid_argument
/// naming the violated invariant.
inline void validate_family(const CoefficientFamily& fam,
                            const std::vector<double>& eps_values,
                            int n_samples = 2001) {
    const double slack = 1e-12;
    for (double eps : eps_values) {
        if (eps < 0.0 || eps > fam.eps_max)
            throw std::invalid_argument("family: eps outside [0, eps_max]");
        for (int i = 0; i < n_samples; ++i) {
            const double x = static_cast<double>(i) / (n_samples - 1);
            if (fam.p(x, eps) < fam.m0 - slack)
                throw std::invalid_argument("family: p below m0 at x=" + format_full(x));
            if (fam.lambda + fam.V(x, eps) < fam.m0 - slack)
                throw std::invalid_argument("family: lambda+V below m0 at x=" + format_full(x));
            const double dp = std::abs(fam.p(x, eps) - fam.p(x, 0.0));
            if (dp > fam.p_gap(eps) * (1.0 + 1e-9) + slack)
                throw std::invalid_argument("family: p-gap bound violated");
            const double dv = std::abs(fam.V(x, eps) - fam.V(x, 0.0));
            if (dv > fam.eta(eps) * (1.0 + 1e-9) + slack)
                throw std::invalid_argument("family: eta bound violated");
        }
        for (int e : {0, 1}) {
            if (fam.lambda + fam.b(e, eps) < fam.m0 - slack)
                throw std::invalid_argument("family: lambda+b below m0 at endpoint");
            if (std::abs(fam.b(e, eps) - fam.b(e, 0.0)) > fam.tau(eps) * (1.0 + 1e-9) + slack)
                throw std::invalid_argument("family: tau bound violated");
        }
        // Reaction gaps sampled over a range well past the clamp zone.
        for (int i = 0; i < n_samples; ++i) {
            const double u = -20.0 + 40.0 * i / (n_samples - 1);
            if (std::abs(fam.f(u, eps) - fam.f(u, 0.0)) > fam.kappa(eps) * (1.0 + 1e-9) + slack)
                throw std::invalid_argument("family: kappa bound violated");
            if (std::abs(fam.g(u, eps) - fam.g(u, 0.0)) > fam.xi(eps) * (1.0 + 1e-9) + slack)
                throw std::invalid_argument("family: xi bound violated");
            if (!std::isfinite(fam.f(u, eps)) || !std::isfinite(fam.df(u, eps)))
                throw std::invalid_argument("family: f not finite/bounded");
        }
    }
}

}  // namespace rdlab
