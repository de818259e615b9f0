#pragma once

// Mean-square-convergence predictors for the KRSL filter: score
// derivatives, the h_G / h_U moment functions by nested quadrature, the
// transient weight-error-power recursion and the steady-state EMSE by both
// the exact fixed-point equation and the Taylor approximation.

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "krsl/errors.hpp"
#include "krsl/filters.hpp"
#include "krsl/noise.hpp"
#include "krsl/quadrature.hpp"
#include "krsl/similarity.hpp"

namespace krsl {

/// f'(v) = exp(lambda(1-kappa)) kappa (1 + lambda v^2 kappa / sigma^2 - v^2 / sigma^2).
inline double f_prime(double v, const KrslParams& p) {
    const double s2 = p.sigma * p.sigma;
    const double kappa = gaussian_kernel(v, p.sigma);
    const double v2 = v * v;
    return std::exp(p.lambda * (1.0 - kappa)) * kappa *
           (1.0 + p.lambda * (v2 / s2) * kappa - v2 / s2);
}

inline double f_double_prime(double v, const KrslParams& p) {
    const double s2 = p.sigma * p.sigma;
    const double s4 = s2 * s2;
    const double kappa = gaussian_kernel(v, p.sigma);
    const double v2 = v * v;
    const double v3 = v2 * v;
    const double l = p.lambda;
    // kappa^2 = kappa_{sigma/sqrt(2)}(v)
    return std::exp(l * (1.0 - kappa)) * kappa *
           ((l * l * v3 / s4) * kappa * kappa +
            ((3.0 * l * s2 * v - 3.0 * l * v3) / s4) * kappa + (v3 - 3.0 * v * s2) / s4);
}

/// Assumes a white i.i.d. input with covariance sigma_x^2 I, so
/// Tr(R) = m * sigma_x^2.
struct TheoryConfig {
    KrslParams params;
    double eta;
    std::size_t m;
    double input_variance;
    NoiseModel noise;
    QuadratureSpec quadrature{};
    std::size_t hermite_nodes = 64;

    TheoryConfig(KrslParams params_, double eta_, std::size_t m_, double input_variance_,
                 NoiseModel noise_)
        : params(params_), eta(eta_), m(m_), input_variance(input_variance_),
          noise(std::move(noise_)) {
        if (!(eta > 0.0)) throw parameter_error("TheoryConfig: eta must be > 0");
        if (m < 1) throw parameter_error("TheoryConfig: filter length must be >= 1");
        if (!(input_variance > 0.0))
            throw parameter_error("TheoryConfig: input variance must be > 0");
        validate(noise);
    }

    double trace_r() const { return static_cast<double>(m) * input_variance; }
};

struct MomentPair {
    double h_g = 0.0;
    double h_u = 0.0;
};

namespace detail {

/// Both double integrals in one pass: e_a ~ N(0, x) by Gauss-Hermite,
/// v by the density-specific expectation rule.
/// h_G(x) = E[e_a f(e_a + v)] / x,  h_U(x) = E[f^2(e_a + v)].
inline MomentPair moments_once(double x, const TheoryConfig& cfg, std::size_t hermite_nodes,
                               const QuadratureSpec& spec) {
    const QuadratureRule hermite = gauss_hermite(hermite_nodes);
    const QuadratureRule vrule = noise_expectation_rule(cfg.noise, spec);
    const double sd = std::sqrt(x);
    const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
    double num_g = 0.0, num_u = 0.0;
    for (std::size_t a = 0; a < hermite.nodes.size(); ++a) {
        const double y = std::sqrt(2.0) * sd * hermite.nodes[a];
        const double wy = hermite.weights[a] * inv_sqrt_pi;
        double inner_g = 0.0, inner_u = 0.0;
        for (std::size_t b = 0; b < vrule.nodes.size(); ++b) {
            const double f = mkrsl_score(y + vrule.nodes[b], cfg.params);
            inner_g += vrule.weights[b] * f;
            inner_u += vrule.weights[b] * f * f;
        }
        num_g += wy * y * inner_g;
        num_u += wy * inner_u;
    }
    return {num_g / x, num_u};
}

inline double rel_gap(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace detail

/// h_G and h_U at a priori error power x, with the node-doubling
/// self-check on both quadrature directions.
inline MomentPair hg_hu(double x, const TheoryConfig& cfg, double rel_tol = 1e-6) {
    if (!(x > 0.0)) throw parameter_error("hg_hu: x must be > 0");
    const MomentPair coarse = detail::moments_once(x, cfg, cfg.hermite_nodes, cfg.quadrature);
    QuadratureSpec fine = cfg.quadrature;
    fine.nodes *= 2;
    const MomentPair refined = detail::moments_once(x, cfg, cfg.hermite_nodes * 2, fine);
    if (detail::rel_gap(coarse.h_g, refined.h_g) > rel_tol ||
        detail::rel_gap(coarse.h_u, refined.h_u) > rel_tol)
        throw accuracy_error("hg_hu: quadrature did not converge under node doubling");
    return refined;
}

inline double h_g(double x, const TheoryConfig& cfg) { return hg_hu(x, cfg).h_g; }
inline double h_u(double x, const TheoryConfig& cfg) { return hg_hu(x, cfg).h_u; }

/// Weight-error-power recursion under the white-input specialization:
/// W_{i+1} = W_i - 2 eta sx^2 h_G(sx^2 W_i) W_i + eta^2 sx^2 m h_U(sx^2 W_i).
/// The returned curve has n_iters entries with curve[0] = initial_wep.
inline std::vector<double> transient_curve(const TheoryConfig& cfg, std::size_t n_iters,
                                           double initial_wep) {
    if (initial_wep < 0.0) throw parameter_error("transient_curve: initial WEP must be >= 0");
    std::vector<double> curve;
    curve.reserve(n_iters);
    const double sx2 = cfg.input_variance;
    double wep = initial_wep;
    // The moment functions vary slowly in x; re-evaluate only when the
    // argument has moved, and skip the doubling self-check inside the loop
    // (it is run once up front).
    if (n_iters > 0 && wep > 0.0) (void)hg_hu(sx2 * wep, cfg);
    double cached_x = -1.0;
    MomentPair cached{};
    for (std::size_t i = 0; i < n_iters; ++i) {
        curve.push_back(wep);
        const double x = sx2 * wep;
        if (x <= 0.0) continue;  // exactly converged; WEP stays put only if h_U were 0
        if (cached_x < 0.0 || detail::rel_gap(x, cached_x) > 1e-4) {
            cached = detail::moments_once(x, cfg, cfg.hermite_nodes, cfg.quadrature);
            cached_x = x;
        }
        wep = wep - 2.0 * cfg.eta * sx2 * cached.h_g * wep +
              cfg.eta * cfg.eta * sx2 * static_cast<double>(cfg.m) * cached.h_u;
        if (wep < 0.0) wep = 0.0;
    }
    return curve;
}

/// Steady-state EMSE by the Taylor approximation:
/// S ~ eta Tr(R) E[f^2(v)] / (2 E[f'(v)] - eta Tr(R) E[f f'' + f'^2]).
inline double steady_state_emse_taylor(const TheoryConfig& cfg) {
    const auto& p = cfg.params;
    const double ef2 =
        noise_expectation(cfg.noise, cfg.quadrature, [&](double v) {
            const double f = mkrsl_score(v, p);
            return f * f;
        });
    const double efp =
        noise_expectation(cfg.noise, cfg.quadrature, [&](double v) { return f_prime(v, p); });
    const double emix = noise_expectation(cfg.noise, cfg.quadrature, [&](double v) {
        const double fp = f_prime(v, p);
        return mkrsl_score(v, p) * f_double_prime(v, p) + fp * fp;
    });
    const double tr = cfg.trace_r();
    const double denom = 2.0 * efp - cfg.eta * tr * emix;
    if (!(denom > 0.0))
        throw stability_error("steady_state_emse_taylor: non-positive denominator (unstable regime)");
    return cfg.eta * tr * ef2 / denom;
}

/// Steady-state EMSE as the smallest positive root of
/// S = (eta/2) Tr(R) h_U(S) / h_G(S), by bracketing + bisection.
inline double steady_state_emse_exact(const TheoryConfig& cfg) {
    const double tr = cfg.trace_r();
    auto g = [&](double s) {
        const MomentPair m = hg_hu(s, cfg);
        if (!(m.h_g > 0.0))
            throw no_solution_error("steady_state_emse_exact: h_G non-positive in bracket");
        return s - 0.5 * cfg.eta * tr * m.h_u / m.h_g;
    };
    double hi = 10.0 * steady_state_emse_taylor(cfg);
    double lo = 1e-12;
    double glo = g(lo), ghi = g(hi);
    for (int expand = 0; expand < 8 && glo * ghi > 0.0; ++expand) {
        hi *= 10.0;
        ghi = g(hi);
    }
    if (glo * ghi > 0.0)
        throw no_solution_error("steady_state_emse_exact: no sign change in bracket");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (glo * gm <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
        if ((hi - lo) <= 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace krsl
