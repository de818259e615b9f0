#pragma once

// Gauss-Hermite / Gauss-Legendre rules (Golub-Welsch) and expectation
// rules E[g(v)] for each supported noise density. Heavy-tailed and
// edge-singular densities are handled by smooth substitutions:
//   Cauchy    v = tan(u), u in (-pi/2, pi/2)
//   SineWave  v = A sin(theta), theta in [0, 2*pi)
// so every rule below is a plain weighted node sum over a smooth integrand.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "krsl/errors.hpp"
#include "krsl/noise.hpp"

namespace krsl {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    double sum(const std::function<double(double)>& g) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * g(nodes[i]);
        return acc;
    }
};

namespace detail {

/// Nodes/weights from the symmetric tridiagonal Jacobi matrix.
inline QuadratureRule golub_welsch(const std::vector<double>& offdiag, double weight_total) {
    const auto n = static_cast<Eigen::Index>(offdiag.size() + 1);
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        jacobi(k, k + 1) = offdiag[static_cast<std::size_t>(k)];
        jacobi(k + 1, k) = offdiag[static_cast<std::size_t>(k)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        rule.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        rule.weights[static_cast<std::size_t>(k)] = weight_total * v0 * v0;
    }
    return rule;
}

}  // namespace detail

/// Gauss-Hermite rule for weight exp(-t^2) on the real line.
inline QuadratureRule gauss_hermite(std::size_t n) {
    if (n == 0) throw parameter_error("gauss_hermite: need at least one node");
    std::vector<double> off(n - 1);
    for (std::size_t k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k) / 2.0);
    return detail::golub_welsch(off, std::sqrt(M_PI));
}

/// Gauss-Legendre rule on [a, b].
inline QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
    if (n == 0) throw parameter_error("gauss_legendre: need at least one node");
    std::vector<double> off(n - 1);
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        off[k - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
    }
    QuadratureRule rule = detail::golub_welsch(off, 2.0);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

/// Controls the expectation rules over the noise density.
struct QuadratureSpec {
    double half_width_std = 12.0;  // truncation window, in noise std units
    std::size_t nodes = 201;
};

/// Weighted node set evaluating E[g(v)] as sum_i w_i g(v_i). For discrete
/// densities this is exact; for continuous ones the weights already carry
/// the density factor.
inline QuadratureRule noise_expectation_rule(const NoiseDensity& d, const QuadratureSpec& spec) {
    validate(d);
    return std::visit(
        [&spec](const auto& v) -> QuadratureRule {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BinaryNoise>) {
                return QuadratureRule{{-v.a, v.a}, {0.5, 0.5}};
            } else if constexpr (std::is_same_v<T, UniformNoise>) {
                QuadratureRule rule = gauss_legendre(spec.nodes, -v.half_width, v.half_width);
                for (double& w : rule.weights) w /= 2.0 * v.half_width;
                return rule;
            } else if constexpr (std::is_same_v<T, GaussianNoise>) {
                const double sd = std::sqrt(v.variance);
                const double half = spec.half_width_std * sd;
                QuadratureRule rule = gauss_legendre(spec.nodes, -half, half);
                const double norm = 1.0 / (sd * std::sqrt(2.0 * M_PI));
                for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                    const double z = rule.nodes[i] / sd;
                    rule.weights[i] *= norm * std::exp(-0.5 * z * z);
                }
                return rule;
            } else if constexpr (std::is_same_v<T, LaplaceNoise>) {
                // Two panels meeting at the density kink at 0.
                const double b = std::sqrt(v.variance / 2.0);
                const double half = spec.half_width_std * std::sqrt(v.variance);
                const std::size_t n_half = (spec.nodes + 1) / 2;
                QuadratureRule neg = gauss_legendre(n_half, -half, 0.0);
                QuadratureRule pos = gauss_legendre(n_half, 0.0, half);
                QuadratureRule rule;
                for (const auto* panel : {&neg, &pos})
                    for (std::size_t i = 0; i < panel->nodes.size(); ++i) {
                        rule.nodes.push_back(panel->nodes[i]);
                        rule.weights.push_back(panel->weights[i] *
                                               std::exp(-std::abs(panel->nodes[i]) / b) /
                                               (2.0 * b));
                    }
                return rule;
            } else if constexpr (std::is_same_v<T, CauchyNoise>) {
                // v = gamma*tan(u): integral of g(v)/(pi*gamma*(1+(v/gamma)^2)) dv
                // becomes (1/pi) * integral of g(gamma*tan(u)) du over (-pi/2, pi/2).
                QuadratureRule base = gauss_legendre(spec.nodes, -M_PI / 2.0, M_PI / 2.0);
                QuadratureRule rule;
                rule.nodes.resize(base.nodes.size());
                rule.weights.resize(base.nodes.size());
                for (std::size_t i = 0; i < base.nodes.size(); ++i) {
                    rule.nodes[i] = v.scale * std::tan(base.nodes[i]);
                    rule.weights[i] = base.weights[i] / M_PI;
                }
                return rule;
            } else {
                static_assert(std::is_same_v<T, SineWaveNoise>);
                // E[g(A sin(omega))] with omega uniform over [0, 2*pi).
                QuadratureRule base = gauss_legendre(spec.nodes, 0.0, 2.0 * M_PI);
                QuadratureRule rule;
                rule.nodes.resize(base.nodes.size());
                rule.weights.resize(base.nodes.size());
                for (std::size_t i = 0; i < base.nodes.size(); ++i) {
                    rule.nodes[i] = v.amplitude * std::sin(base.nodes[i]);
                    rule.weights[i] = base.weights[i] / (2.0 * M_PI);
                }
                return rule;
            }
        },
        d);
}

/// Expectation rule for an arbitrary noise model; a mixture contributes its
/// components with Bernoulli weights.
inline QuadratureRule noise_expectation_rule(const NoiseModel& m, const QuadratureSpec& spec) {
    if (const auto* mix = std::get_if<MixtureOutlierModel>(&m)) {
        QuadratureRule inner = noise_expectation_rule(mix->inner, spec);
        QuadratureRule outlier = noise_expectation_rule(mix->outlier, spec);
        QuadratureRule rule;
        for (std::size_t i = 0; i < inner.nodes.size(); ++i) {
            rule.nodes.push_back(inner.nodes[i]);
            rule.weights.push_back((1.0 - mix->c) * inner.weights[i]);
        }
        for (std::size_t i = 0; i < outlier.nodes.size(); ++i) {
            rule.nodes.push_back(outlier.nodes[i]);
            rule.weights.push_back(mix->c * outlier.weights[i]);
        }
        return rule;
    }
    return noise_expectation_rule(std::get<NoiseDensity>(m), spec);
}

/// E[g(v)] with the built-in node-doubling self-check; throws accuracy_error
/// when doubling changes the value by more than rel_tol.
inline double noise_expectation(const NoiseModel& m, const QuadratureSpec& spec,
                                const std::function<double(double)>& g,
                                double rel_tol = 1e-6) {
    const double coarse = noise_expectation_rule(m, spec).sum(g);
    QuadratureSpec fine = spec;
    fine.nodes = spec.nodes * 2;
    const double refined = noise_expectation_rule(m, fine).sum(g);
    const double scale = std::max({std::abs(coarse), std::abs(refined), 1e-300});
    if (std::abs(refined - coarse) > rel_tol * scale)
        throw accuracy_error("noise_expectation: node doubling changed result by " +
                             std::to_string(std::abs(refined - coarse) / scale));
    return refined;
}

}  // namespace krsl
