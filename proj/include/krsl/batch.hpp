#pragma once

// Batch minimization of the KRSL cost: performance-surface evaluation,
// fixed-point iteration (iteratively reweighted least squares) for the
// optimal weights, and the scalar robustness bounds with their domain
// conditions.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "krsl/errors.hpp"
#include "krsl/similarity.hpp"

namespace krsl {

/// Rows of `inputs` are the regressors X(i); desired(i) = W0'X(i) + v(i).
struct RegressionDataset {
    Eigen::MatrixXd inputs;   // N x m
    Eigen::VectorXd desired;  // N

    RegressionDataset(Eigen::MatrixXd inputs_, Eigen::VectorXd desired_)
        : inputs(std::move(inputs_)), desired(std::move(desired_)) {
        if (inputs.rows() != desired.size())
            throw dimension_error("RegressionDataset: row count mismatch");
        if (inputs.rows() < 1 || inputs.cols() < 1)
            throw dimension_error("RegressionDataset: need at least one sample and one column");
        if (!inputs.allFinite() || !desired.allFinite())
            throw parameter_error("RegressionDataset: non-finite entries");
    }

    Eigen::Index samples() const { return inputs.rows(); }
    Eigen::Index dim() const { return inputs.cols(); }
};

/// KRSL cost of the residual vector d - X w.
inline double performance_surface(const Eigen::VectorXd& w, const RegressionDataset& data,
                                  const KrslParams& p) {
    if (w.size() != data.dim())
        throw dimension_error("performance_surface: weight length mismatch");
    const Eigen::VectorXd residual = data.desired - data.inputs * w;
    return empirical_krsl(std::span<const double>(residual.data(),
                                                  static_cast<std::size_t>(residual.size())),
                          p);
}

/// Gradient of the KRSL cost with respect to w:
/// -(1/(N sigma^2)) sum_i exp(lambda(1-kappa(e_i))) kappa(e_i) e_i X(i).
inline Eigen::VectorXd performance_gradient(const Eigen::VectorXd& w, const RegressionDataset& data,
                                            const KrslParams& p) {
    if (w.size() != data.dim())
        throw dimension_error("performance_gradient: weight length mismatch");
    const double s2 = p.sigma * p.sigma;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(data.dim());
    for (Eigen::Index i = 0; i < data.samples(); ++i) {
        const double e = data.desired(i) - data.inputs.row(i).dot(w);
        const double kappa = gaussian_kernel(e, p.sigma);
        grad -= std::exp(p.lambda * (1.0 - kappa)) * kappa * e * data.inputs.row(i).transpose();
    }
    return grad / (static_cast<double>(data.samples()) * s2);
}

/// Reweighting factor of the fixed-point equation:
/// h(e) = exp(lambda*(1 - kappa_sigma(e))) * kappa_sigma(e); h -> 1 as sigma -> inf.
inline double weight_h(double e, const KrslParams& p) {
    const double kappa = gaussian_kernel(e, p.sigma);
    return std::exp(p.lambda * (1.0 - kappa)) * kappa;
}

struct FixedPointResult {
    Eigen::VectorXd weights;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Iteratively reweighted least squares on the stationarity equation.
/// Each iterate solves [sum h(e_i) X_i X_i'] W = [sum h(e_i) d_i X_i].
inline FixedPointResult fixed_point_solve(const RegressionDataset& data, const KrslParams& p,
                                          const Eigen::VectorXd& init, std::size_t max_iters = 500,
                                          double tol = 1e-10) {
    if (init.size() != data.dim())
        throw dimension_error("fixed_point_solve: init length mismatch");
    if (data.samples() < data.dim())
        throw dimension_error("fixed_point_solve: underdetermined instance (N < m)");

    const Eigen::Index m = data.dim();
    FixedPointResult result;
    result.weights = init;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        for (Eigen::Index i = 0; i < data.samples(); ++i) {
            const double e = data.desired(i) - data.inputs.row(i).dot(result.weights);
            const double h = weight_h(e, p);
            gram.noalias() += h * data.inputs.row(i).transpose() * data.inputs.row(i);
            rhs.noalias() += h * data.desired(i) * data.inputs.row(i).transpose();
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
        const Eigen::VectorXd diag = qr.matrixR().diagonal().cwiseAbs();
        if (diag.minCoeff() <= 0.0 || diag.maxCoeff() / diag.minCoeff() > 1e12)
            throw rank_deficiency_error("fixed_point_solve: weighted Gram matrix rank deficient");
        const Eigen::VectorXd next = qr.solve(rhs);
        const double delta = (next - result.weights).norm();
        result.weights = next;
        result.iterations = it;
        if (delta <= tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

struct SurfaceAxis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t steps = 2;  // number of grid points along the axis
};

struct SurfacePoint {
    Eigen::VectorXd w;
    double cost = 0.0;
    Eigen::VectorXd gradient;
};

/// Dense cost/gradient grid for m in {1, 2}; the CSV emitter in the CLI
/// writes these rows out verbatim.
inline std::vector<SurfacePoint> surface_grid(const RegressionDataset& data, const KrslParams& p,
                                              const std::vector<SurfaceAxis>& box) {
    if (data.dim() > 2)
        throw dimension_error("surface_grid: only m in {1, 2} supported");
    if (box.size() != static_cast<std::size_t>(data.dim()))
        throw dimension_error("surface_grid: box arity must match filter dimension");
    for (const auto& axis : box)
        if (axis.steps < 2 || !(axis.hi > axis.lo))
            throw parameter_error("surface_grid: each axis needs hi > lo and >= 2 steps");

    std::vector<SurfacePoint> grid;
    auto axis_value = [](const SurfaceAxis& a, std::size_t k) {
        return a.lo + (a.hi - a.lo) * static_cast<double>(k) / static_cast<double>(a.steps - 1);
    };
    if (data.dim() == 1) {
        for (std::size_t i = 0; i < box[0].steps; ++i) {
            Eigen::VectorXd w(1);
            w << axis_value(box[0], i);
            grid.push_back({w, performance_surface(w, data, p), performance_gradient(w, data, p)});
        }
    } else {
        for (std::size_t i = 0; i < box[0].steps; ++i)
            for (std::size_t j = 0; j < box[1].steps; ++j) {
                Eigen::VectorXd w(2);
                w << axis_value(box[0], i), axis_value(box[1], j);
                grid.push_back(
                    {w, performance_surface(w, data, p), performance_gradient(w, data, p)});
            }
    }
    return grid;
}

/// Scalar (m = 1) robustness setting: N samples, M of which carry small
/// noise |v| <= epsilon_v, and |X(i)| >= c on that index set.
struct RobustnessScenario {
    std::size_t n;
    std::size_t m;
    double epsilon_v;
    double c;
    KrslParams params;

    RobustnessScenario(std::size_t n_, std::size_t m_, double epsilon_v_, double c_,
                       KrslParams params_)
        : n(n_), m(m_), epsilon_v(epsilon_v_), c(c_), params(params_) {
        if (!(n > m && 2 * m > n))
            throw inapplicable_regime_error("RobustnessScenario: need N > M > N/2");
        if (!(epsilon_v > 0.0))
            throw parameter_error("RobustnessScenario: epsilon_v must be > 0");
        if (!(c > 0.0)) throw parameter_error("RobustnessScenario: c must be > 0");
    }

    double outlier_ratio() const {
        return static_cast<double>(n - m) / static_cast<double>(m);  // (N-M)/M in (0, 1)
    }
};

namespace detail {

/// T = 1 - (1/lambda) log[exp(lambda) - r (exp(lambda) - 1)], evaluated as
/// -(1/lambda) log((1-r) + r exp(-lambda)) to avoid overflowing exp(lambda).
inline double log_domain_t(double lambda, double r) {
    const double inner = (1.0 - r) + r * std::exp(-lambda);
    if (!(inner > 0.0) || !(inner < 1.0))
        throw inapplicable_regime_error("robustness bound: log-domain condition violated");
    return -std::log(inner) / lambda;
}

}  // namespace detail

/// Bandwidth threshold above which the scalar robustness bound applies.
inline double sigma_condition(const RobustnessScenario& s) {
    const double t = detail::log_domain_t(s.params.lambda, s.outlier_ratio());
    return s.epsilon_v / std::sqrt(-2.0 * std::log(t));
}

/// Bound xi with |W_opt - W0| <= xi under the scenario assumptions.
inline double robustness_bound_xi(const RobustnessScenario& s) {
    const double sigma = s.params.sigma;
    const double lambda = s.params.lambda;
    if (!(sigma > sigma_condition(s)))
        throw inapplicable_regime_error("robustness_bound_xi: sigma below applicability threshold");
    const double r = s.outlier_ratio();
    const double q = std::exp(-s.epsilon_v * s.epsilon_v / (2.0 * sigma * sigma));
    // (1/lambda) log[exp(lambda(1-q)) + r(exp(lambda)-1)]
    //   = 1 + (1/lambda) log[exp(-lambda q) + r(1 - exp(-lambda))]
    const double inner = std::exp(-lambda * q) + r * (1.0 - std::exp(-lambda));
    const double arg = -std::log(inner) / lambda;  // = 1 - (1/lambda) log[...]
    if (!(arg > 0.0) || !(arg < 1.0))
        throw inapplicable_regime_error("robustness_bound_xi: inner log argument out of domain");
    return (std::sqrt(-2.0 * sigma * sigma * std::log(arg)) + s.epsilon_v) / s.c;
}

/// Bound constant rho with |W_opt - W0| <= rho * epsilon_v; beta is formed
/// from sigma / epsilon_v and the same log-domain constant as the sigma
/// condition.
inline double robustness_bound_rho(const RobustnessScenario& s) {
    const double sigma = s.params.sigma;
    const double lambda = s.params.lambda;
    if (!(sigma > sigma_condition(s)))
        throw inapplicable_regime_error("robustness_bound_rho: sigma below applicability threshold");
    const double r = s.outlier_ratio();
    const double t = detail::log_domain_t(lambda, r);
    const double log_t = std::log(t);
    const double beta = (sigma / s.epsilon_v) * std::sqrt(-2.0 * log_t);
    const double q = std::pow(t, 1.0 / (beta * beta));  // = exp(-eps^2/(2 sigma^2))
    const double inner = std::exp(-lambda * q) + r * (1.0 - std::exp(-lambda));
    const double arg = -std::log(inner) / lambda;
    if (!(arg > 0.0) || !(arg < 1.0))
        throw inapplicable_regime_error("robustness_bound_rho: inner log argument out of domain");
    return (beta * std::sqrt(std::log(arg) / log_t) + 1.0) / s.c;
}

/// Verification oracle: dense 1-D grid over [center - half, center + half]
/// followed by golden-section refinement of the best cell. Not a user-facing
/// solver; robust against the multimodal surfaces the bound tests hit.
inline double brute_force_scalar_minimizer(const RegressionDataset& data, const KrslParams& p,
                                           double center, double half,
                                           std::size_t grid_points = 100000) {
    if (data.dim() != 1)
        throw dimension_error("brute_force_scalar_minimizer: scalar instances only");
    auto cost = [&](double w) {
        Eigen::VectorXd wv(1);
        wv << w;
        return performance_surface(wv, data, p);
    };
    double best_w = center, best_j = cost(center);
    const double lo = center - half, hi = center + half;
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double w = lo + (hi - lo) * static_cast<double>(k) /
                                  static_cast<double>(grid_points - 1);
        const double j = cost(w);
        if (j < best_j) {
            best_j = j;
            best_w = w;
        }
    }
    // Golden-section refinement around the best grid cell.
    const double cell = (hi - lo) / static_cast<double>(grid_points - 1);
    double a = best_w - cell, b = best_w + cell;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = cost(x1), f2 = cost(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = cost(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace krsl
