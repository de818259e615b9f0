#pragma once

// Kernel-space similarity measures built on the translation-invariant
// Gaussian kernel: correntropy family, C-Loss, QIP and the kernel
// risk-sensitive loss with its curvature structure.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "krsl/errors.hpp"

namespace krsl {

/// The two knobs of every KRSL quantity: kernel bandwidth sigma (same
/// units as the error signal) and the dimensionless risk-sensitive
/// parameter lambda.
struct KrslParams {
    double sigma;
    double lambda;

    KrslParams(double sigma_, double lambda_) : sigma(sigma_), lambda(lambda_) {
        if (!(sigma > 0.0))
            throw parameter_error("KrslParams: sigma must be > 0, got " + std::to_string(sigma));
        if (!(lambda > 0.0))
            throw parameter_error("KrslParams: lambda must be > 0, got " + std::to_string(lambda));
        // exp(lambda*(1-kappa)) <= exp(lambda); keep it representable in double.
        if (lambda > 700.0)
            throw parameter_error("KrslParams: lambda > 700 overflows exp(lambda)");
    }
};

/// Paired observations; e = x - y is the error vector.
struct SampleVectorPair {
    std::vector<double> x;
    std::vector<double> y;

    SampleVectorPair(std::vector<double> x_, std::vector<double> y_)
        : x(std::move(x_)), y(std::move(y_)) {
        if (x.empty()) throw empty_data_error("SampleVectorPair: empty sample vectors");
        if (x.size() != y.size())
            throw dimension_error("SampleVectorPair: length mismatch " +
                                  std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    }

    std::size_t size() const { return x.size(); }
};

inline double gaussian_kernel(double u, double sigma) {
    if (!(sigma > 0.0))
        throw parameter_error("gaussian_kernel: sigma must be > 0");
    return std::exp(-u * u / (2.0 * sigma * sigma));
}

inline double correntropy(const SampleVectorPair& pair, double sigma) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i)
        acc += gaussian_kernel(pair.x[i] - pair.y[i], sigma);
    return acc / static_cast<double>(pair.size());
}

inline double c_loss(const SampleVectorPair& pair, double sigma) {
    return 1.0 - correntropy(pair, sigma);
}

/// Empirical centered correntropy: the sample mean of the kernel minus the
/// double average over all (i, j) pairs (product-marginal term).
inline double centered_correntropy(const SampleVectorPair& pair, double sigma) {
    const std::size_t n = pair.size();
    double same = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        same += gaussian_kernel(pair.x[i] - pair.y[i], sigma);
    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cross += gaussian_kernel(pair.x[i] - pair.y[j], sigma);
    const double nn = static_cast<double>(n);
    return same / nn - cross / (nn * nn);
}

inline double correntropy_coefficient(const SampleVectorPair& pair, double sigma) {
    const double uxy = centered_correntropy(pair, sigma);
    SampleVectorPair xx(pair.x, pair.x);
    SampleVectorPair yy(pair.y, pair.y);
    const double uxx = centered_correntropy(xx, sigma);
    const double uyy = centered_correntropy(yy, sigma);
    if (!(uxx > 0.0) || !(uyy > 0.0))
        throw degenerate_data_error("correntropy_coefficient: zero self centered correntropy");
    return uxy / std::sqrt(uxx * uyy);
}

inline double mse(const SampleVectorPair& pair) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const double d = pair.x[i] - pair.y[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pair.size());
}

/// Population convention (divide by N).
inline double covariance(const SampleVectorPair& pair) {
    const double n = static_cast<double>(pair.size());
    double sx = 0.0, sy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        sx += pair.x[i];
        sy += pair.y[i];
        sxy += pair.x[i] * pair.y[i];
    }
    return sxy / n - (sx / n) * (sy / n);
}

inline double correlation_coefficient(const SampleVectorPair& pair) {
    const double cxy = covariance(pair);
    const double cxx = covariance(SampleVectorPair(pair.x, pair.x));
    const double cyy = covariance(SampleVectorPair(pair.y, pair.y));
    if (!(cxx > 0.0) || !(cyy > 0.0))
        throw degenerate_data_error("correlation_coefficient: zero variance");
    return cxy / std::sqrt(cxx * cyy);
}

/// Parzen estimator of the quadratic information potential.
inline double qip(std::span<const double> samples, double sigma) {
    if (samples.empty()) throw empty_data_error("qip: empty sample set");
    if (!(sigma > 0.0)) throw parameter_error("qip: sigma must be > 0");
    const std::size_t n = samples.size();
    const double wide = std::sqrt(2.0) * sigma;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            acc += gaussian_kernel(samples[i] - samples[j], wide);
    const double nn = static_cast<double>(n);
    return acc / (2.0 * nn * nn * std::sqrt(M_PI) * sigma);
}

/// Empirical KRSL of an error vector e; lies in [1/lambda, exp(lambda)/lambda]
/// with the minimum attained iff e = 0.
inline double empirical_krsl(std::span<const double> e, const KrslParams& p) {
    if (e.empty()) throw empty_data_error("empirical_krsl: empty error vector");
    double acc = 0.0;
    for (double ei : e)
        acc += std::exp(p.lambda * (1.0 - gaussian_kernel(ei, p.sigma)));
    return acc / (static_cast<double>(e.size()) * p.lambda);
}

inline double empirical_krsl(const SampleVectorPair& pair, const KrslParams& p) {
    std::vector<double> e(pair.size());
    for (std::size_t i = 0; i < pair.size(); ++i) e[i] = pair.x[i] - pair.y[i];
    return empirical_krsl(e, p);
}

/// Diagonal of the Hessian of the empirical KRSL with respect to the error
/// vector. All entries are positive whenever max|e(i)| <= sigma.
inline std::vector<double> krsl_hessian_diag(std::span<const double> e, const KrslParams& p) {
    if (e.empty()) throw empty_data_error("krsl_hessian_diag: empty error vector");
    const double s2 = p.sigma * p.sigma;
    const double n = static_cast<double>(e.size());
    std::vector<double> gamma(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double e2 = e[i] * e[i];
        const double kappa = std::exp(-e2 / (2.0 * s2));
        const double xi = std::exp(p.lambda * (1.0 - kappa)) * kappa / (n * s2);
        gamma[i] = xi * ((p.lambda / s2) * kappa * e2 + 1.0 - e2 / s2);
    }
    return gamma;
}

/// Smallest lambda guaranteeing a positive semidefinite KRSL Hessian at e.
/// Returns 0 when every |e(i)| <= sigma.
inline double convexity_lambda_threshold(std::span<const double> e, double sigma) {
    if (!(sigma > 0.0)) throw parameter_error("convexity_lambda_threshold: sigma must be > 0");
    const double s2 = sigma * sigma;
    double threshold = 0.0;
    for (double ei : e) {
        const double e2 = ei * ei;
        if (e2 > s2) {
            const double cand = ((e2 - s2) / e2) * std::exp(e2 / (2.0 * s2));
            if (cand > threshold) threshold = cand;
        }
    }
    return threshold;
}

}  // namespace krsl
