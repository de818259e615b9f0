#pragma once

// Online adaptive filters of the class W(i+1) = W(i) + eta * f(e(i)) * X(i):
// the kernel risk-sensitive loss filter plus the usual comparison baselines
// behind one step interface.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "krsl/errors.hpp"
#include "krsl/similarity.hpp"

namespace krsl {

/// Variable-step / score factor of the KRSL filter:
/// f(e) = exp(lambda*(1 - kappa_sigma(e))) * kappa_sigma(e) * e.
inline double mkrsl_score(double e, const KrslParams& p) {
    const double kappa = gaussian_kernel(e, p.sigma);
    return std::exp(p.lambda * (1.0 - kappa)) * kappa * e;
}

/// eta(i) = eta * exp(lambda*(1 - kappa_sigma(e))) * kappa_sigma(e).
/// Equals eta at e = 0 and vanishes as |e| grows, which is what makes the
/// update insensitive to large outliers.
inline double mkrsl_variable_step(double e, double eta, const KrslParams& p) {
    if (!(eta > 0.0)) throw parameter_error("mkrsl_variable_step: eta must be > 0");
    const double kappa = gaussian_kernel(e, p.sigma);
    return eta * std::exp(p.lambda * (1.0 - kappa)) * kappa;
}

struct MccParams {
    double sigma;
};
struct LmsParams {};
struct SaParams {};
struct LmmnParams {
    double delta;  // mixing in [0, 1]
};
struct LmmParams {
    double threshold;  // Huber-style clip point
};
struct GmccParams {
    double alpha;
    double lambda_g;
    double sigma_g;
};

using AlgoParams =
    std::variant<KrslParams, MccParams, LmsParams, SaParams, LmmnParams, LmmParams, GmccParams>;

enum class Algo { MKRSL, MCC, LMS, SA, LMMN, LMM, GMCC };

inline GmccParams make_gmcc(double alpha, double sigma_g) {
    if (!(alpha > 0.0) || !(sigma_g > 0.0))
        throw parameter_error("make_gmcc: alpha and sigma must be > 0");
    return GmccParams{alpha, 1.0 / (alpha * std::pow(sigma_g, alpha)), sigma_g};
}

struct FilterState {
    std::vector<double> weights;
    Algo algo = Algo::LMS;
    double eta = 0.0;
    AlgoParams params = LmsParams{};

    FilterState(std::size_t m, Algo algo_, double eta_, AlgoParams params_ = LmsParams{})
        : weights(m, 0.0), algo(algo_), eta(eta_), params(std::move(params_)) {
        if (m < 1) throw parameter_error("FilterState: filter length must be >= 1");
        if (!(eta > 0.0)) throw parameter_error("FilterState: step size must be > 0");
    }
};

struct StepOutcome {
    double error = 0.0;           // e(i) = d(i) - W'(i)X(i)
    double effective_step = 0.0;  // eta(i); equals eta for fixed-step algorithms
    bool rejected = false;        // update would have produced non-finite weights
};

namespace detail {

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Score f(e) of the generic update class, per algorithm.
inline double score(Algo algo, const AlgoParams& params, double e) {
    switch (algo) {
        case Algo::MKRSL:
            return mkrsl_score(e, std::get<KrslParams>(params));
        case Algo::MCC:
            return gaussian_kernel(e, std::get<MccParams>(params).sigma) * e;
        case Algo::LMS:
            return e;
        case Algo::SA:
            return sign(e);
        case Algo::LMMN: {
            const double d = std::get<LmmnParams>(params).delta;
            return e * (d + (1.0 - d) * e * e);
        }
        case Algo::LMM: {
            const double t = std::get<LmmParams>(params).threshold;
            return std::abs(e) <= t ? e : t * sign(e);
        }
        case Algo::GMCC: {
            const auto& g = std::get<GmccParams>(params);
            const double ae = std::abs(e);
            if (ae == 0.0) return 0.0;
            return std::exp(-g.lambda_g * std::pow(ae, g.alpha)) *
                   std::pow(ae, g.alpha - 1.0) * sign(e);
        }
    }
    throw parameter_error("score: unknown algorithm");
}

}  // namespace detail

/// One update of W(i+1) = W(i) + eta * f(e(i)) * X(i). Mutates state.weights
/// unless the update would produce a non-finite weight, in which case the
/// step is reported rejected and the weights are left untouched.
inline StepOutcome filter_step(FilterState& state, std::span<const double> x, double d) {
    const std::size_t m = state.weights.size();
    if (x.size() != m)
        throw dimension_error("filter_step: input length " + std::to_string(x.size()) +
                              " != filter length " + std::to_string(m));
    if (!std::isfinite(d)) throw parameter_error("filter_step: non-finite desired sample");
    for (double xi : x)
        if (!std::isfinite(xi)) throw parameter_error("filter_step: non-finite input sample");

    double wx = 0.0;
    for (std::size_t k = 0; k < m; ++k) wx += state.weights[k] * x[k];
    const double e = d - wx;

    StepOutcome out;
    out.error = e;
    const double f = detail::score(state.algo, state.params, e);
    out.effective_step = (e != 0.0 && std::isfinite(f)) ? state.eta * f / e : state.eta;
    if (state.algo == Algo::MKRSL && e == 0.0)
        out.effective_step = state.eta;  // eta(0) = eta exactly

    const double gain = state.eta * f;
    bool finite = std::isfinite(gain);
    std::vector<double> updated;
    if (finite) {
        updated = state.weights;
        for (std::size_t k = 0; k < m; ++k) {
            updated[k] += gain * x[k];
            if (!std::isfinite(updated[k])) {
                finite = false;
                break;
            }
        }
    }
    if (finite) {
        state.weights = std::move(updated);
    } else {
        out.rejected = true;
        out.effective_step = 0.0;
    }
    return out;
}

struct Trajectory {
    std::vector<StepOutcome> steps;
    std::size_t rejected_count = 0;
};

inline Trajectory run_filter(FilterState& state,
                             std::span<const std::pair<std::vector<double>, double>> inputs) {
    Trajectory traj;
    traj.steps.reserve(inputs.size());
    for (const auto& [x, d] : inputs) {
        traj.steps.push_back(filter_step(state, x, d));
        if (traj.steps.back().rejected) ++traj.rejected_count;
    }
    return traj;
}

}  // namespace krsl
