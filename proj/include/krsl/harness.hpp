#pragma once

// Monte Carlo system identification: run an algorithm roster over shared
// per-run input/noise streams, aggregate weight-error-power (and optionally
// EMSE) curves, and pair them with the theory-module predictions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "krsl/errors.hpp"
#include "krsl/filters.hpp"
#include "krsl/noise.hpp"
#include "krsl/theory.hpp"

namespace krsl {

struct AlgorithmEntry {
    std::string tag;  // roster key, e.g. "mkrsl", "lms"
    Algo algo;
    double eta;
    AlgoParams params = LmsParams{};
};

struct ExperimentConfig {
    std::vector<double> true_weights;
    NoiseDensity input{GaussianNoise{1.0}};  // white input process
    NoiseModel noise{NoiseDensity{GaussianNoise{1.0}}};
    std::vector<AlgorithmEntry> algorithms;
    std::size_t iterations = 1000;
    std::size_t runs = 1;
    std::uint64_t seed = 0;
    std::size_t steady_state_window = 1;
    bool record_emse = false;
    std::size_t threads = 0;  // 0 = hardware concurrency

    void check() const {
        if (true_weights.empty()) throw config_error("ExperimentConfig: empty true weights");
        if (algorithms.empty()) throw config_error("ExperimentConfig: empty algorithm roster");
        if (runs < 1) throw config_error("ExperimentConfig: runs must be >= 1");
        if (steady_state_window < 1 || steady_state_window > iterations)
            throw config_error("ExperimentConfig: need iterations >= steady_state_window >= 1");
        validate(NoiseModel{input});
        validate(noise);
    }
};

struct ConvergenceRecord {
    std::vector<double> weight_error_power;  // per-iteration mean over runs; [0] = ||W0||^2
    std::vector<double> emse;                // per-iteration mean a priori error^2 (optional)
    double steady_state_wep_mean = 0.0;      // trailing-window estimate, mean over runs
    double steady_state_wep_std = 0.0;       // run-to-run std of the trailing-window averages
    double steady_state_emse_mean = 0.0;
    double steady_state_emse_std = 0.0;
    std::size_t diverged_runs = 0;  // runs excluded from the averages
    std::vector<double> theory_curve;  // attached by compare_with_theory
    double theory_steady_state_emse = 0.0;
};

namespace detail {

struct RunAccumulator {
    std::vector<double> wep_sum;
    std::vector<double> emse_sum;
    std::vector<double> run_wep_tail;   // per-run trailing-window WEP average
    std::vector<double> run_emse_tail;  // per-run trailing-window e_a^2 average
    std::size_t diverged = 0;
    std::size_t runs_in = 0;
};

/// One Monte Carlo run of the full roster over shared input/noise streams.
/// Streams are keyed per (run, signal), so the roster composition never
/// changes the data any single algorithm sees.
inline void simulate_run(const ExperimentConfig& cfg, std::size_t run,
                         std::map<std::string, RunAccumulator>& acc) {
    const std::size_t m = cfg.true_weights.size();
    const std::size_t n = cfg.iterations;

    RandomStream input_rng(RngSpec{cfg.seed, 2 * run});
    RandomStream noise_rng(RngSpec{cfg.seed, 2 * run + 1});
    std::vector<double> x(n + m - 1);
    for (double& xi : x) xi = draw(cfg.input, input_rng);
    std::vector<double> v(n);
    for (double& vi : v) vi = draw(cfg.noise, noise_rng);

    std::vector<double> regressor(m);
    for (const auto& entry : cfg.algorithms) {
        FilterState state(m, entry.algo, entry.eta, entry.params);
        auto& slot = acc[entry.tag];
        bool diverged = false;
        double tail_wep = 0.0, tail_emse = 0.0;
        const std::size_t tail_start = n - cfg.steady_state_window;
        std::vector<double> wep_curve(n), emse_curve(cfg.record_emse ? n : 0);
        for (std::size_t i = 0; i < n; ++i) {
            // X(i) = [x(i-m+1), ..., x(i)] over the padded input sequence.
            for (std::size_t k = 0; k < m; ++k) regressor[k] = x[i + m - 1 - k];
            double wep = 0.0, ea = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double werr = cfg.true_weights[k] - state.weights[k];
                wep += werr * werr;
                ea += werr * regressor[k];
            }
            wep_curve[i] = wep;
            if (cfg.record_emse) emse_curve[i] = ea * ea;
            if (i >= tail_start) {
                tail_wep += wep;
                tail_emse += ea * ea;
            }
            double d = 0.0;
            for (std::size_t k = 0; k < m; ++k) d += cfg.true_weights[k] * regressor[k];
            d += v[i];
            const StepOutcome out = filter_step(state, regressor, d);
            if (out.rejected) diverged = true;
        }
        if (diverged) {
            ++slot.diverged;
            continue;
        }
        if (slot.wep_sum.empty()) {
            slot.wep_sum.assign(n, 0.0);
            if (cfg.record_emse) slot.emse_sum.assign(n, 0.0);
        }
        for (std::size_t i = 0; i < n; ++i) slot.wep_sum[i] += wep_curve[i];
        if (cfg.record_emse)
            for (std::size_t i = 0; i < n; ++i) slot.emse_sum[i] += emse_curve[i];
        const double window = static_cast<double>(cfg.steady_state_window);
        slot.run_wep_tail.push_back(tail_wep / window);
        slot.run_emse_tail.push_back(tail_emse / window);
        ++slot.runs_in;
    }
}

inline void merge(std::map<std::string, RunAccumulator>& into,
                  const std::map<std::string, RunAccumulator>& from) {
    for (const auto& [tag, src] : from) {
        auto& dst = into[tag];
        dst.diverged += src.diverged;
        dst.runs_in += src.runs_in;
        if (dst.wep_sum.empty()) {
            dst.wep_sum = src.wep_sum;
            dst.emse_sum = src.emse_sum;
        } else if (!src.wep_sum.empty()) {
            for (std::size_t i = 0; i < dst.wep_sum.size(); ++i) dst.wep_sum[i] += src.wep_sum[i];
            for (std::size_t i = 0; i < dst.emse_sum.size(); ++i)
                dst.emse_sum[i] += src.emse_sum[i];
        }
        dst.run_wep_tail.insert(dst.run_wep_tail.end(), src.run_wep_tail.begin(),
                                src.run_wep_tail.end());
        dst.run_emse_tail.insert(dst.run_emse_tail.end(), src.run_emse_tail.begin(),
                                 src.run_emse_tail.end());
    }
}

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

}  // namespace detail

/// Runs the Monte Carlo experiment. Runs are split into fixed-size blocks
/// processed in parallel; block partials are merged in block order, so the
/// aggregate is bit-identical regardless of thread count.
inline std::map<std::string, ConvergenceRecord> run_experiment(const ExperimentConfig& cfg) {
    cfg.check();
    constexpr std::size_t kBlock = 4;
    const std::size_t n_blocks = (cfg.runs + kBlock - 1) / kBlock;
    std::size_t n_threads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;

    std::vector<std::map<std::string, detail::RunAccumulator>> partials(n_blocks);
    std::vector<std::future<void>> pending;
    std::size_t next_block = 0;
    auto worker = [&cfg, &partials](std::size_t block) {
        const std::size_t lo = block * kBlock;
        const std::size_t hi = std::min(lo + kBlock, cfg.runs);
        for (std::size_t run = lo; run < hi; ++run)
            detail::simulate_run(cfg, run, partials[block]);
    };
    while (next_block < n_blocks || !pending.empty()) {
        while (next_block < n_blocks && pending.size() < n_threads)
            pending.push_back(std::async(std::launch::async, worker, next_block++));
        pending.front().get();
        pending.erase(pending.begin());
    }

    std::map<std::string, detail::RunAccumulator> total;
    for (const auto& partial : partials) detail::merge(total, partial);

    std::map<std::string, ConvergenceRecord> records;
    for (const auto& entry : cfg.algorithms) {
        const auto& acc = total[entry.tag];
        ConvergenceRecord rec;
        rec.diverged_runs = acc.diverged;
        const double n_in = static_cast<double>(std::max<std::size_t>(acc.runs_in, 1));
        rec.weight_error_power = acc.wep_sum;
        for (double& v : rec.weight_error_power) v /= n_in;
        rec.emse = acc.emse_sum;
        for (double& v : rec.emse) v /= n_in;
        std::tie(rec.steady_state_wep_mean, rec.steady_state_wep_std) =
            detail::mean_std(acc.run_wep_tail);
        std::tie(rec.steady_state_emse_mean, rec.steady_state_emse_std) =
            detail::mean_std(acc.run_emse_tail);
        records[entry.tag] = std::move(rec);
    }
    return records;
}

struct TheoryComparison {
    double max_rel_deviation = 0.0;   // over the WEP curve, after burn-in
    double mean_rel_deviation = 0.0;
    double steady_state_delta = 0.0;  // |sim EMSE - theory EMSE| / theory EMSE
};

/// Attaches the theoretical transient curve and steady-state EMSE to the
/// record and reports pointwise relative deviations after burn_in.
inline TheoryComparison compare_with_theory(ConvergenceRecord& record,
                                            const ExperimentConfig& cfg,
                                            const TheoryConfig& theory_cfg,
                                            std::size_t burn_in = 0) {
    const auto* gauss = std::get_if<GaussianNoise>(&cfg.input);
    if (!gauss || std::abs(gauss->variance - theory_cfg.input_variance) > 1e-12)
        throw config_error("compare_with_theory: input statistics do not match theory config");
    if (cfg.true_weights.size() != theory_cfg.m)
        throw config_error("compare_with_theory: filter length mismatch");
    if (burn_in >= record.weight_error_power.size())
        throw config_error("compare_with_theory: burn-in exceeds record length");

    double initial_wep = 0.0;
    for (double w : cfg.true_weights) initial_wep += w * w;
    record.theory_curve =
        transient_curve(theory_cfg, record.weight_error_power.size(), initial_wep);
    record.theory_steady_state_emse = steady_state_emse_taylor(theory_cfg);

    TheoryComparison cmp;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = burn_in; i < record.weight_error_power.size(); ++i) {
        const double ref = record.theory_curve[i];
        if (ref <= 0.0) continue;
        const double dev = std::abs(record.weight_error_power[i] - ref) / ref;
        cmp.max_rel_deviation = std::max(cmp.max_rel_deviation, dev);
        sum += dev;
        ++count;
    }
    cmp.mean_rel_deviation = count ? sum / static_cast<double>(count) : 0.0;
    if (record.theory_steady_state_emse > 0.0 && record.steady_state_emse_mean > 0.0)
        cmp.steady_state_delta =
            std::abs(record.steady_state_emse_mean - record.theory_steady_state_emse) /
            record.theory_steady_state_emse;
    return cmp;
}

struct SweepCell {
    double c = 0.0;
    double outlier_variance = 0.0;
    double steady_state_wep = 0.0;
    double steady_state_wep_std = 0.0;
};

/// Grid of steady-state weight error powers over outlier occurrence
/// probability and outlier variance. The base config must use the mixture
/// model with a Gaussian outlier component.
inline std::vector<SweepCell> outlier_robustness_sweep(const ExperimentConfig& base,
                                                       const std::vector<double>& sigma_b2_grid,
                                                       const std::vector<double>& c_grid) {
    const auto* mix = std::get_if<MixtureOutlierModel>(&base.noise);
    if (!mix) throw config_error("outlier_robustness_sweep: base must use the mixture noise model");
    std::vector<SweepCell> cells;
    for (double sb2 : sigma_b2_grid) {
        for (double c : c_grid) {
            ExperimentConfig cfg = base;
            MixtureOutlierModel model = *mix;
            model.c = c;
            model.outlier = GaussianNoise{sb2};
            cfg.noise = model;
            const auto records = run_experiment(cfg);
            const auto& rec = records.begin()->second;
            cells.push_back({c, sb2, rec.steady_state_wep_mean, rec.steady_state_wep_std});
        }
    }
    return cells;
}

}  // namespace krsl
