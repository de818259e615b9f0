#pragma once

// Command implementations behind the CLI front end: execute a parsed config
// and emit CSV/JSON artifacts plus a run manifest into the output directory.

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "krsl/batch.hpp"
#include "krsl/config.hpp"
#include "krsl/harness.hpp"
#include "krsl/io.hpp"
#include "krsl/noise.hpp"
#include "krsl/theory.hpp"

namespace krsl {

inline constexpr const char* kCodeVersion = "krsl 1.0.0";

struct CliOptions {
    std::string out_dir;
    std::optional<std::uint64_t> runs;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> threads;
};

/// Collects output files, then writes them plus a manifest listing each
/// data file with its content hash. Data files are written byte-for-byte
/// deterministically, so identical configs reproduce identical hashes.
class ArtifactSink {
  public:
    ArtifactSink(std::string out_dir, std::string config_text)
        : out_dir_(std::move(out_dir)),
          config_digest_(content_hash(config_text)),
          start_(std::chrono::steady_clock::now()) {
        std::filesystem::create_directories(out_dir_);
    }

    void add(const std::string& name, const std::string& content) {
        files_.emplace_back(name, content);
    }

    void finalize() {
        json manifest;
        manifest["config_digest"] = config_digest_;
        manifest["generator"] = kGeneratorId;
        manifest["code_version"] = kCodeVersion;
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        manifest["runtime_seconds"] =
            std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
        json inventory = json::object();
        for (const auto& [name, content] : files_) {
            write_file(out_dir_ + "/" + name, content);
            inventory[name] = content_hash(content);
        }
        manifest["files"] = inventory;
        write_file(out_dir_ + "/manifest.json", manifest.dump(2) + "\n");
    }

  private:
    std::string out_dir_;
    std::string config_digest_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::pair<std::string, std::string>> files_;
};

namespace cmd_detail {

inline json record_summary(const ConvergenceRecord& rec) {
    json j;
    j["steady_state_wep_mean"] = rec.steady_state_wep_mean;
    j["steady_state_wep_std"] = rec.steady_state_wep_std;
    j["steady_state_emse_mean"] = rec.steady_state_emse_mean;
    j["steady_state_emse_std"] = rec.steady_state_emse_std;
    j["diverged_runs"] = rec.diverged_runs;
    return j;
}

inline void apply_overrides(ExperimentConfig& cfg, const CliOptions& opts) {
    if (opts.runs) cfg.runs = static_cast<std::size_t>(*opts.runs);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.threads) cfg.threads = static_cast<std::size_t>(*opts.threads);
}

}  // namespace cmd_detail

inline void cmd_run(const ParsedConfig& parsed, const std::string& config_text,
                    const CliOptions& opts) {
    if (!parsed.root.contains("experiment"))
        throw config_error("run: config needs an 'experiment' section");
    ExperimentConfig cfg = parse_experiment(parsed.root.at("experiment"));
    cmd_detail::apply_overrides(cfg, opts);

    std::optional<TheoryRequest> theory;
    std::size_t burn_in = 0;
    if (parsed.root.contains("theory")) theory = parse_theory(parsed.root.at("theory"));
    if (parsed.root.contains("compare")) {
        const auto& c = parsed.root.at("compare");
        cfg_detail::expect_keys(c, {"burn_in"}, "compare");
        burn_in = static_cast<std::size_t>(cfg_detail::uint_field(c, "burn_in", "compare"));
    }

    ArtifactSink sink(opts.out_dir, config_text);
    auto records = run_experiment(cfg);

    json summary;
    summary["schema"] = 1;
    if (theory) {
        // Pair the theory prediction with the first MKRSL roster entry.
        for (const auto& entry : cfg.algorithms) {
            if (entry.algo != Algo::MKRSL) continue;
            auto& rec = records[entry.tag];
            const TheoryComparison cmp = compare_with_theory(rec, cfg, theory->config, burn_in);
            json tj;
            tj["steady_state_emse"] = rec.theory_steady_state_emse;
            tj["max_rel_deviation"] = cmp.max_rel_deviation;
            tj["mean_rel_deviation"] = cmp.mean_rel_deviation;
            tj["steady_state_delta"] = cmp.steady_state_delta;
            summary["theory"][entry.tag] = tj;
            break;
        }
    }
    for (const auto& entry : cfg.algorithms) {
        json aj = cmd_detail::record_summary(records[entry.tag]);
        const auto& rec = records[entry.tag];
        const double n_in = static_cast<double>(cfg.runs - rec.diverged_runs);
        if (n_in > 1.0) {
            // 95% CI half-width on the steady-state estimates.
            const double half_wep = 1.96 * rec.steady_state_wep_std / std::sqrt(n_in);
            aj["steady_state_wep_ci95"] = half_wep;
            if (cfg.record_emse)
                aj["steady_state_emse_ci95"] =
                    1.96 * rec.steady_state_emse_std / std::sqrt(n_in);
        }
        summary["algorithms"][entry.tag] = aj;
    }

    // Curve CSV: iteration, then one column per (algorithm, metric) pair,
    // theory columns suffixed "_theory".
    std::vector<std::string> header{"iteration"};
    for (const auto& entry : cfg.algorithms) {
        header.push_back(entry.tag + "_wep");
        if (cfg.record_emse) header.push_back(entry.tag + "_emse");
        if (!records[entry.tag].theory_curve.empty()) header.push_back(entry.tag + "_wep_theory");
    }
    CsvWriter csv(header);
    std::vector<double> row;
    for (std::size_t i = 0; i < cfg.iterations; ++i) {
        row.clear();
        row.push_back(static_cast<double>(i));
        for (const auto& entry : cfg.algorithms) {
            const auto& rec = records[entry.tag];
            row.push_back(rec.weight_error_power[i]);
            if (cfg.record_emse) row.push_back(rec.emse[i]);
            if (!rec.theory_curve.empty()) row.push_back(rec.theory_curve[i]);
        }
        csv.row(row);
    }
    sink.add("curves.csv", csv.str());

    if (parsed.root.contains("sweep")) {
        const auto& s = parsed.root.at("sweep");
        cfg_detail::expect_keys(s, {"sigma_b2_grid", "c_grid"}, "sweep");
        const auto sb2 = cfg_detail::vec(s, "sigma_b2_grid", "sweep");
        const auto cs = cfg_detail::vec(s, "c_grid", "sweep");
        CsvWriter sweep_csv({"c", "sigma_b2", "steady_state_wep", "steady_state_wep_std"});
        for (const auto& cell : outlier_robustness_sweep(cfg, sb2, cs))
            sweep_csv.row({cell.c, cell.outlier_variance, cell.steady_state_wep,
                           cell.steady_state_wep_std});
        sink.add("sweep.csv", sweep_csv.str());
    }

    sink.add("summary.json", summary.dump(2) + "\n");
    sink.finalize();
}

inline void cmd_theory(const ParsedConfig& parsed, const std::string& config_text,
                       const CliOptions& opts) {
    if (!parsed.root.contains("theory"))
        throw config_error("theory: config needs a 'theory' section");
    const TheoryRequest req = parse_theory(parsed.root.at("theory"));

    ArtifactSink sink(opts.out_dir, config_text);
    json out;
    out["schema"] = 1;
    out["steady_state_emse_taylor"] = steady_state_emse_taylor(req.config);
    if (req.exact) out["steady_state_emse_exact"] = steady_state_emse_exact(req.config);
    if (req.transient_iterations) {
        const auto curve = transient_curve(req.config, *req.transient_iterations, req.initial_wep);
        CsvWriter csv({"iteration", "wep_theory"});
        for (std::size_t i = 0; i < curve.size(); ++i)
            csv.row({static_cast<double>(i), curve[i]});
        sink.add("theory_curve.csv", csv.str());
    }
    sink.add("theory.json", out.dump(2) + "\n");
    sink.finalize();
}

inline void cmd_surface(const ParsedConfig& parsed, const std::string& config_text,
                        const CliOptions& opts) {
    if (!parsed.root.contains("surface"))
        throw config_error("surface: config needs a 'surface' section");
    SurfaceRequest req = parse_surface(parsed.root.at("surface"));
    if (opts.seed) req.seed = *opts.seed;

    const std::size_t m = req.w0.size();
    RandomStream input_rng(RngSpec{req.seed, 0});
    RandomStream noise_rng(RngSpec{req.seed, 1});
    Eigen::MatrixXd inputs(static_cast<Eigen::Index>(req.n), static_cast<Eigen::Index>(m));
    Eigen::VectorXd desired(static_cast<Eigen::Index>(req.n));
    const double in_sd = std::sqrt(req.input_variance);
    const double noise_sd = std::sqrt(req.noise_variance);
    for (std::size_t i = 0; i < req.n; ++i) {
        double d = noise_rng.normal(noise_sd);
        for (std::size_t k = 0; k < m; ++k) {
            const double x = input_rng.normal(in_sd);
            inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = x;
            d += req.w0[k] * x;
        }
        desired(static_cast<Eigen::Index>(i)) = d;
    }
    RegressionDataset data(std::move(inputs), std::move(desired));

    std::vector<SurfaceAxis> box;
    for (std::size_t k = 0; k < m; ++k) box.push_back({req.lo[k], req.hi[k], req.steps});

    auto emit = [&](const KrslParams& p, const std::string& name, ArtifactSink& sink) {
        const auto grid = surface_grid(data, p, box);
        CsvWriter csv(m == 1 ? std::vector<std::string>{"w1", "J", "grad1"}
                             : std::vector<std::string>{"w1", "w2", "J", "grad1", "grad2"});
        for (const auto& pt : grid) {
            std::vector<double> row;
            for (Eigen::Index k = 0; k < pt.w.size(); ++k) row.push_back(pt.w(k));
            row.push_back(pt.cost);
            for (Eigen::Index k = 0; k < pt.gradient.size(); ++k) row.push_back(pt.gradient(k));
            csv.row(row);
        }
        sink.add(name, csv.str());
    };

    ArtifactSink sink(opts.out_dir, config_text);
    emit(req.params, "surface.csv", sink);
    if (req.include_closs) {
        // Small-lambda KRSL scales to the C-Loss surface shape.
        emit(KrslParams(req.params.sigma, 1e-6), "surface_closs.csv", sink);
    }
    sink.finalize();
}

inline void cmd_bounds(const ParsedConfig& parsed, const std::string& config_text,
                       const CliOptions& opts) {
    if (!parsed.root.contains("bounds"))
        throw config_error("bounds: config needs a 'bounds' section");
    BoundsRequest req = parse_bounds(parsed.root.at("bounds"));
    if (opts.seed) req.sweep_seed = *opts.seed;

    RobustnessScenario scenario(req.n, req.m, req.epsilon_v, req.c,
                                KrslParams(req.sigma, req.lambda));
    const double sigma_min = sigma_condition(scenario);
    const double xi = robustness_bound_xi(scenario);
    const double rho = robustness_bound_rho(scenario);

    json out;
    out["schema"] = 1;
    out["sigma_condition"] = sigma_min;
    out["xi"] = xi;
    out["rho"] = rho;
    out["rho_times_epsilon_v"] = rho * req.epsilon_v;

    if (req.sweep_instances > 0) {
        // Randomized validation: build scalar instances satisfying the
        // scenario assumptions, with outliers up to the configured magnitude,
        // and check the global minimizer against xi.
        RandomStream rng(RngSpec{req.sweep_seed, 0});
        std::size_t violations = 0;
        double worst_gap = -1.0;
        for (std::size_t inst = 0; inst < req.sweep_instances; ++inst) {
            const double w0 = -5.0 + 10.0 * rng.uniform();
            Eigen::MatrixXd X(static_cast<Eigen::Index>(req.n), 1);
            Eigen::VectorXd d(static_cast<Eigen::Index>(req.n));
            for (std::size_t i = 0; i < req.n; ++i) {
                const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                const double x = sign * (req.c + 2.0 * rng.uniform());
                const double v = i < req.m
                                     ? req.epsilon_v * (2.0 * rng.uniform() - 1.0)
                                     : (rng.uniform() < 0.5 ? -1.0 : 1.0) *
                                           req.outlier_magnitude * rng.uniform();
                X(static_cast<Eigen::Index>(i), 0) = x;
                d(static_cast<Eigen::Index>(i)) = w0 * x + v;
            }
            RegressionDataset data(std::move(X), std::move(d));
            const double w_star =
                brute_force_scalar_minimizer(data, scenario.params, w0, 2.0 * xi + 1.0);
            const double gap = std::abs(w_star - w0);
            worst_gap = std::max(worst_gap, gap - xi);
            if (gap > xi) ++violations;
        }
        out["sweep_instances"] = req.sweep_instances;
        out["violations"] = violations;
        out["worst_margin"] = worst_gap;  // max over instances of |w*-w0| - xi (<= 0 when clean)
    }

    ArtifactSink sink(opts.out_dir, config_text);
    sink.add("bounds.json", out.dump(2) + "\n");
    sink.finalize();
}

}  // namespace krsl
