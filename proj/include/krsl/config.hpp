#pragma once

// JSON experiment configuration: versioned schema, fail-closed on unknown
// keys so typos in parameter names surface as errors instead of silently
// falling back to defaults.

#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "krsl/errors.hpp"
#include "krsl/harness.hpp"
#include "krsl/noise.hpp"
#include "krsl/theory.hpp"

namespace krsl {

using json = nlohmann::json;

namespace cfg_detail {

inline void expect_keys(const json& j, const std::set<std::string>& allowed,
                        const std::string& where) {
    if (!j.is_object()) throw config_error(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw config_error(where + ": unknown key '" + key + "'");
}

inline double num(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw config_error(where + ": missing key '" + key + "'");
    if (!j.at(key).is_number()) throw config_error(where + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

inline double num_or(const json& j, const std::string& key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

inline std::uint64_t uint_field(const json& j, const std::string& key, const std::string& where) {
    const double v = num(j, key, where);
    if (v < 0.0 || v != std::floor(v))
        throw config_error(where + "." + key + ": expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

inline std::vector<double> vec(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_array())
        throw config_error(where + ": missing array '" + key + "'");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw config_error(where + "." + key + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace cfg_detail

inline NoiseDensity parse_noise_density(const json& j, const std::string& where) {
    using namespace cfg_detail;
    if (!j.is_object() || !j.contains("type"))
        throw config_error(where + ": noise spec needs a 'type'");
    const std::string type = j.at("type").get<std::string>();
    if (type == "gaussian") {
        expect_keys(j, {"type", "variance"}, where);
        return GaussianNoise{num(j, "variance", where)};
    }
    if (type == "binary") {
        expect_keys(j, {"type", "amplitude"}, where);
        return BinaryNoise{num(j, "amplitude", where)};
    }
    if (type == "uniform") {
        expect_keys(j, {"type", "half_width"}, where);
        return UniformNoise{num(j, "half_width", where)};
    }
    if (type == "laplace") {
        expect_keys(j, {"type", "variance"}, where);
        return LaplaceNoise{num(j, "variance", where)};
    }
    if (type == "cauchy") {
        expect_keys(j, {"type", "scale"}, where);
        return CauchyNoise{num(j, "scale", where)};
    }
    if (type == "sine_wave") {
        expect_keys(j, {"type", "amplitude"}, where);
        return SineWaveNoise{num(j, "amplitude", where)};
    }
    throw config_error(where + ": unknown noise type '" + type + "'");
}

inline NoiseModel parse_noise_model(const json& j, const std::string& where) {
    using namespace cfg_detail;
    if (j.is_object() && j.contains("type") && j.at("type") == "mixture") {
        expect_keys(j, {"type", "c", "inner", "outlier"}, where);
        MixtureOutlierModel mix;
        mix.c = num(j, "c", where);
        mix.inner = parse_noise_density(j.at("inner"), where + ".inner");
        mix.outlier = parse_noise_density(j.at("outlier"), where + ".outlier");
        return mix;
    }
    return NoiseDensity{parse_noise_density(j, where)};
}

inline AlgorithmEntry parse_algorithm(const json& j, const std::string& where) {
    using namespace cfg_detail;
    if (!j.is_object() || !j.contains("name"))
        throw config_error(where + ": algorithm needs a 'name'");
    const std::string name = j.at("name").get<std::string>();
    AlgorithmEntry entry;
    entry.tag = j.contains("tag") ? j.at("tag").get<std::string>() : name;
    entry.eta = num(j, "eta", where);
    if (name == "mkrsl") {
        expect_keys(j, {"name", "tag", "eta", "sigma", "lambda"}, where);
        entry.algo = Algo::MKRSL;
        entry.params = KrslParams(num(j, "sigma", where), num(j, "lambda", where));
    } else if (name == "mcc") {
        expect_keys(j, {"name", "tag", "eta", "sigma"}, where);
        entry.algo = Algo::MCC;
        entry.params = MccParams{num(j, "sigma", where)};
    } else if (name == "lms") {
        expect_keys(j, {"name", "tag", "eta"}, where);
        entry.algo = Algo::LMS;
        entry.params = LmsParams{};
    } else if (name == "sa") {
        expect_keys(j, {"name", "tag", "eta"}, where);
        entry.algo = Algo::SA;
        entry.params = SaParams{};
    } else if (name == "lmmn") {
        expect_keys(j, {"name", "tag", "eta", "delta"}, where);
        entry.algo = Algo::LMMN;
        const double delta = num(j, "delta", where);
        if (delta < 0.0 || delta > 1.0)
            throw config_error(where + ": lmmn delta must lie in [0, 1]");
        entry.params = LmmnParams{delta};
    } else if (name == "lmm") {
        expect_keys(j, {"name", "tag", "eta", "threshold"}, where);
        entry.algo = Algo::LMM;
        entry.params = LmmParams{num(j, "threshold", where)};
    } else if (name == "gmcc") {
        expect_keys(j, {"name", "tag", "eta", "alpha", "sigma"}, where);
        entry.algo = Algo::GMCC;
        entry.params = make_gmcc(num(j, "alpha", where), num(j, "sigma", where));
    } else {
        throw config_error(where + ": unknown algorithm '" + name + "'");
    }
    return entry;
}

inline ExperimentConfig parse_experiment(const json& j) {
    using namespace cfg_detail;
    expect_keys(j,
                {"true_weights", "input", "noise", "algorithms", "iterations", "runs", "seed",
                 "steady_state_window", "record_emse", "threads"},
                "experiment");
    ExperimentConfig cfg;
    cfg.true_weights = vec(j, "true_weights", "experiment");
    cfg.input = parse_noise_density(j.at("input"), "experiment.input");
    cfg.noise = parse_noise_model(j.at("noise"), "experiment.noise");
    if (!j.contains("algorithms") || !j.at("algorithms").is_array() || j.at("algorithms").empty())
        throw config_error("experiment: 'algorithms' must be a non-empty array");
    for (const auto& a : j.at("algorithms"))
        cfg.algorithms.push_back(parse_algorithm(a, "experiment.algorithms"));
    cfg.iterations = uint_field(j, "iterations", "experiment");
    cfg.runs = uint_field(j, "runs", "experiment");
    cfg.seed = uint_field(j, "seed", "experiment");
    cfg.steady_state_window = uint_field(j, "steady_state_window", "experiment");
    cfg.record_emse = j.value("record_emse", false);
    cfg.threads = j.contains("threads") ? uint_field(j, "threads", "experiment") : 0;
    cfg.check();
    return cfg;
}

struct TheoryRequest {
    TheoryConfig config;
    std::optional<std::size_t> transient_iterations;
    double initial_wep = 0.0;
    bool exact = false;  // also solve the fixed-point EMSE equation
};

inline TheoryRequest parse_theory(const json& j) {
    using namespace cfg_detail;
    expect_keys(j,
                {"sigma", "lambda", "eta", "m", "input_variance", "noise", "transient",
                 "quadrature", "exact"},
                "theory");
    KrslParams params(num(j, "sigma", "theory"), num(j, "lambda", "theory"));
    const auto m = static_cast<std::size_t>(uint_field(j, "m", "theory"));
    NoiseModel noise = parse_noise_model(j.at("noise"), "theory.noise");
    TheoryConfig cfg(params, num(j, "eta", "theory"), m, num(j, "input_variance", "theory"),
                     std::move(noise));
    if (j.contains("quadrature")) {
        const auto& q = j.at("quadrature");
        expect_keys(q, {"half_width_std", "nodes"}, "theory.quadrature");
        cfg.quadrature.half_width_std = num_or(q, "half_width_std", cfg.quadrature.half_width_std);
        if (q.contains("nodes"))
            cfg.quadrature.nodes = static_cast<std::size_t>(uint_field(q, "nodes", "theory.quadrature"));
    }
    TheoryRequest req{cfg, std::nullopt, 0.0, j.value("exact", false)};
    if (j.contains("transient")) {
        const auto& t = j.at("transient");
        expect_keys(t, {"iterations", "initial_wep"}, "theory.transient");
        req.transient_iterations = static_cast<std::size_t>(uint_field(t, "iterations", "theory.transient"));
        req.initial_wep = num(t, "initial_wep", "theory.transient");
    }
    return req;
}

struct SurfaceRequest {
    std::vector<double> w0;
    KrslParams params;
    std::size_t n;
    std::uint64_t seed;
    double input_variance;
    double noise_variance;
    std::vector<double> lo, hi;
    std::size_t steps;
    bool include_closs = false;  // also emit the small-lambda (C-Loss-like) grid
};

inline SurfaceRequest parse_surface(const json& j) {
    using namespace cfg_detail;
    expect_keys(j,
                {"w0", "sigma", "lambda", "n", "seed", "input_variance", "noise_variance", "grid",
                 "include_closs"},
                "surface");
    SurfaceRequest req{vec(j, "w0", "surface"),
                       KrslParams(num(j, "sigma", "surface"), num(j, "lambda", "surface")),
                       static_cast<std::size_t>(uint_field(j, "n", "surface")),
                       uint_field(j, "seed", "surface"),
                       num_or(j, "input_variance", 1.0),
                       num_or(j, "noise_variance", 1.0),
                       {},
                       {},
                       0,
                       j.value("include_closs", false)};
    if (req.w0.empty() || req.w0.size() > 2)
        throw config_error("surface: w0 must have 1 or 2 entries");
    if (!j.contains("grid")) throw config_error("surface: missing 'grid'");
    const auto& g = j.at("grid");
    expect_keys(g, {"lo", "hi", "steps"}, "surface.grid");
    req.lo = vec(g, "lo", "surface.grid");
    req.hi = vec(g, "hi", "surface.grid");
    req.steps = static_cast<std::size_t>(uint_field(g, "steps", "surface.grid"));
    if (req.lo.size() != req.w0.size() || req.hi.size() != req.w0.size())
        throw config_error("surface.grid: lo/hi arity must match w0");
    return req;
}

struct BoundsRequest {
    std::size_t n;
    std::size_t m;
    double lambda;
    double sigma;
    double epsilon_v;
    double c;
    std::size_t sweep_instances = 0;
    std::uint64_t sweep_seed = 0;
    double outlier_magnitude = 1e6;
};

inline BoundsRequest parse_bounds(const json& j) {
    using namespace cfg_detail;
    expect_keys(j, {"n", "m", "lambda", "sigma", "epsilon_v", "c", "sweep"}, "bounds");
    BoundsRequest req{};
    req.n = static_cast<std::size_t>(uint_field(j, "n", "bounds"));
    req.m = static_cast<std::size_t>(uint_field(j, "m", "bounds"));
    req.lambda = num(j, "lambda", "bounds");
    req.sigma = num(j, "sigma", "bounds");
    req.epsilon_v = num(j, "epsilon_v", "bounds");
    req.c = num(j, "c", "bounds");
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        expect_keys(s, {"instances", "seed", "outlier_magnitude"}, "bounds.sweep");
        req.sweep_instances = static_cast<std::size_t>(uint_field(s, "instances", "bounds.sweep"));
        req.sweep_seed = s.contains("seed") ? uint_field(s, "seed", "bounds.sweep") : 0;
        req.outlier_magnitude = num_or(s, "outlier_magnitude", 1e6);
    }
    return req;
}

/// A parsed top-level config: exactly one command section plus an optional
/// theory pairing for run configs.
struct ParsedConfig {
    json root;

    static ParsedConfig load(const std::string& text) {
        json root = json::parse(text, nullptr, true);
        cfg_detail::expect_keys(root, {"schema", "experiment", "theory", "surface", "bounds",
                                       "compare", "sweep"},
                                "config");
        if (!root.contains("schema") || root.at("schema") != 1)
            throw config_error("config: missing or unsupported 'schema' (expected 1)");
        return ParsedConfig{std::move(root)};
    }
};

}  // namespace krsl
