#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "krsl/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = KRSL_CLI_PATH;
const std::string kPresets = KRSL_PRESET_DIR;

int run_cli(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path path = dir / name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("missing config file exits 2") {
    const auto out = scratch_dir("missing");
    CHECK(run_cli("theory /nonexistent/config.json --out " + (out / "o").string()) == 2);
}

TEST_CASE("invalid parameters and unknown keys exit 2") {
    const auto dir = scratch_dir("invalid");
    const auto bad_lambda = write_config(dir, "bad_lambda.json", R"({
      "schema": 1,
      "theory": {"sigma": 1.0, "lambda": -2.0, "eta": 1e-3, "m": 5,
                 "input_variance": 1.0, "noise": {"type": "gaussian", "variance": 1.0}}
    })");
    CHECK(run_cli("theory " + bad_lambda.string() + " --out " + (dir / "o1").string()) == 2);

    const auto unknown = write_config(dir, "unknown.json", R"({
      "schema": 1,
      "theory": {"sigma": 1.0, "lambda": 2.0, "eta": 1e-3, "m": 5, "sigmaa": 3.0,
                 "input_variance": 1.0, "noise": {"type": "gaussian", "variance": 1.0}}
    })");
    CHECK(run_cli("theory " + unknown.string() + " --out " + (dir / "o2").string()) == 2);

    const auto no_schema = write_config(dir, "no_schema.json", R"({"theory": {}})");
    CHECK(run_cli("theory " + no_schema.string() + " --out " + (dir / "o3").string()) == 2);

    const auto not_json = write_config(dir, "not_json.json", "this is not json");
    CHECK(run_cli("theory " + not_json.string() + " --out " + (dir / "o4").string()) == 2);
}

TEST_CASE("inapplicable bounds regime exits 3") {
    const auto dir = scratch_dir("bounds_regime");
    const auto cfg = write_config(dir, "degenerate.json", R"({
      "schema": 1,
      "bounds": {"n": 10, "m": 5, "lambda": 5.0, "sigma": 2.0, "epsilon_v": 0.1, "c": 0.5}
    })");
    CHECK(run_cli("bounds " + cfg.string() + " --out " + (dir / "o").string()) == 3);
}

TEST_CASE("bounds report: xi <= rho * epsilon_v, zero violations on the sweep preset") {
    const auto dir = scratch_dir("bounds_ok");
    const int rc =
        run_cli("bounds " + kPresets + "/bounds_sweep.json --out " + (dir / "o").string());
    REQUIRE(rc == 0);
    const json report = json::parse(krsl::read_file((dir / "o" / "bounds.json").string()));
    CHECK(report.at("violations").get<int>() == 0);
    const double xi = report.at("xi").get<double>();
    const double rho_eps = report.at("rho_times_epsilon_v").get<double>();
    CHECK(xi <= rho_eps * (1.0 + 1e-9));
}

TEST_CASE("theory command on the LMS-limit preset matches the classical formula") {
    const auto dir = scratch_dir("lms_limit");
    REQUIRE(run_cli("theory " + kPresets + "/lms_limit.json --out " + (dir / "o").string()) == 0);
    const json out = json::parse(krsl::read_file((dir / "o" / "theory.json").string()));
    // S = eta Tr(R) sigma_v^2 / (2 - eta Tr(R)) with eta = 1e-3, Tr(R) = 10.
    const double classical = 1e-3 * 10.0 / (2.0 - 1e-3 * 10.0);
    CHECK(out.at("steady_state_emse_exact").get<double>() ==
          doctest::Approx(classical).epsilon(1e-3));
    CHECK(out.at("steady_state_emse_taylor").get<double>() ==
          doctest::Approx(classical).epsilon(1e-2));
}

TEST_CASE("surface command: 1-D gives a 3-column grid, deterministic re-emission") {
    const auto dir = scratch_dir("surface1d");
    const auto cfg = write_config(dir, "line.json", R"({
      "schema": 1,
      "surface": {"w0": [2.0], "sigma": 1.0, "lambda": 5.0, "n": 500, "seed": 9,
                  "input_variance": 1.0, "noise_variance": 0.01,
                  "grid": {"lo": [0.0], "hi": [4.0], "steps": 41}}
    })");
    REQUIRE(run_cli("surface " + cfg.string() + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run_cli("surface " + cfg.string() + " --out " + (dir / "b").string()) == 0);
    const std::string csv_a = krsl::read_file((dir / "a" / "surface.csv").string());
    const std::string csv_b = krsl::read_file((dir / "b" / "surface.csv").string());
    CHECK(csv_a == csv_b);
    CHECK(csv_a.substr(0, csv_a.find('\n')) == "w1,J,grad1");
}

TEST_CASE("surface command: 2-D outlier grid has 5 columns and a stationary cell at W0") {
    const auto dir = scratch_dir("surface2d");
    const auto cfg = write_config(dir, "surface2d_small.json", R"({
      "schema": 1,
      "surface": {"w0": [10.0, 10.0], "sigma": 2.0, "lambda": 10.0, "n": 2000, "seed": 1,
                  "input_variance": 1.0, "noise_variance": 1.0,
                  "grid": {"lo": [0.0, 0.0], "hi": [20.0, 20.0], "steps": 21},
                  "include_closs": true}
    })");
    REQUIRE(run_cli("surface " + cfg.string() + " --out " + (dir / "o").string()) == 0);
    const std::string csv = krsl::read_file((dir / "o" / "surface.csv").string());
    REQUIRE(csv.substr(0, csv.find('\n')) == "w1,w2,J,grad1,grad2");
    CHECK(fs::exists(dir / "o" / "surface_closs.csv"));

    // The gradient should be near zero in the cell containing W0 = (10, 10)
    // and much larger somewhere on the grid (the surface is steep at
    // intermediate distances before the outlier-rejection plateau).
    double grad_at_w0 = 1e300, grad_far = 0.0;
    double j_min = 1e300, j_at_w0 = 0.0;
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string tok;
        std::vector<double> row;
        while (std::getline(fields, tok, ',')) row.push_back(std::stod(tok));
        REQUIRE(row.size() == 5);
        const double g = std::hypot(row[3], row[4]);
        if (std::abs(row[0] - 10.0) < 0.51 && std::abs(row[1] - 10.0) < 0.51) {
            grad_at_w0 = std::min(grad_at_w0, g);
            j_at_w0 = row[2];
        }
        grad_far = std::max(grad_far, g);
        j_min = std::min(j_min, row[2]);
    }
    CHECK(grad_at_w0 < 0.02 * grad_far);
    CHECK(j_at_w0 == j_min);  // the surface bottoms out in the W0 cell
}

TEST_CASE("run command: curves, summary, manifest; rerun reproduces hashes") {
    const auto dir = scratch_dir("run");
    const auto cfg = write_config(dir, "run.json", R"({
      "schema": 1,
      "experiment": {
        "true_weights": [0.5, -0.3, 0.8],
        "input": {"type": "gaussian", "variance": 1.0},
        "noise": {"type": "gaussian", "variance": 1.0},
        "algorithms": [
          {"name": "mkrsl", "eta": 0.002, "sigma": 1.0, "lambda": 2.0},
          {"name": "lms", "eta": 0.002}
        ],
        "iterations": 400, "runs": 8, "seed": 21, "steady_state_window": 100,
        "record_emse": true
      },
      "theory": {"sigma": 1.0, "lambda": 2.0, "eta": 0.002, "m": 3,
                 "input_variance": 1.0, "noise": {"type": "gaussian", "variance": 1.0}},
      "compare": {"burn_in": 50}
    })");
    REQUIRE(run_cli("run " + cfg.string() + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run_cli("run " + cfg.string() + " --out " + (dir / "b").string()) == 0);

    const json ma = json::parse(krsl::read_file((dir / "a" / "manifest.json").string()));
    const json mb = json::parse(krsl::read_file((dir / "b" / "manifest.json").string()));
    CHECK(ma.at("files") == mb.at("files"));
    CHECK(ma.at("config_digest") == mb.at("config_digest"));
    CHECK(ma.at("generator").get<std::string>() == mb.at("generator").get<std::string>());

    // Manifest hashes describe the actual file bytes.
    for (const auto& [name, hash] : ma.at("files").items())
        CHECK(krsl::content_hash(krsl::read_file((dir / "a" / name).string())) ==
              hash.get<std::string>());

    const std::string curves = krsl::read_file((dir / "a" / "curves.csv").string());
    CHECK(curves.substr(0, curves.find('\n')) ==
          "iteration,mkrsl_wep,mkrsl_emse,mkrsl_wep_theory,lms_wep,lms_emse");

    const json summary = json::parse(krsl::read_file((dir / "a" / "summary.json").string()));
    CHECK(summary.at("algorithms").contains("mkrsl"));
    CHECK(summary.at("algorithms").contains("lms"));
    CHECK(summary.at("theory").at("mkrsl").at("steady_state_emse").get<double>() > 0.0);
}

TEST_CASE("run command: --runs and --seed overrides change the data") {
    const auto dir = scratch_dir("overrides");
    const auto cfg = write_config(dir, "run.json", R"({
      "schema": 1,
      "experiment": {
        "true_weights": [0.5, -0.3],
        "input": {"type": "gaussian", "variance": 1.0},
        "noise": {"type": "gaussian", "variance": 1.0},
        "algorithms": [{"name": "lms", "eta": 0.01}],
        "iterations": 200, "runs": 4, "seed": 3, "steady_state_window": 50
      }
    })");
    REQUIRE(run_cli("run " + cfg.string() + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run_cli("run " + cfg.string() + " --seed 4 --out " + (dir / "b").string()) == 0);
    const json ma = json::parse(krsl::read_file((dir / "a" / "manifest.json").string()));
    const json mb = json::parse(krsl::read_file((dir / "b" / "manifest.json").string()));
    CHECK(ma.at("files").at("curves.csv") != mb.at("files").at("curves.csv"));
}

TEST_CASE("experiment config errors exit 2") {
    const auto dir = scratch_dir("exp_errors");
    const auto cfg = write_config(dir, "bad.json", R"({
      "schema": 1,
      "experiment": {
        "true_weights": [0.5],
        "input": {"type": "gaussian", "variance": 1.0},
        "noise": {"type": "gaussian", "variance": 1.0},
        "algorithms": [{"name": "lms", "eta": 0.01}],
        "iterations": 100, "runs": 0, "seed": 3, "steady_state_window": 50
      }
    })");
    CHECK(run_cli("run " + cfg.string() + " --out " + (dir / "o").string()) == 2);
}
