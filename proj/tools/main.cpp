// krsl_cli: run experiments, evaluate theory predictions, emit performance
// surfaces and robustness bounds from declarative JSON configs.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "krsl/commands.hpp"

namespace {

struct Invocation {
    std::string config_path;
    krsl::CliOptions opts;
};

void attach_common(CLI::App* sub, Invocation& inv) {
    sub->add_option("config", inv.config_path, "JSON config file")->required();
    sub->add_option("--out", inv.opts.out_dir, "Output directory")->required();
    sub->add_option("--runs", inv.opts.runs, "Override Monte Carlo run count");
    sub->add_option("--seed", inv.opts.seed, "Override base RNG seed");
    sub->add_option("--threads", inv.opts.threads, "Override worker thread count");
}

int dispatch(const std::string& name, const Invocation& inv) {
    const std::string text = krsl::read_file(inv.config_path);
    const krsl::ParsedConfig parsed = krsl::ParsedConfig::load(text);
    if (name == "run")
        krsl::cmd_run(parsed, text, inv.opts);
    else if (name == "theory")
        krsl::cmd_theory(parsed, text, inv.opts);
    else if (name == "surface")
        krsl::cmd_surface(parsed, text, inv.opts);
    else
        krsl::cmd_bounds(parsed, text, inv.opts);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KRSL adaptive-filtering experiment runner"};
    app.require_subcommand(1);

    Invocation inv;
    const char* names[] = {"run", "theory", "surface", "bounds"};
    const char* descs[] = {"Monte Carlo experiment with optional theory comparison",
                           "Theoretical transient/steady-state predictions only",
                           "Performance-surface grid emission (m in {1, 2})",
                           "Robustness bounds and randomized validation sweep"};
    for (int i = 0; i < 4; ++i) attach_common(app.add_subcommand(names[i], descs[i]), inv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        return dispatch(sub, inv);
    } catch (const krsl::inapplicable_regime_error& e) {
        std::fprintf(stderr, "inapplicable regime: %s\n", e.what());
        return 3;
    } catch (const krsl::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const krsl::json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
