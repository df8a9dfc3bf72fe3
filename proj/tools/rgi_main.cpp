#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rgi/commands.hpp"
#include "rgi/config.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool full = false;
};

void attach_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* config = cmd->add_option("--config", opts.config_path, "key=value config file");
    if (config_required) config->required();
    cmd->add_option("--out", opts.out_dir, "output directory")->required();
    cmd->add_option("--seed", [&opts](const CLI::results_t& res) {
        opts.seed = std::stoull(res[0]);
        return true;
    }, "override the config seed");
}

rgi::ExperimentConfig load_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) return rgi::ExperimentConfig::from_text("");
    return rgi::ExperimentConfig::from_file(opts.config_path);
}

rgi::CommandIo make_io(const CommonOpts& opts) {
    return rgi::CommandIo{opts.out_dir, opts.seed, opts.full};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust generative inversion toolkit"};
    app.require_subcommand(1);

    CommonOpts fixture_opts, train_opts, solve_opts, sweep_opts, verify_opts, simulate_opts,
        metrics_opts;
    std::string solve_method;

    auto* fixture = app.add_subcommand("make-fixture", "build generator + corrupted sample files");
    attach_common(fixture, fixture_opts);

    auto* train = app.add_subcommand("train-decoder", "train a decoder on seeded manifold data");
    attach_common(train, train_opts);

    auto* solve = app.add_subcommand("solve", "run an inversion solver on a fixture");
    solve->add_option("method", solve_method, "baseline | rgi | rrgi")
        ->required()
        ->check(CLI::IsMember({"baseline", "rgi", "rrgi"}));
    attach_common(solve, solve_opts);

    auto* sweep = app.add_subcommand("sweep", "solve across a lambda list and summarize metrics");
    attach_common(sweep, sweep_opts);

    auto* verify = app.add_subcommand("verify", "run the asymptotic-recovery checks");
    attach_common(verify, verify_opts, /*config_required=*/false);

    auto* simulate = app.add_subcommand("simulate", "corruption-level study: baselines vs joint solver");
    attach_common(simulate, simulate_opts, /*config_required=*/false);
    simulate->add_flag("--full", simulate_opts.full, "use the full 100-sample preset");

    auto* metrics = app.add_subcommand("metrics", "compute metrics from tensor files");
    attach_common(metrics, metrics_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fixture->parsed()) {
            rgi::cmd_make_fixture(load_config(fixture_opts), make_io(fixture_opts));
        } else if (train->parsed()) {
            rgi::cmd_train_decoder(load_config(train_opts), make_io(train_opts));
        } else if (solve->parsed()) {
            rgi::cmd_solve(solve_method, load_config(solve_opts), make_io(solve_opts));
        } else if (sweep->parsed()) {
            rgi::cmd_sweep(load_config(sweep_opts), make_io(sweep_opts));
        } else if (verify->parsed()) {
            int code = rgi::cmd_verify(load_config(verify_opts), make_io(verify_opts));
            std::cout << (code == 0 ? "verify: PASS" : "verify: FAIL") << "\n";
            return code;
        } else if (simulate->parsed()) {
            rgi::cmd_simulate(load_config(simulate_opts), make_io(simulate_opts));
        } else if (metrics->parsed()) {
            rgi::cmd_metrics(load_config(metrics_opts), make_io(metrics_opts));
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
