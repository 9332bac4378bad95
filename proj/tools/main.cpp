// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "tdlchan/runner.hpp"
#include "tdlchan/version.hpp"

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool quiet = false;
};

int dispatch(const std::string &command, const GlobalArgs &args) {
    using namespace tdlchan::runner;

    if (command == "report") {
        if (args.out_dir.empty()) {
            std::cerr << "report: --out <dir> is required\n";
            return 2;
        }
        std::cout << run_report(args.out_dir) << "\n";
        return 0;
    }

    if (args.config_path.empty()) {
        std::cerr << command << ": --config <path> is required\n";
        return 2;
    }
    ExperimentConfig config = load_config(args.config_path);
    if (args.seed_set)
        config.seed = args.seed;
    RunOptions options;
    options.out_dir = args.out_dir;
    options.quiet = args.quiet;

    std::vector<std::string> errors;
    if (command == "trace") {
        run_trace(config, options);
    } else if (command == "simulate") {
        run_simulate(config, options);
    } else if (command == "fit") {
        if (config.scenario.trajectory)
            errors = run_mobile(config, options).errors;
        else
            errors = run_static(config, options).errors;
    } else if (command == "baseline") {
        errors = run_baseline(config, options).errors;
    } else if (command == "ber") {
        errors = run_ber(config, options).errors;
    } else if (command == "sense") {
        errors = run_sense(config, options).errors;
    }

    for (const auto &e : errors)
        std::cerr << "error: " << e << "\n";
    if (!args.quiet)
        std::cerr << "outputs written to " << effective_out_dir(config, options) << "\n";
    return errors.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"tdlchan — multipath channel estimation and sensing workbench"};
    app.set_version_flag("--version", std::string(tdlchan::kVersion));
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "experiment config (JSON)");
    app.add_option("--out", args.out_dir, "output directory (overrides config)");
    auto *seed_opt = app.add_option("--seed", args.seed, "seed override");
    app.add_flag("--quiet", args.quiet, "suppress progress output");

    const char *commands[][2] = {
        {"trace", "dump the scenario's ground-truth taps"},
        {"simulate", "synthesize pilots and the received signal"},
        {"fit", "estimator RMSE sweep (static or mobile)"},
        {"baseline", "compare estimators on one scenario"},
        {"ber", "equalized BER comparison"},
        {"sense", "anomaly-detection pipeline"},
        {"report", "summarize a finished output directory"},
    };
    for (const auto &c : commands)
        app.add_subcommand(c[0], c[1])->fallthrough(); // global flags after the subcommand

    CLI11_PARSE(app, argc, argv);
    args.seed_set = seed_opt->count() > 0;

    try {
        return dispatch(app.get_subcommands().front()->get_name(), args);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
