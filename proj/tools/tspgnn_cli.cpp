// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
//
// Command-line front end: generate / train / eval / curve / cost / baseline,
// driven by a key=value config file with --set overrides.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data or capacity
// error, 3 internal invariant violation.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "tspgnn/commands.hpp"
#include "tspgnn/version.hpp"

namespace {

struct CommonArgs {
    std::string config_file;
    std::vector<std::string> overrides;  // key=value
    std::string seed, threads, out_dir, dataset, checkpoint;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_file, "key = value configuration file");
    cmd->add_option("-s,--set", args.overrides, "override a config key (key=value), repeatable");
    cmd->add_option("--seed", args.seed, "override seed");
    cmd->add_option("--threads", args.threads, "override worker thread count");
    cmd->add_option("--out", args.out_dir, "override out_dir");
    cmd->add_option("--dataset", args.dataset, "override dataset path");
    cmd->add_option("--checkpoint", args.checkpoint, "override checkpoint path");
}

// Precedence: defaults < config file < --set < dedicated flags.
tspgnn::RunConfig resolve(const CommonArgs& args) {
    tspgnn::RunConfig cfg;
    if (!args.config_file.empty()) cfg.load_file(args.config_file);
    for (const std::string& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw tspgnn::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!args.seed.empty()) cfg.set("seed", args.seed);
    if (!args.threads.empty()) cfg.set("threads", args.threads);
    if (!args.out_dir.empty()) cfg.set("out_dir", args.out_dir);
    if (!args.dataset.empty()) cfg.set("dataset", args.dataset);
    if (!args.checkpoint.empty()) cfg.set("checkpoint", args.checkpoint);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decision-TSP graph network: dataset generation, training, evaluation and "
                 "optimal-cost extraction"};
    app.set_version_flag("--version", std::string(tspgnn::kVersion));
    app.require_subcommand(1);

    CommonArgs args;
    void (*handlers[])(const tspgnn::RunConfig&) = {
        tspgnn::cmd_generate, tspgnn::cmd_train, tspgnn::cmd_eval,
        tspgnn::cmd_curve,    tspgnn::cmd_cost,  tspgnn::cmd_baseline,
    };
    const char* names[] = {"generate", "train", "eval", "curve", "cost", "baseline"};
    const char* blurbs[] = {
        "produce and persist a solved instance dataset",
        "run the supervised training loop",
        "accuracy sweeps over deviations, sizes and distributions",
        "acceptance curves per size class",
        "binary-search cost extraction (dataset or TSPLIB mode)",
        "nearest-neighbor / annealing baselines with calibration",
    };
    std::size_t chosen = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
        add_common(sub, args);
        sub->callback([&chosen, i]() { chosen = i; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        handlers[chosen](resolve(args));
        return 0;
    } catch (const tspgnn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const tspgnn::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const tspgnn::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const tspgnn::ShapeError& e) {
        std::cerr << "internal shape error: " << e.what() << '\n';
        return 3;
    } catch (const tspgnn::InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
