// main.cpp - cogs command-line entry point: argument parsing and the mapping
// from exceptions to exit codes (0 ok, 2 usage/config, 3 numeric failure).
#include <exception>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "cogs/common.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"co-speech gesture pipeline: synthesize data, train, generate, "
                 "evaluate, inspect"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        void (*run)(const cogs::cli::Options&);
        cogs::cli::Options opts;
        CLI::Option* seed_opt = nullptr;
    };
    Sub subs[] = {
        {"synth-data", "write a deterministic synthetic corpus", cogs::cli::run_synth_data, {},
         nullptr},
        {"train", "train on a corpus manifest, checkpointing per epoch", cogs::cli::run_train,
         {}, nullptr},
        {"generate", "generate pose files for every clip in a manifest",
         cogs::cli::run_generate, {}, nullptr},
        {"evaluate", "compare generated poses against a real corpus", cogs::cli::run_evaluate,
         {}, nullptr},
        {"inspect", "dump adjacency / attention / alignment as JSON", cogs::cli::run_inspect,
         {}, nullptr},
    };

    for (auto& sub : subs) {
        auto* cmd = app.add_subcommand(sub.name, sub.help);
        cmd->add_option("--config", sub.opts.config_path, "JSON config file")
            ->required();
        cmd->add_option("--out", sub.opts.out_dir, "output directory");
        sub.seed_opt = cmd->add_option("--seed", sub.opts.seed, "seed override");
        cmd->add_flag("--quiet", sub.opts.quiet, "suppress informational output");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (auto& sub : subs) {
        if (!app.got_subcommand(sub.name)) continue;
        sub.opts.has_seed = sub.seed_opt->count() > 0;
        try {
            sub.run(sub.opts);
            return 0;
        } catch (const cogs::numeric_error& e) {
            std::cerr << "numeric failure: " << e.what() << "\n";
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    return 2;
}
