// commands.hpp - the five cogs subcommands. Each throws on failure; main.cpp
// maps exceptions to exit codes (2 usage/config, 3 numeric).
#pragma once

#include <cstdint>
#include <string>

namespace cogs::cli {

struct Options {
    std::string config_path;
    std::string out_dir;       // empty unless --out given
    std::uint64_t seed = 0;    // --seed override
    bool has_seed = false;
    bool quiet = false;
};

void run_synth_data(const Options& opts);
void run_train(const Options& opts);
void run_generate(const Options& opts);
void run_evaluate(const Options& opts);
void run_inspect(const Options& opts);

}  // namespace cogs::cli
