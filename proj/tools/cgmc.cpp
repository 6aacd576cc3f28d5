#include <CLI11.hpp>

#include <cstdint>
#include <string>

#include "cgmc/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cgmc - complex Gaussian multiplicative chaos laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 0;
    bool exploratory = false;

    const std::vector<std::string> subcommands = {"phase",        "sigma2",      "sample",
                                                  "moments",      "multifractal", "gaussianity",
                                                  "gff",          "match"};
    for (const auto& name : subcommands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--threads", threads, "worker threads (0 = hardware)");
        sub->add_flag("--exploratory", exploratory,
                      "allow conjectural-phase experiments (no acceptance weight)");
    }

    CLI11_PARSE(app, argc, argv);

    cgmc::RunOptions opts;
    opts.subcommand = app.get_subcommands().front()->get_name();
    try {
        opts.config = cgmc::Config::parse_file(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    opts.out_dir = out_dir;
    if (seed_set) opts.seed_override = seed;
    opts.threads = threads;
    opts.exploratory = exploratory;
    return cgmc::run_experiment(opts);
}
