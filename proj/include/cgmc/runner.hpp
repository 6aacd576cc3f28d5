#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cgmc/config.hpp"

namespace cgmc {

struct RunOptions {
    std::string subcommand;
    Config config;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    unsigned threads = 0;  // 0 = hardware concurrency
    bool exploratory = false;
};

// Executes one experiment: writes results.csv and manifest.json under
// out_dir. Exit code 0 on success, 1 when a recorded check fails, 2 on a
// configuration error.
int run_experiment(const RunOptions& opts);

}  // namespace cgmc
