#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace birkhoff::cli {

enum ExitCode : int { exit_pass = 0, exit_check_failed = 1, exit_config = 2, exit_numerical = 3 };

struct RunResult {
    bool passed = false;
    nlohmann::json report;            // written as report.json
    std::vector<std::string> files;   // artifacts, relative to the output directory
};

// Runs a resolved config, writing artifacts into out_dir (created if needed).
RunResult run_experiment(const nlohmann::json& config, const std::string& out_dir, std::ostream& log);

// Resolves, runs and writes report.json and manifest.json. Maps library
// errors to exit codes and prints them to `err`.
int run_config(const nlohmann::json& user_config, std::ostream& log, std::ostream& err);

}  // namespace birkhoff::cli
