#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "birkhoff/error.hpp"
#include "cli/config.hpp"
#include "cli/experiments.hpp"

int main(int argc, char** argv) {
    using namespace birkhoff::cli;
    CLI::App app{"Runs a discounted Hamilton-Jacobi experiment from a JSON config."};
    std::string config_path, out;
    std::size_t workers = 0;
    long long seed = -1;
    std::string defaults_of;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out, "output directory, overrides the config");
    app.add_option("--workers", workers, "worker threads, overrides the config")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "random seed, overrides the config")->check(CLI::NonNegativeNumber);
    app.add_option("--defaults", defaults_of, "print the full default config of an experiment and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (!defaults_of.empty()) {
            std::cout << defaults_for(defaults_of).dump(2) << '\n';
            return exit_pass;
        }
        if (config_path.empty()) {
            std::cerr << "--config is required (experiments:";
            for (const auto& n : experiment_names()) std::cerr << ' ' << n;
            std::cerr << ")\n";
            return exit_config;
        }
        json user = load_config_file(config_path);
        if (user.is_object()) {
            if (!out.empty()) user["output"] = out;
            if (workers > 0) user["workers"] = workers;
            if (seed >= 0) user["seed"] = seed;
        }
        return run_config(user, std::cout, std::cerr);
    } catch (const birkhoff::Error& e) {
        std::cerr << e.what() << '\n';
        return exit_config;
    }
}
