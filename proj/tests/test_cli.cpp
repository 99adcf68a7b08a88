#include <filesystem>
#include <fstream>
#include <sstream>

#include "birkhoff/error.hpp"
#include "cli/config.hpp"
#include "cli/experiments.hpp"
#include "doctest.h"

using namespace birkhoff::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("birkhoff_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("every experiment has defaults that resolve") {
    for (const auto& name : experiment_names()) {
        CAPTURE(name);
        CHECK(resolve_config({{"experiment", name}}) == defaults_for(name));
    }
}

TEST_CASE("config errors list every offending key") {
    const json user = {{"experiment", "solve-hj"},
                       {"bogus", 1},
                       {"alpha", "half"},
                       {"lo", {{"tau", 0.1}, {"nope", true}}},
                       {"n", 1.5}};
    try {
        resolve_config(user);
        FAIL("expected a config error");
    } catch (const birkhoff::ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bogus: unknown key") != std::string::npos);
        CHECK(msg.find("lo.nope: unknown key") != std::string::npos);
        CHECK(msg.find("alpha: expected number") != std::string::npos);
        CHECK(msg.find("n: expected number") != std::string::npos);
        CHECK(msg.find("lo.tau") == std::string::npos);
    }
    // integers are fine where floats are expected
    CHECK(resolve_config({{"experiment", "solve-hj"}, {"alpha", 1}}).at("alpha") == 1);
    CHECK_THROWS_AS(resolve_config({{"experiment", "no-such"}}), birkhoff::ConfigError);
    CHECK_THROWS_AS(resolve_config(json::array()), birkhoff::ConfigError);
}

TEST_CASE("exit codes") {
    std::ostringstream log, err;
    CHECK(run_config({{"experiment", "solve-hj"}, {"nope", 0}}, log, err) == exit_config);
    CHECK(err.str().find("nope: unknown key") != std::string::npos);

    const auto dir = scratch("exit");
    json pass = {{"experiment", "solve-hj"}, {"n", 256}, {"output", (dir / "pass").string()}};
    CHECK(run_config(pass, log, err) == exit_pass);

    json fail = {{"experiment", "spiral-gap"}, {"betas", {0.05}}, {"output", (dir / "fail").string()}};
    CHECK(run_config(fail, log, err) == exit_check_failed);
    CHECK(json::parse(slurp(dir / "fail" / "manifest.json")).at("exit_code") == exit_check_failed);

    json stuck = {{"experiment", "solve-hj"},
                  {"n", 256},
                  {"lo", {{"max_iterations", 2}}},
                  {"output", (dir / "stuck").string()}};
    CHECK(run_config(stuck, log, err) == exit_numerical);

    json bad_method = {{"experiment", "solve-hj"}, {"method", "spectral"}, {"output", (dir / "bad").string()}};
    CHECK(run_config(bad_method, log, err) == exit_config);
    fs::remove_all(dir);
}

TEST_CASE("manifest echoes the resolved config and reruns are byte-identical") {
    const auto dir = scratch("rerun");
    std::ostringstream log, err;
    auto run = [&](const std::string& sub) {
        json cfg = {{"experiment", "solve-hj"}, {"method", "fd"}, {"n", 256}, {"output", (dir / sub).string()}};
        REQUIRE(run_config(cfg, log, err) == exit_pass);
    };
    run("a");
    run("b");
    const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
    json expected = defaults_for("solve-hj");
    expected["method"] = "fd";
    expected["n"] = 256;
    expected["output"] = (dir / "a").string();
    CHECK(manifest.at("config") == expected);
    CHECK(manifest.at("passed") == true);
    for (const char* f : {"u.csv", "report.json", "u.svg"}) {
        CAPTURE(f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }

    json suite = {{"experiment", "property-suite"}, {"lo_pairs", 5}, {"contraction_sequences", 20},
                  {"fd_pairs", 5}, {"seed", 42}};
    suite["output"] = (dir / "s1").string();
    REQUIRE(run_config(suite, log, err) == exit_pass);
    suite["output"] = (dir / "s2").string();
    REQUIRE(run_config(suite, log, err) == exit_pass);
    CHECK(slurp(dir / "s1" / "report.json") == slurp(dir / "s2" / "report.json"));
    fs::remove_all(dir);
}
