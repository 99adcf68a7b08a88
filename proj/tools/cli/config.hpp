#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "birkhoff/models.hpp"

namespace birkhoff::cli {

using nlohmann::json;

// Every experiment the runner knows, in help order.
const std::vector<std::string>& experiment_names();

// Full default configuration of an experiment. Throws ConfigError for an unknown name.
json defaults_for(const std::string& experiment);

// Overlays `user` on `defaults`. Keys absent from the defaults and values of
// the wrong JSON type are appended to `errors` as dotted paths; user values
// win otherwise. Arrays and strings replace wholesale.
json overlay(const json& defaults, const json& user, std::vector<std::string>& errors,
             const std::string& path = "");

// Reads a config file and resolves it against the defaults of its
// "experiment". Throws ConfigError listing every offending key.
json resolve_config(const json& user);
json load_config_file(const std::string& path);

// Model from a resolved "model" section.
HamiltonianModel model_from(const json& section, double alpha);

}  // namespace birkhoff::cli
