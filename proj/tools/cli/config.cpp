#include "cli/config.hpp"

#include <fstream>
#include <memory>

#include "birkhoff/counterexamples.hpp"
#include "birkhoff/error.hpp"

namespace birkhoff::cli {

namespace {

json model_defaults(const std::string& kind) {
    return {{"kind", kind},
            {"constant", 0.0},
            {"period", 1.0},
            {"base", "appendix_pendulum"},
            {"bump", {{"x0", 0.5}, {"p0", 1.72}, {"radius_x", 0.06}, {"radius_p", 0.06}, {"height", 5.0}}},
            {"table", ""}};
}

json lo_defaults() {
    return {{"tau", 0.0125}, {"v_max", 6.0}, {"tol", 1e-9}, {"max_iterations", 100000}};
}

json fd_defaults() {
    return {{"tol", 1e-8}, {"local_viscosity", false}, {"momentum_bound", 3.0}, {"max_sweeps", 50000000}};
}

json attractor_grid(std::size_t n, double p_min, double p_max, double map_time) {
    return {{"n_theta", n},  {"n_p", n},           {"p_min", p_min},
            {"p_max", p_max}, {"map_time", map_time}, {"dt", 0.01},
            {"n_max", 60},    {"c0_method", "cell_recursion"}};
}

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) {
        // Integers may be given where floats are expected, not the reverse.
        return !(a.is_number_integer() || a.is_number_unsigned()) || b.is_number_integer() || b.is_number_unsigned();
    }
    return a.type() == b.type();
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"pendulum-attractor", "solve-hj",    "inclusion-check",
                                                "spiral-gap",         "limit-alpha", "counterexample",
                                                "property-suite"};
    return names;
}

json defaults_for(const std::string& experiment) {
    json d = {{"experiment", experiment}, {"output", "out"}, {"workers", 1}, {"seed", 1}};
    if (experiment == "pendulum-attractor") {
        d["model"] = model_defaults("pendulum");
        d["alpha"] = 0.5;
        d["grid"] = attractor_grid(512, -3.0, 3.0, 2.0);
        d["tol_cells"] = 3.0;
    } else if (experiment == "solve-hj") {
        d["method"] = "lo";
        d["model"] = model_defaults("appendix_pendulum");
        d["alpha"] = 0.5;
        d["n"] = 2048;
        d["lo"] = lo_defaults();
        d["fd"] = fd_defaults();
        d["residual_factor"] = 5.0;
    } else if (experiment == "inclusion-check") {
        d["method"] = "lo";
        d["model"] = model_defaults("pendulum");
        d["alpha"] = 0.5;
        d["n"] = 2048;
        d["lo"] = lo_defaults();
        d["fd"] = fd_defaults();
        d["grid"] = attractor_grid(2048, -3.0, 3.0, 2.0);
        d["tol_cells"] = 3.0;
    } else if (experiment == "spiral-gap") {
        d["alpha"] = 0.1;
        d["betas"] = {0.01};
        d["truncate_time"] = 80.0;
        d["search_radius"] = 0.0;  // 0: unbounded
    } else if (experiment == "limit-alpha") {
        d["model"] = model_defaults("appendix_pendulum");
        d["alphas"] = {0.8, 0.4, 0.2, 0.1};
        d["n"] = 1024;
        d["lo"] = lo_defaults();
    } else if (experiment == "counterexample") {
        d["question"] = "q1";
        d["alpha"] = 0.5;
        d["bump"] = model_defaults("perturbed")["bump"];
        d["n"] = 2048;
        d["fd_n"] = 1024;
        d["fd"] = fd_defaults();
        d["fd"]["local_viscosity"] = true;
        d["grid"] = attractor_grid(512, -2.5, 2.5, 2.0);
        d["tol_cells"] = 2.0;
        d["construction"] = to_json(Q3Spec{});
        d["verify"] = {{"with_attractor", true},
                       {"grid", attractor_grid(256, -3.0, 3.0, 1.0)},
                       {"attractor_table", {{"nx", 1024}, {"np", 1201}}}};
        d["table"] = {{"nx", 256}, {"np", 241}};
    } else if (experiment == "property-suite") {
        d["lo_pairs"] = 100;
        d["lo_alphas"] = {0.1, 0.5, 1.0};
        d["lo_tau"] = 0.05;
        d["lo_n"] = 128;
        d["contraction_sequences"] = 1000;
        d["contraction_dimension"] = 4;
        d["fd_pairs"] = 50;
    } else {
        std::string msg = "unknown experiment '" + experiment + "' (known:";
        for (const auto& n : experiment_names()) msg += " " + n;
        throw ConfigError(msg + ")");
    }
    return d;
}

json overlay(const json& defaults, const json& user, std::vector<std::string>& errors, const std::string& path) {
    json out = defaults;
    if (!user.is_object()) {
        errors.push_back((path.empty() ? "<root>" : path) + ": expected a section");
        return out;
    }
    for (const auto& [key, value] : user.items()) {
        const std::string here = path.empty() ? key : path + "." + key;
        if (!defaults.contains(key)) {
            errors.push_back(here + ": unknown key");
            continue;
        }
        const json& d = defaults.at(key);
        if (d.is_object()) {
            out[key] = overlay(d, value, errors, here);
        } else if (!same_kind(d, value)) {
            errors.push_back(here + ": expected " + std::string(d.type_name()) + ", got " + value.type_name());
        } else {
            out[key] = value;
        }
    }
    return out;
}

json resolve_config(const json& user) {
    if (!user.is_object()) throw ConfigError("config must be a JSON object");
    if (!user.contains("experiment") || !user.at("experiment").is_string())
        throw ConfigError("config needs a string key 'experiment'");
    const json defaults = defaults_for(user.at("experiment").get<std::string>());
    std::vector<std::string> errors;
    json resolved = overlay(defaults, user, errors);
    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return resolved;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
}

HamiltonianModel model_from(const json& section, double alpha) {
    const auto kind = section.at("kind").get<std::string>();
    if (kind == "pendulum") return HamiltonianModel::pendulum(alpha);
    if (kind == "appendix_pendulum") return HamiltonianModel::appendix_pendulum(alpha);
    if (kind == "constant_potential")
        return HamiltonianModel::constant_potential(section.at("constant").get<double>(), alpha,
                                                    section.at("period").get<double>());
    if (kind == "perturbed") {
        json base = section;
        base["kind"] = section.at("base");
        if (base["kind"] == "perturbed") throw ConfigError("model.base cannot itself be perturbed");
        const json& b = section.at("bump");
        return build_perturbed(model_from(base, alpha),
                               BumpSpec{b.at("x0").get<double>(), b.at("p0").get<double>(),
                                        b.at("radius_x").get<double>(), b.at("radius_p").get<double>(),
                                        b.at("height").get<double>()});
    }
    if (kind == "tabulated") {
        const auto path = section.at("table").get<std::string>();
        if (path.empty()) throw ConfigError("model.table must name a tabulated-model CSV");
        return HamiltonianModel::from_surface(
            ModelKind::tabulated, std::make_shared<const TabulatedSurface>(TabulatedSurface::read_csv(path)), alpha);
    }
    throw ConfigError("model.kind '" + kind +
                      "' is not one of pendulum, appendix_pendulum, constant_potential, perturbed, tabulated");
}

}  // namespace birkhoff::cli
