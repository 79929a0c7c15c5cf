#pragma once

/// \file config.hpp
///
/// YAML run configuration. A document is a flat mapping; every key not
/// given takes the documented default. Unknown keys, keys of the other
/// algorithm family, and invalid values are rejected with the key named.
///
/// ```yaml
/// method: tr            # gd | newton | bfgs | dfp | lbfgs | tr
/// tr_model: sr1         # newton | sr1 | bfgs | dfp        (tr only)
/// tr_solver: cg         # cg | cauchy                      (tr only)
/// problem: Genhumps
/// max_iters: 1000
/// delta0: 1.0
/// ```
///
/// `c1` and `c2` belong to whichever family `method` selects.

#include "solver.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace opthim {

namespace detail {

inline auto const& common_keys()
{
    static std::set<std::string> const keys{
        "method",  "problem", "grad_tol", "max_iters",         "seed",
        "eps_sy",  "out_dir", "record_trajectory", "grid_box", "grid_resolution",
        "c1",      "c2"};
    return keys;
}

inline auto const& line_search_keys()
{
    static std::set<std::string> const keys{
        "line_search", "alpha_init", "alpha_low", "alpha_high", "tau", "c",
        "max_trials",  "lbfgs_m",    "lbfgs_scaling"};
    return keys;
}

inline auto const& trust_region_keys()
{
    static std::set<std::string> const keys{
        "tr_model", "tr_solver", "delta0", "delta_min", "delta_max",
        "c3",       "cg_tol",    "cg_max_iter", "eta"};
    return keys;
}

template <class T>
auto scalar(YAML::Node const& node, std::string const& key) -> T
{
    if (!node.IsScalar()) { throw ConfigError{"config: " + key + ": expected a scalar value"}; }
    try {
        return node.as<T>();
    }
    catch (YAML::Exception const&) {
        throw ConfigError{"config: " + key + ": invalid value '" + node.Scalar() + "'"};
    }
}

template <class T, class Parse>
auto enum_value(YAML::Node const& node, std::string const& key, Parse parse,
                std::string const& choices) -> T
{
    auto const text  = scalar<std::string>(node, key);
    auto const value = parse(text);
    if (!value) {
        throw ConfigError{"config: " + key + ": '" + text + "' is not one of " + choices};
    }
    return *value;
}

} // namespace detail

/// Parses a YAML document into a validated SolverConfig.
inline auto load_config(std::string const& text) -> SolverConfig
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    }
    catch (YAML::Exception const& e) {
        throw ConfigError{std::string{"config: parse error: "} + e.what()};
    }
    if (!root.IsMap()) { throw ConfigError{"config: top level must be a mapping"}; }

    SolverConfig cfg;
    if (!root["method"]) { throw ConfigError{"config: method: required key is missing"}; }
    cfg.method = detail::enum_value<Method>(root["method"], "method", parse_method,
                                            "gd|newton|bfgs|dfp|lbfgs|tr");
    bool const tr = cfg.is_trust_region();

    for (auto const& entry : root) {
        auto const key = entry.first.as<std::string>();
        bool const common = detail::common_keys().count(key) > 0;
        bool const ls     = detail::line_search_keys().count(key) > 0;
        bool const trk    = detail::trust_region_keys().count(key) > 0;
        if (!common && !ls && !trk) { throw ConfigError{"config: " + key + ": unknown key"}; }
        if ((ls && tr) || (trk && !tr)) {
            throw ConfigError{"config: " + key + ": does not apply to method '"
                              + to_string(cfg.method) + "'"};
        }
    }

    using detail::scalar;
    auto get = [&](char const* key, auto& field) {
        if (auto node = root[key]) { field = scalar<std::decay_t<decltype(field)>>(node, key); }
    };

    if (!root["problem"]) { throw ConfigError{"config: problem: required key is missing"}; }
    cfg.problem = scalar<std::string>(root["problem"], "problem");
    get("grad_tol", cfg.grad_tol);
    get("max_iters", cfg.max_iters);
    get("seed", cfg.seed);
    get("eps_sy", cfg.eps_sy);
    get("out_dir", cfg.out_dir);
    get("grid_resolution", cfg.grid_resolution);
    if (auto node = root["record_trajectory"]) {
        cfg.record_trajectory = scalar<bool>(node, "record_trajectory");
    }
    if (auto node = root["grid_box"]) {
        if (!node.IsSequence() || node.size() != 4) {
            throw ConfigError{"config: grid_box: expected [u_lo, u_hi, v_lo, v_hi]"};
        }
        GridBox box{scalar<double>(node[0], "grid_box[0]"), scalar<double>(node[1], "grid_box[1]"),
                    scalar<double>(node[2], "grid_box[2]"), scalar<double>(node[3], "grid_box[3]")};
        if (!(box.u_lo < box.u_hi && box.v_lo < box.v_hi)) {
            throw ConfigError{"config: grid_box: bounds must be increasing"};
        }
        cfg.grid_box = box;
    }

    if (tr) {
        if (auto node = root["tr_model"]) {
            cfg.tr_model = detail::enum_value<ModelKind>(node, "tr_model", parse_model,
                                                         "newton|sr1|bfgs|dfp");
        }
        if (auto node = root["tr_solver"]) {
            cfg.tr_solver = detail::enum_value<SubproblemSolver>(node, "tr_solver", parse_solver,
                                                                 "cg|cauchy");
        }
        auto& p = cfg.trust_region_params;
        get("delta0", p.delta0);
        get("delta_min", p.delta_min);
        get("delta_max", p.delta_max);
        get("c1", p.c1);
        get("c2", p.c2);
        get("c3", p.c3);
        get("cg_tol", p.cg_tol);
        get("cg_max_iter", p.cg_max_iter);
        get("eta", p.eta);
    }
    else {
        if (auto node = root["line_search"]) {
            cfg.line_search = detail::enum_value<LineSearchKind>(node, "line_search",
                                                                 parse_line_search, "armijo|wolfe");
        }
        if (auto node = root["lbfgs_scaling"]) {
            cfg.lbfgs_scaling = detail::enum_value<LbfgsScaling>(node, "lbfgs_scaling",
                                                                 parse_scaling, "gamma|identity");
        }
        get("lbfgs_m", cfg.lbfgs_m);
        auto& p = cfg.line_search_params;
        get("alpha_init", p.alpha_init);
        get("alpha_low", p.alpha_low);
        get("alpha_high", p.alpha_high);
        get("tau", p.tau);
        get("c1", p.c1);
        get("c2", p.c2);
        get("c", p.c);
        get("max_trials", p.max_trials);
    }

    cfg.validate();
    return cfg;
}

inline auto load_config_file(std::string const& path) -> SolverConfig
{
    std::ifstream in{path};
    if (!in) { throw ConfigError{"config: cannot open '" + path + "': file not found"}; }
    std::ostringstream text;
    text << in.rdbuf();
    return load_config(text.str());
}

/// OPTHIM_SEED, when set to an unsigned integer, replaces the config seed.
inline void apply_seed_override(SolverConfig& cfg)
{
    char const* env = std::getenv("OPTHIM_SEED");
    if (env == nullptr || *env == '\0') { return; }
    char*              end   = nullptr;
    unsigned long long value = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
        throw ConfigError{std::string{"OPTHIM_SEED: '"} + env + "' is not an unsigned integer"};
    }
    cfg.seed = value;
}

} // namespace opthim
