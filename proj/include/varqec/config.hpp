#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "varqec/ansatz.hpp"
#include "varqec/codes.hpp"
#include "varqec/qsim.hpp"
#include "varqec/varqite.hpp"

namespace varqec {

/// One experiment: code + target + constraints + evolution options + noise.
/// Parsed from a single strict JSON document; unknown keys are errors.
struct ExperimentConfig {
    std::string code_name;
    StabilizerCode code;
    std::string target_name;
    LogicalTarget target;
    ConstraintSet constraints;
    RunOptions run;
    NoiseModel noise;
    uint64_t base_seed = 1;
    std::string output_dir = "out";

    EvolutionMode mode() const {
        return noise.gate_error > 0 ? EvolutionMode::mixed(noise) : EvolutionMode::pure();
    }
};

namespace detail {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
    throw ConfigError("config field \"" + path + "\": " + what);
}

inline void reject_unknown(const nlohmann::json& j, const std::string& path,
                           std::initializer_list<const char*> known) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok |= key == k;
        if (!ok) config_fail(path.empty() ? key : path + "." + key, "unknown key");
    }
}

template <typename T>
T get_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) config_fail(path, "expected a number");
    return j.get<T>();
}

inline std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw detail::ConfigError("cannot open file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw detail::ConfigError(std::string("JSON parse error in ") + path + ": " + e.what());
    }
}

inline StabilizerCode resolve_code(const std::string& spec) {
    if (spec == "five-qubit") return five_qubit_code();
    if (spec == "steane") return steane_code();
    const auto code = code_from_json(load_json_file(spec));
    require_valid(code);
    return code;
}

inline LogicalTarget parse_target(const nlohmann::json& j, std::string& name) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        name = s;
        if (s == "zero") return LogicalTarget::zero();
        if (s == "one") return LogicalTarget::one();
        if (s == "plus") return LogicalTarget::plus();
        if (s == "minus") return LogicalTarget::minus();
        if (s == "magic") return LogicalTarget::magic();
        detail::config_fail("target", "unknown named target \"" + s + "\"");
    }
    if (j.is_object()) {
        detail::reject_unknown(j, "target", {"alpha", "beta"});
        auto component = [&](const char* key) {
            if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
                detail::config_fail(std::string("target.") + key, "expected [re, im]");
            return cd(j[key][0].get<double>(), j[key][1].get<double>());
        };
        LogicalTarget t{component("alpha"), component("beta")};
        t.check_normalized();
        name = "custom";
        return t;
    }
    detail::config_fail("target", "expected a name or {alpha, beta}");
}

inline ConstraintSet parse_constraints(const nlohmann::json& j, int n_data) {
    detail::reject_unknown(j, "constraints",
                           {"allowed_two_qubit", "coupling", "max_two_qubit", "n_ancilla"});
    ConstraintSet cs;
    cs.n_data = n_data;
    if (j.contains("allowed_two_qubit")) {
        if (!j["allowed_two_qubit"].is_array())
            detail::config_fail("constraints.allowed_two_qubit", "expected an array of gate names");
        cs.allowed_two_qubit.clear();
        for (const auto& g : j["allowed_two_qubit"]) {
            const auto kind = gate_kind_from_name(g.get<std::string>());
            if (!kind || !is_two_qubit(*kind))
                detail::config_fail("constraints.allowed_two_qubit",
                                    "not a two-qubit gate: \"" + g.get<std::string>() + "\"");
            cs.allowed_two_qubit.push_back(*kind);
        }
    }
    if (j.contains("n_ancilla"))
        cs.n_ancilla = detail::get_number<int>(j["n_ancilla"], "constraints.n_ancilla");
    if (j.contains("coupling")) {
        const auto& c = j["coupling"];
        if (c.is_string()) {
            const std::string s = c.get<std::string>();
            if (s == "all-to-all")
                cs.coupling.clear();
            else if (s == "line")
                cs.coupling = line_coupling(cs.n_total());
            else
                detail::config_fail("constraints.coupling", "unknown coupling \"" + s + "\"");
        } else if (c.is_array()) {
            for (const auto& pair : c) {
                if (!pair.is_array() || pair.size() != 2)
                    detail::config_fail("constraints.coupling", "expected [a, b] pairs");
                cs.coupling.emplace_back(pair[0].get<int>(), pair[1].get<int>());
            }
        } else {
            detail::config_fail("constraints.coupling", "expected a name or pair list");
        }
    }
    if (j.contains("max_two_qubit"))
        cs.max_two_qubit = detail::get_number<int>(j["max_two_qubit"], "constraints.max_two_qubit");
    cs.check();
    return cs;
}

inline RunOptions parse_run_options(const nlohmann::json& j) {
    detail::reject_unknown(j, "run",
                           {"dtau", "max_steps", "reg_lambda", "success_energy", "plateau_window",
                            "plateau_eps", "max_restarts", "goal_two_qubit", "prune_threshold"});
    RunOptions o;
    if (j.contains("dtau")) o.dtau = detail::get_number<double>(j["dtau"], "run.dtau");
    if (j.contains("max_steps"))
        o.max_steps = detail::get_number<int>(j["max_steps"], "run.max_steps");
    if (j.contains("reg_lambda"))
        o.reg_lambda = detail::get_number<double>(j["reg_lambda"], "run.reg_lambda");
    if (j.contains("success_energy") && !j["success_energy"].is_null())
        o.success_energy = detail::get_number<double>(j["success_energy"], "run.success_energy");
    if (j.contains("plateau_window"))
        o.plateau_window = detail::get_number<int>(j["plateau_window"], "run.plateau_window");
    if (j.contains("plateau_eps"))
        o.plateau_eps = detail::get_number<double>(j["plateau_eps"], "run.plateau_eps");
    if (j.contains("max_restarts"))
        o.max_restarts = detail::get_number<int>(j["max_restarts"], "run.max_restarts");
    if (j.contains("goal_two_qubit"))
        o.goal_two_qubit = detail::get_number<int>(j["goal_two_qubit"], "run.goal_two_qubit");
    if (j.contains("prune_threshold"))
        o.prune_threshold = detail::get_number<double>(j["prune_threshold"], "run.prune_threshold");
    o.check();
    return o;
}

inline NoiseModel parse_noise(const nlohmann::json& j) {
    detail::reject_unknown(j, "noise", {"gate_error", "meas_error"});
    NoiseModel n;
    if (j.contains("gate_error"))
        n.gate_error = detail::get_number<double>(j["gate_error"], "noise.gate_error");
    n.meas_error = n.gate_error;  // default: same rate everywhere
    if (j.contains("meas_error"))
        n.meas_error = detail::get_number<double>(j["meas_error"], "noise.meas_error");
    n.check();
    return n;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw detail::ConfigError("config must be a JSON object");
    detail::reject_unknown(
        j, "", {"code", "target", "constraints", "run", "noise", "base_seed", "output_dir"});
    if (!j.contains("code")) detail::config_fail("code", "missing");
    if (!j.contains("target")) detail::config_fail("target", "missing");

    ExperimentConfig cfg;
    cfg.code_name = j["code"].get<std::string>();
    cfg.code = resolve_code(cfg.code_name);
    require_valid(cfg.code);
    cfg.target = parse_target(j["target"], cfg.target_name);
    cfg.constraints =
        parse_constraints(j.contains("constraints") ? j["constraints"] : nlohmann::json::object(),
                          cfg.code.n_qubits);
    cfg.run = parse_run_options(j.contains("run") ? j["run"] : nlohmann::json::object());
    cfg.noise = parse_noise(j.contains("noise") ? j["noise"] : nlohmann::json::object());
    if (j.contains("base_seed"))
        cfg.base_seed = detail::get_number<uint64_t>(j["base_seed"], "base_seed");
    cfg.run.base_seed = cfg.base_seed;
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    return config_from_json(load_json_file(path));
}

/// Default error-rate grid for noise sweeps.
inline std::vector<double> default_r_grid() {
    return {0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.15};
}

}  // namespace varqec
