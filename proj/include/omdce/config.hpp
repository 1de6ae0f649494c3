#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "params.hpp"
#include "types.hpp"

namespace omdce {

// Sectioned key=value text, '#' comments. Parsed into a nested map first so
// that command-line overrides can be applied uniformly before the typed
// config is built (precedence: built-in defaults < file < --set flags).
using KvMap = std::map<std::string, std::map<std::string, std::string>>;

struct ExperimentConfig {
    std::string protocol;

    SystemParams system;
    int n_cav = 8, n_m1 = 8, n_m2 = 8;
    BathSpec bath;
    DriveSpec drive; // sigma == 0 on a pulse means: derive from the resonance
    ModulationSpec modulation;

    // sweep / splitting search
    double sweep_min = 0.9, sweep_max = 1.1;
    int sweep_points = 121;
    int track_levels = 12;
    int coarse_points = 31;
    std::vector<std::array<int, 3>> selector{{1, 0, 0}, {0, 1, 0}}; // bare (k,q,n)
    std::vector<double> g_values;

    // perturbation
    int sum_cutoff = 14;
    double omega2_table = 0.94;

    // dynamics
    double t_end = 0.0;
    int n_samples = 201;
    int kept_levels = 0; // 0 = full space
    double rtol = 1e-8, atol = 1e-10;
    int n_populations = 6;
    bool track_negativity = false;

    // initial state (superposition of bare kets, normalized)
    std::vector<std::array<int, 3>> initial_states{{1, 0, 0}};
    std::vector<double> initial_weights;

    // platform estimate
    double g_m = 0.0, g_c = 0.0, detuning = 0.0, enhancement = 1.0;

    std::string out_dir = "out";

    std::vector<std::string> warnings;
    KvMap effective; // every key the run will use, defaults materialized
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"", {"protocol"}},
        {"system", {"omega_c", "omega_1", "omega_2", "g_1", "g_2"}},
        {"space", {"n_cav", "n_m1", "n_m2"}},
        {"bath", {"gamma_1", "gamma_2", "kappa", "temperature"}},
        {"drive", {"target", "kind", "amplitude", "omega_d", "t0", "sigma"}},
        {"modulation", {"enabled", "delta", "t0", "t_f", "omega_s"}},
        {"sweep",
         {"omega2_min", "omega2_max", "points", "n_levels", "coarse_points", "selector",
          "g_values"}},
        {"perturbation", {"sum_cutoff", "omega2_table"}},
        {"dynamics",
         {"t_end", "n_samples", "n_levels", "rtol", "atol", "populations",
          "track_negativity"}},
        {"initial", {"states", "weights"}},
        {"platform", {"g_m", "g_c", "detuning", "enhancement"}},
        {"output", {"dir"}},
    };
    return schema;
}

inline const std::set<std::string>& protocol_names() {
    static const std::set<std::string> names = {
        "spectrum_sweep",   "min_splitting",     "splitting_vs_g",
        "perturbation_tables", "cw_dynamics",    "pulsed_dynamics",
        "pdc_dynamics",     "nonadiabatic_transfer", "platform_estimate"};
    return names;
}

inline std::string join_keys(const std::set<std::string>& keys) {
    std::string out;
    for (const auto& k : keys) {
        if (!out.empty()) out += ", ";
        out += k;
    }
    return out;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& sec, const std::string& key,
                           const std::string& v) {
    try {
        size_t used = 0;
        double x = std::stod(v, &used);
        if (trim(v.substr(used)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw config_error("key " + (sec.empty() ? key : sec + "." + key)
                       + " needs a number, got '" + v + "'");
}

inline int parse_int(const std::string& sec, const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        int x = std::stoi(v, &used);
        if (trim(v.substr(used)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw config_error("key " + (sec.empty() ? key : sec + "." + key)
                       + " needs an integer, got '" + v + "'");
}

inline bool parse_bool(const std::string& sec, const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw config_error("key " + (sec.empty() ? key : sec + "." + key)
                       + " needs true/false, got '" + v + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

inline std::vector<double> parse_double_list(const std::string& sec, const std::string& key,
                                             const std::string& v) {
    std::vector<double> out;
    for (const auto& p : split(v, ','))
        if (!p.empty()) out.push_back(parse_double(sec, key, p));
    return out;
}

// "k,q,n; k,q,n; ..." bare-state triples
inline std::vector<std::array<int, 3>> parse_triples(const std::string& sec,
                                                     const std::string& key,
                                                     const std::string& v) {
    std::vector<std::array<int, 3>> out;
    for (const auto& group : split(v, ';')) {
        if (group.empty()) continue;
        auto nums = split(group, ',');
        if (nums.size() != 3)
            throw config_error("key " + sec + "." + key + " needs k,q,n triples, got '"
                               + group + "'");
        out.push_back({parse_int(sec, key, nums[0]), parse_int(sec, key, nums[1]),
                       parse_int(sec, key, nums[2])});
    }
    return out;
}

inline std::string format_double(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace detail

inline KvMap parse_kv(const std::string& text) {
    KvMap kv;
    std::string section;
    int lineno = 0;
    std::string line;
    size_t pos = 0;
    const auto& schema = detail::config_schema();
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("line " + std::to_string(lineno) + ": unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!schema.count(section)) {
                std::string valid;
                for (const auto& [s, _] : schema)
                    if (!s.empty()) valid += (valid.empty() ? "" : ", ") + s;
                throw config_error("unknown section [" + section + "]; valid sections: " + valid);
            }
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) + ": expected key = value, got '"
                               + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const auto it = schema.find(section);
        if (it == schema.end() || !it->second.count(key))
            throw config_error("unknown key '" + key + "' in section ["+ section + "]; valid keys: "
                               + detail::join_keys(schema.at(section)));
        kv[section][key] = val;
    }
    return kv;
}

// --set overrides use "section.key=value" ("protocol=x" for the top level)
inline void apply_override(KvMap& kv, const std::string& expr) {
    const size_t eq = expr.find('=');
    if (eq == std::string::npos)
        throw usage_error("--set expects section.key=value, got '" + expr + "'");
    std::string path = detail::trim(expr.substr(0, eq));
    const std::string val = detail::trim(expr.substr(eq + 1));
    std::string section, key;
    const size_t dot = path.find('.');
    if (dot == std::string::npos) {
        key = path;
    } else {
        section = path.substr(0, dot);
        key = path.substr(dot + 1);
    }
    const auto& schema = detail::config_schema();
    const auto it = schema.find(section);
    if (it == schema.end())
        throw usage_error("--set: unknown section '" + section + "'");
    if (!it->second.count(key))
        throw usage_error("--set: unknown key '" + key + "' in section [" + section
                          + "]; valid keys: " + detail::join_keys(it->second));
    kv[section][key] = val;
}

inline ExperimentConfig build_config(const KvMap& kv) {
    ExperimentConfig cfg;
    using namespace detail;

    auto get = [&](const std::string& sec, const std::string& key,
                   const std::string* out_raw = nullptr) -> const std::string* {
        (void)out_raw;
        auto s = kv.find(sec);
        if (s == kv.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    };
    auto getd = [&](const std::string& sec, const std::string& key, double& dst) {
        if (auto* v = get(sec, key)) dst = parse_double(sec, key, *v);
    };
    auto geti = [&](const std::string& sec, const std::string& key, int& dst) {
        if (auto* v = get(sec, key)) dst = parse_int(sec, key, *v);
    };
    auto getb = [&](const std::string& sec, const std::string& key, bool& dst) {
        if (auto* v = get(sec, key)) dst = parse_bool(sec, key, *v);
    };

    if (auto* v = get("", "protocol")) {
        cfg.protocol = *v;
    } else {
        throw config_error("missing required key 'protocol'; valid protocols: "
                           + join_keys(protocol_names()));
    }
    if (!protocol_names().count(cfg.protocol))
        throw config_error("unknown protocol '" + cfg.protocol + "'; valid protocols: "
                           + join_keys(protocol_names()));

    getd("system", "omega_c", cfg.system.omega_c);
    getd("system", "omega_1", cfg.system.omega_1);
    getd("system", "omega_2", cfg.system.omega_2);
    getd("system", "g_1", cfg.system.g_1);
    getd("system", "g_2", cfg.system.g_2);
    cfg.system.validate();
    if (cfg.system.g_1 > 0.5 || cfg.system.g_2 > 0.5)
        cfg.warnings.push_back("coupling above 0.5; all inputs are in units of omega_1");
    if (cfg.system.omega_c > 10.0 || cfg.system.omega_2 > 10.0)
        cfg.warnings.push_back("frequency above 10; all inputs are in units of omega_1");

    geti("space", "n_cav", cfg.n_cav);
    geti("space", "n_m1", cfg.n_m1);
    geti("space", "n_m2", cfg.n_m2);

    getd("bath", "gamma_1", cfg.bath.gamma_1);
    getd("bath", "gamma_2", cfg.bath.gamma_2);
    getd("bath", "kappa", cfg.bath.kappa);
    getd("bath", "temperature", cfg.bath.temperature);
    cfg.bath.validate();

    if (auto* v = get("drive", "target")) {
        if (*v == "mirror1") cfg.drive.target = Target::mirror1;
        else if (*v == "mirror2") cfg.drive.target = Target::mirror2;
        else throw config_error("drive.target must be mirror1 or mirror2, got '" + *v + "'");
    }
    if (auto* v = get("drive", "kind")) {
        if (*v == "none") cfg.drive.kind = DriveKind::none;
        else if (*v == "continuous") cfg.drive.kind = DriveKind::continuous;
        else if (*v == "gaussian_pulse") cfg.drive.kind = DriveKind::gaussian_pulse;
        else throw config_error("drive.kind must be none, continuous or gaussian_pulse, got '"
                                + *v + "'");
    }
    getd("drive", "amplitude", cfg.drive.amplitude);
    getd("drive", "omega_d", cfg.drive.omega_d);
    getd("drive", "t0", cfg.drive.t0);
    getd("drive", "sigma", cfg.drive.sigma);
    if (cfg.drive.amplitude < 0)
        throw config_error("drive.amplitude must be non-negative");
    // a pulse with sigma == 0 is resolved by the protocol (sigma = 1/(10 lambda));
    // anything else must validate now
    if (!(cfg.drive.kind == DriveKind::gaussian_pulse && cfg.drive.sigma == 0.0))
        cfg.drive.validate();

    getb("modulation", "enabled", cfg.modulation.enabled);
    getd("modulation", "delta", cfg.modulation.delta);
    getd("modulation", "t0", cfg.modulation.t0);
    getd("modulation", "t_f", cfg.modulation.t_f);
    getd("modulation", "omega_s", cfg.modulation.Omega_s);
    cfg.modulation.validate();

    getd("sweep", "omega2_min", cfg.sweep_min);
    getd("sweep", "omega2_max", cfg.sweep_max);
    geti("sweep", "points", cfg.sweep_points);
    geti("sweep", "n_levels", cfg.track_levels);
    geti("sweep", "coarse_points", cfg.coarse_points);
    if (auto* v = get("sweep", "selector")) cfg.selector = parse_triples("sweep", "selector", *v);
    if (auto* v = get("sweep", "g_values")) cfg.g_values = parse_double_list("sweep", "g_values", *v);
    if (!(cfg.sweep_max > cfg.sweep_min))
        throw config_error("sweep.omega2_max must exceed sweep.omega2_min");
    if (cfg.sweep_points < 2) throw config_error("sweep.points must be at least 2");
    if (cfg.selector.size() < 2)
        throw config_error("sweep.selector needs at least two bare states");

    geti("perturbation", "sum_cutoff", cfg.sum_cutoff);
    getd("perturbation", "omega2_table", cfg.omega2_table);

    getd("dynamics", "t_end", cfg.t_end);
    geti("dynamics", "n_samples", cfg.n_samples);
    geti("dynamics", "n_levels", cfg.kept_levels);
    getd("dynamics", "rtol", cfg.rtol);
    getd("dynamics", "atol", cfg.atol);
    geti("dynamics", "populations", cfg.n_populations);
    getb("dynamics", "track_negativity", cfg.track_negativity);
    if (cfg.n_samples < 2) throw config_error("dynamics.n_samples must be at least 2");

    if (auto* v = get("initial", "states"))
        cfg.initial_states = parse_triples("initial", "states", *v);
    if (auto* v = get("initial", "weights"))
        cfg.initial_weights = parse_double_list("initial", "weights", *v);
    if (cfg.initial_states.empty())
        throw config_error("initial.states must name at least one bare state");
    if (!cfg.initial_weights.empty() && cfg.initial_weights.size() != cfg.initial_states.size())
        throw config_error("initial.weights must match initial.states in length");

    getd("platform", "g_m", cfg.g_m);
    getd("platform", "g_c", cfg.g_c);
    getd("platform", "detuning", cfg.detuning);
    getd("platform", "enhancement", cfg.enhancement);

    if (auto* v = get("output", "dir")) cfg.out_dir = *v;

    // per-protocol required fields
    const bool is_dynamics = cfg.protocol == "cw_dynamics" || cfg.protocol == "pulsed_dynamics"
                             || cfg.protocol == "pdc_dynamics"
                             || cfg.protocol == "nonadiabatic_transfer";
    if (is_dynamics && !(cfg.t_end > 0.0))
        throw config_error("protocol " + cfg.protocol + " requires dynamics.t_end > 0");
    if (cfg.protocol == "splitting_vs_g" && cfg.g_values.empty())
        throw config_error("protocol splitting_vs_g requires sweep.g_values");
    if (cfg.protocol == "platform_estimate") {
        for (const char* k : {"g_m", "g_c", "detuning"})
            if (!get("platform", k))
                throw config_error("protocol platform_estimate requires platform." + std::string(k));
    }
    if (cfg.protocol == "pulsed_dynamics" && cfg.drive.kind != DriveKind::gaussian_pulse)
        throw config_error("protocol pulsed_dynamics requires drive.kind = gaussian_pulse");
    if (cfg.protocol == "nonadiabatic_transfer" && !cfg.modulation.enabled)
        throw config_error("protocol nonadiabatic_transfer requires modulation.enabled = true");

    // materialize the effective key set for the echo
    auto put = [&](const std::string& sec, const std::string& key, const std::string& val) {
        cfg.effective[sec][key] = val;
    };
    put("", "protocol", cfg.protocol);
    put("system", "omega_c", format_double(cfg.system.omega_c));
    put("system", "omega_1", format_double(cfg.system.omega_1));
    put("system", "omega_2", format_double(cfg.system.omega_2));
    put("system", "g_1", format_double(cfg.system.g_1));
    put("system", "g_2", format_double(cfg.system.g_2));
    put("space", "n_cav", std::to_string(cfg.n_cav));
    put("space", "n_m1", std::to_string(cfg.n_m1));
    put("space", "n_m2", std::to_string(cfg.n_m2));
    put("bath", "gamma_1", format_double(cfg.bath.gamma_1));
    put("bath", "gamma_2", format_double(cfg.bath.gamma_2));
    put("bath", "kappa", format_double(cfg.bath.kappa));
    put("bath", "temperature", format_double(cfg.bath.temperature));
    put("drive", "target", cfg.drive.target == Target::mirror1 ? "mirror1" : "mirror2");
    put("drive", "kind", cfg.drive.kind == DriveKind::none ? "none"
                         : cfg.drive.kind == DriveKind::continuous ? "continuous"
                                                                   : "gaussian_pulse");
    put("drive", "amplitude", format_double(cfg.drive.amplitude));
    put("drive", "omega_d", format_double(cfg.drive.omega_d));
    put("drive", "t0", format_double(cfg.drive.t0));
    put("drive", "sigma", format_double(cfg.drive.sigma));
    put("modulation", "enabled", cfg.modulation.enabled ? "true" : "false");
    put("modulation", "delta", format_double(cfg.modulation.delta));
    put("modulation", "t0", format_double(cfg.modulation.t0));
    put("modulation", "t_f", format_double(cfg.modulation.t_f));
    put("modulation", "omega_s", format_double(cfg.modulation.Omega_s));
    put("sweep", "omega2_min", format_double(cfg.sweep_min));
    put("sweep", "omega2_max", format_double(cfg.sweep_max));
    put("sweep", "points", std::to_string(cfg.sweep_points));
    put("sweep", "n_levels", std::to_string(cfg.track_levels));
    put("sweep", "coarse_points", std::to_string(cfg.coarse_points));
    {
        std::string sel;
        for (const auto& t : cfg.selector) {
            if (!sel.empty()) sel += "; ";
            sel += std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]);
        }
        put("sweep", "selector", sel);
    }
    if (!cfg.g_values.empty()) {
        std::string gs;
        for (double g : cfg.g_values) {
            if (!gs.empty()) gs += ", ";
            gs += format_double(g);
        }
        put("sweep", "g_values", gs);
    }
    put("perturbation", "sum_cutoff", std::to_string(cfg.sum_cutoff));
    put("perturbation", "omega2_table", format_double(cfg.omega2_table));
    put("dynamics", "t_end", format_double(cfg.t_end));
    put("dynamics", "n_samples", std::to_string(cfg.n_samples));
    put("dynamics", "n_levels", std::to_string(cfg.kept_levels));
    put("dynamics", "rtol", format_double(cfg.rtol));
    put("dynamics", "atol", format_double(cfg.atol));
    put("dynamics", "populations", std::to_string(cfg.n_populations));
    put("dynamics", "track_negativity", cfg.track_negativity ? "true" : "false");
    {
        std::string st;
        for (const auto& t : cfg.initial_states) {
            if (!st.empty()) st += "; ";
            st += std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]);
        }
        put("initial", "states", st);
    }
    if (!cfg.initial_weights.empty()) {
        std::string ws;
        for (double w : cfg.initial_weights) {
            if (!ws.empty()) ws += ", ";
            ws += format_double(w);
        }
        put("initial", "weights", ws);
    }
    if (cfg.protocol == "platform_estimate") {
        put("platform", "g_m", format_double(cfg.g_m));
        put("platform", "g_c", format_double(cfg.g_c));
        put("platform", "detuning", format_double(cfg.detuning));
        put("platform", "enhancement", format_double(cfg.enhancement));
    }
    put("output", "dir", cfg.out_dir);
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    return build_config(parse_kv(text));
}

// Canonical echo: sections and keys in sorted order, every effective value
// written out. Re-parsing the echo reproduces the config exactly.
inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    if (cfg.effective.count(""))
        for (const auto& [k, v] : cfg.effective.at("")) out += k + " = " + v + "\n";
    for (const auto& [sec, keys] : cfg.effective) {
        if (sec.empty()) continue;
        out += "\n[" + sec + "]\n";
        for (const auto& [k, v] : keys) out += k + " = " + v + "\n";
    }
    return out;
}

inline std::string config_hash(const std::string& serialized) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : serialized) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 12);
}

} // namespace omdce
