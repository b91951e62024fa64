#pragma once

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "polaron/adiabatic.hpp"

namespace polaron {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Command { run, sweep, pekar, fock, check };

inline Command command_from_string(const std::string& s) {
    if (s == "run") return Command::run;
    if (s == "sweep") return Command::sweep;
    if (s == "pekar") return Command::pekar;
    if (s == "fock") return Command::fock;
    if (s == "check") return Command::check;
    throw ConfigError("unknown command: " + s);
}

struct FockConfig {
    int sites = 6;
    double spacing = 0.3;
    int n_max = 4;
    std::vector<double> alphas{2, 3, 4};
    double t = 0.5;
    double dt = 1e-3;
    double phi_amplitude = 0.03;
    double phi_phase = 0.4;
    double phi_decay = 1.0;  // amplitude profile exp(-decay |k|)
};

struct RunConfig {
    Command command = Command::run;
    int dims = 3;
    int n = 32;
    double box = 16.0;
    std::vector<double> alphas{8.0};
    double dt = 1e-3;
    double t_final = 1.0;
    Phi0Spec phi0;
    double eig_tol = 1e-9;
    double lin_tol = 1e-9;
    double leak_tol = 1e-8;
    std::string output_dir = "out";
    int frame_cadence = 100;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    // sweep extras
    double t_star = 1.0;
    double short_t0 = 0.05, short_t1 = 0.5;
    double floor_factor = 100.0;
    double gap_floor = 1e-6;
    double window_safety = 0.5;

    double pekar_tol = 1e-9;
    int check_samples = 100;
    FockConfig fock;

    std::vector<std::string> warnings;
    json raw;  // canonical parsed document (for hashing)
};

namespace cfg_detail {

inline void require_keys_known(const json& obj, const std::vector<std::string>& known,
                               const std::string& where, std::vector<std::string>& errors) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            errors.push_back("unknown key '" + where + it.key() + "'");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T def) {
    if (obj.contains(key)) return obj.at(key).get<T>();
    return def;
}

}  // namespace cfg_detail

/// Parse and validate a JSON config. Unknown keys are rejected, all
/// validation failures are collected and reported together.
inline RunConfig parse_config_json(const json& doc) {
    std::vector<std::string> errors;
    RunConfig cfg;
    cfg.raw = doc;
    using cfg_detail::get_or;
    using cfg_detail::require_keys_known;

    require_keys_known(doc,
                       {"command", "grid", "alpha", "alphas", "dt", "t_final", "phi0_spec",
                        "tolerances", "output_dir", "frame_cadence", "seed", "threads",
                        "sweep", "pekar", "fock", "check"},
                       "", errors);
    try {
        if (doc.contains("command"))
            cfg.command = command_from_string(doc.at("command").get<std::string>());

        if (doc.contains("grid")) {
            const auto& g = doc.at("grid");
            require_keys_known(g, {"dims", "n", "box"}, "grid.", errors);
            cfg.dims = get_or(g, "dims", cfg.dims);
            cfg.n = get_or(g, "n", cfg.n);
            cfg.box = get_or(g, "box", cfg.box);
            if (cfg.dims != 1 && cfg.dims != 3) errors.push_back("grid.dims must be 1 or 3");
            if (cfg.n < 2 || cfg.n % 2 != 0) errors.push_back("grid.n must be even and >= 2");
            if (!(cfg.box > 0)) errors.push_back("grid.box must be positive");
        }

        if (doc.contains("alpha") && doc.contains("alphas"))
            errors.push_back("give either 'alpha' or 'alphas', not both");
        if (doc.contains("alpha")) cfg.alphas = {doc.at("alpha").get<double>()};
        if (doc.contains("alphas")) cfg.alphas = doc.at("alphas").get<std::vector<double>>();
        if (cfg.alphas.empty()) errors.push_back("alphas must not be empty");
        for (double a : cfg.alphas)
            if (!(a > 0)) errors.push_back("alpha values must be positive");
        if (!std::is_sorted(cfg.alphas.begin(), cfg.alphas.end())) {
            std::sort(cfg.alphas.begin(), cfg.alphas.end());
            cfg.warnings.push_back("alphas were not sorted ascending; sorted automatically");
        }

        cfg.dt = get_or(doc, "dt", cfg.dt);
        if (!(cfg.dt > 0)) errors.push_back("dt must be positive");
        cfg.t_final = get_or(doc, "t_final", cfg.t_final);
        if (!(cfg.t_final > 0)) errors.push_back("t_final must be positive");

        if (doc.contains("phi0_spec")) {
            const auto& p = doc.at("phi0_spec");
            require_keys_known(
                p, {"kind", "epsilon", "phase", "amplitude", "width", "strength"}, "phi0_spec.",
                errors);
            std::string kind = get_or<std::string>(p, "kind", "pekar_perturbed");
            if (kind == "gaussian") cfg.phi0.kind = Phi0Spec::Kind::gaussian;
            else if (kind == "coulomb_truncated") cfg.phi0.kind = Phi0Spec::Kind::coulomb_truncated;
            else if (kind == "pekar") cfg.phi0.kind = Phi0Spec::Kind::pekar;
            else if (kind == "pekar_perturbed") cfg.phi0.kind = Phi0Spec::Kind::pekar_perturbed;
            else errors.push_back("phi0_spec.kind must be one of gaussian, coulomb_truncated, pekar, pekar_perturbed");
            cfg.phi0.epsilon = get_or(p, "epsilon", cfg.phi0.epsilon);
            cfg.phi0.phase = get_or(p, "phase", cfg.phi0.phase);
            cfg.phi0.amplitude = get_or(p, "amplitude", cfg.phi0.amplitude);
            cfg.phi0.width = get_or(p, "width", cfg.phi0.width);
            cfg.phi0.strength = get_or(p, "strength", cfg.phi0.strength);
        }

        if (doc.contains("tolerances")) {
            const auto& t = doc.at("tolerances");
            require_keys_known(t, {"eig_tol", "lin_tol", "leak_tol"}, "tolerances.", errors);
            cfg.eig_tol = get_or(t, "eig_tol", cfg.eig_tol);
            cfg.lin_tol = get_or(t, "lin_tol", cfg.lin_tol);
            cfg.leak_tol = get_or(t, "leak_tol", cfg.leak_tol);
            if (!(cfg.eig_tol > 0)) errors.push_back("tolerances.eig_tol must be positive");
            if (!(cfg.lin_tol > 0)) errors.push_back("tolerances.lin_tol must be positive");
            if (!(cfg.leak_tol > 0)) errors.push_back("tolerances.leak_tol must be positive");
        }

        cfg.output_dir = get_or<std::string>(doc, "output_dir", cfg.output_dir);
        cfg.frame_cadence = get_or(doc, "frame_cadence", cfg.frame_cadence);
        if (cfg.frame_cadence < 1) errors.push_back("frame_cadence must be >= 1");
        cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);
        cfg.threads = get_or<unsigned>(doc, "threads", cfg.threads);

        if (doc.contains("sweep")) {
            const auto& s = doc.at("sweep");
            require_keys_known(
                s, {"t_star", "short_window", "floor_factor", "gap_floor", "window_safety"},
                "sweep.", errors);
            cfg.t_star = get_or(s, "t_star", cfg.t_star);
            if (s.contains("short_window")) {
                auto w = s.at("short_window").get<std::vector<double>>();
                if (w.size() != 2 || !(w[0] < w[1]))
                    errors.push_back("sweep.short_window must be [t0, t1] with t0 < t1");
                else {
                    cfg.short_t0 = w[0];
                    cfg.short_t1 = w[1];
                }
            }
            cfg.floor_factor = get_or(s, "floor_factor", cfg.floor_factor);
            cfg.gap_floor = get_or(s, "gap_floor", cfg.gap_floor);
            cfg.window_safety = get_or(s, "window_safety", cfg.window_safety);
        }
        if (doc.contains("pekar")) {
            const auto& p = doc.at("pekar");
            require_keys_known(p, {"tol"}, "pekar.", errors);
            cfg.pekar_tol = get_or(p, "tol", cfg.pekar_tol);
            if (!(cfg.pekar_tol > 0)) errors.push_back("pekar.tol must be positive");
        }
        if (doc.contains("check")) {
            const auto& c = doc.at("check");
            require_keys_known(c, {"samples"}, "check.", errors);
            cfg.check_samples = get_or(c, "samples", cfg.check_samples);
            if (cfg.check_samples < 1) errors.push_back("check.samples must be >= 1");
        }
        if (doc.contains("fock")) {
            const auto& f = doc.at("fock");
            require_keys_known(f,
                               {"sites", "spacing", "n_max", "alphas", "t", "dt",
                                "phi_amplitude", "phi_phase", "phi_decay"},
                               "fock.", errors);
            cfg.fock.sites = get_or(f, "sites", cfg.fock.sites);
            cfg.fock.spacing = get_or(f, "spacing", cfg.fock.spacing);
            cfg.fock.n_max = get_or(f, "n_max", cfg.fock.n_max);
            if (f.contains("alphas")) cfg.fock.alphas = f.at("alphas").get<std::vector<double>>();
            cfg.fock.t = get_or(f, "t", cfg.fock.t);
            cfg.fock.dt = get_or(f, "dt", cfg.fock.dt);
            cfg.fock.phi_amplitude = get_or(f, "phi_amplitude", cfg.fock.phi_amplitude);
            cfg.fock.phi_phase = get_or(f, "phi_phase", cfg.fock.phi_phase);
            cfg.fock.phi_decay = get_or(f, "phi_decay", cfg.fock.phi_decay);
            if (cfg.fock.sites < 2 || cfg.fock.sites % 2 != 0)
                errors.push_back("fock.sites must be even and >= 2");
            if (!(cfg.fock.spacing > 0)) errors.push_back("fock.spacing must be positive");
            if (cfg.fock.n_max < 1) errors.push_back("fock.n_max must be >= 1");
        }
    } catch (const json::exception& e) {
        errors.push_back(std::string("malformed value: ") + e.what());
    }

    if (!errors.empty()) {
        std::string msg = "config validation failed:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config_json(doc);
}

/// FNV-1a over the canonical (sorted-key) serialization.
inline std::uint64_t config_hash(const RunConfig& cfg) {
    std::string s = cfg.raw.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace polaron
