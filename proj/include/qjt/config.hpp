#pragma once

// Flat `key = value` scenario configuration.
//
// UTF-8 text, one assignment per line, `#` starts a comment. Unknown keys are
// rejected by name. The same keys are accepted from --set overrides.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qjt/experiment.hpp"

namespace qjt {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& documented_config_keys() {
    static const std::vector<std::string> keys = {
        "scenario.name",  "drive.kind",         "drive.omega1_0",
        "drive.epsilon",  "drive.g",            "drive.gamma_minus_tf",
        "drive.pulse_cycles",
        "bath.beta_omega1", "bath.gamma0",      "bath.gamma_minus",
        "sim.dt_rule",    "sim.n_traj",         "sim.eta",
        "sim.seed",       "sim.n_fictitious",   "sweep.param",
        "sweep.grid",
    };
    return keys;
}

class ConfigMap {
  public:
    void set(const std::string& key, const std::string& value) {
        bool known = false;
        for (const auto& k : documented_config_keys())
            if (k == key) { known = true; break; }
        if (!known) throw ConfigError("unknown config key: " + key);
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not a number: '" +
                              it->second + "'");
        }
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not an integer: '" +
                              it->second + "'");
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not an unsigned integer: '" +
                              it->second + "'");
        }
    }

    std::vector<double> get_grid(const std::string& key) const {
        auto it = values_.find(key);
        std::vector<double> grid;
        if (it == values_.end()) return grid;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                grid.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("config key " + key + ": bad grid entry '" + item +
                                  "'");
            }
        }
        if (grid.empty()) throw ConfigError("config key " + key + ": empty grid");
        return grid;
    }

    const std::map<std::string, std::string>& raw() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
} // namespace detail

inline void parse_config_line(ConfigMap& cfg, const std::string& raw_line) {
    std::string line = raw_line;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
        throw ConfigError("config line is not 'key = value': " + detail::trim(raw_line));
    cfg.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
}

inline ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ConfigMap cfg;
    std::string line;
    while (std::getline(in, line)) parse_config_line(cfg, line);
    return cfg;
}

inline DriveKind parse_drive_kind(const std::string& s) {
    if (s == "landauer") return DriveKind::LandauerRamp;
    if (s == "rabi") return DriveKind::RabiResonant;
    if (s == "rabi_lab") return DriveKind::RabiResonantLab;
    if (s == "none") return DriveKind::None;
    throw ConfigError("drive.kind must be landauer, rabi, rabi_lab or none (got '" +
                      s + "')");
}

inline std::string drive_kind_name(DriveKind k) {
    switch (k) {
    case DriveKind::LandauerRamp: return "landauer";
    case DriveKind::RabiResonant: return "rabi";
    case DriveKind::RabiResonantLab: return "rabi_lab";
    default: return "none";
    }
}

/// Builds a Scenario from config values layered over `base` (a preset or the
/// defaults). bath.gamma0 and bath.gamma_minus are alternative ways to pin the
/// bath scale; giving both is an error.
inline Scenario scenario_from_config(const ConfigMap& cfg, Scenario base = {}) {
    Scenario s = base;
    s.name = cfg.get_string("scenario.name", s.name);
    if (cfg.has("drive.kind"))
        s.kind = parse_drive_kind(cfg.get_string("drive.kind", ""));
    s.omega1_0 = cfg.get_double("drive.omega1_0", s.omega1_0);
    s.beta_omega1 = cfg.get_double("bath.beta_omega1", s.beta_omega1);
    if (cfg.has("bath.gamma0") && cfg.has("bath.gamma_minus"))
        throw ConfigError("give bath.gamma0 or bath.gamma_minus, not both");
    if (cfg.has("bath.gamma0")) {
        const double g0 = cfg.get_double("bath.gamma0", 0.0);
        if (!(g0 > 0.0)) throw ConfigError("bath.gamma0 must be > 0");
        if (!(s.beta_omega1 > 0.0))
            throw ConfigError("bath.beta_omega1 must be > 0");
        const double nb = 1.0 / std::expm1(s.beta_omega1);
        s.gamma_minus = g0 * (nb + 1.0);
    } else {
        s.gamma_minus = cfg.get_double("bath.gamma_minus", s.gamma_minus);
    }
    s.gamma_minus_tf = cfg.get_double("drive.gamma_minus_tf", s.gamma_minus_tf);
    s.pulse_cycles = cfg.get_double("drive.pulse_cycles", s.pulse_cycles);
    s.epsilon_ratio = cfg.get_double("drive.epsilon", s.epsilon_ratio);
    s.g_ratio = cfg.get_double("drive.g", s.g_ratio);
    s.eta = cfg.get_double("sim.eta", s.eta);
    s.dt_budget = cfg.get_double("sim.dt_rule", s.dt_budget);
    s.n_traj = cfg.get_int("sim.n_traj", s.n_traj);
    s.n_fictitious = cfg.get_int("sim.n_fictitious", s.n_fictitious);
    s.seed = cfg.get_u64("sim.seed", s.seed);
    if (cfg.has("sweep.param") || cfg.has("sweep.grid")) {
        Sweep sw = s.sweep.value_or(Sweep{});
        if (cfg.has("sweep.param")) sw.param = cfg.get_string("sweep.param", "");
        if (cfg.has("sweep.grid")) sw.grid = cfg.get_grid("sweep.grid");
        if (sw.param.empty() || sw.grid.empty())
            throw ConfigError("sweep.param and sweep.grid must be given together");
        s.sweep = sw;
    }
    try {
        validate(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

} // namespace qjt
