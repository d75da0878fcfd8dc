#pragma once

#include "lrq/drive.hpp"
#include "lrq/errors.hpp"
#include "lrq/fiber.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lrq {

// Scenario configuration: flat, line-oriented `key = value` text with dotted
// section keys. Parsing is strict -- unknown keys are rejected with their
// line number, so config typos fail loudly instead of silently defaulting.

struct ConfigEntry {
    std::string value;
    int line = 0;
};

struct RawConfig {
    std::map<std::string, ConfigEntry> entries;
    std::string source_name;

    void set(const std::string& key, const std::string& value) { entries[key] = {value, 0}; }
};

inline RawConfig parse_config_text(std::string_view text, std::string source_name = "<config>") {
    RawConfig cfg;
    cfg.source_name = std::move(source_name);
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw config_error(cfg.source_name + ":" + std::to_string(line_no) +
                               ": expected 'key = value', got '" + std::string(line) + "'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty())
            throw config_error(cfg.source_name + ":" + std::to_string(line_no) + ": empty key");
        if (cfg.entries.count(key))
            throw config_error(cfg.source_name + ":" + std::to_string(line_no) +
                               ": duplicate key '" + key + "'");
        cfg.entries[key] = {value, line_no};
    }
    return cfg;
}

inline RawConfig parse_config_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw config_error("cannot open config file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), file.string());
}

/// Typed accessor over a RawConfig that tracks which keys were consumed;
/// finish() rejects anything left over.
class ConfigView {
public:
    explicit ConfigView(const RawConfig& raw) : raw_(&raw) {}

    bool has(const std::string& key) const { return raw_->entries.count(key) > 0; }

    std::string get_string(const std::string& key) {
        const auto it = raw_->entries.find(key);
        if (it == raw_->entries.end()) throw missing(key);
        consumed_.insert(key);
        return it->second.value;
    }
    std::string get_string(const std::string& key, const std::string& fallback) {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) { return to_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) {
        return has(key) ? get_double(key) : fallback;
    }

    int get_int(const std::string& key) {
        const std::string v = get_string(key);
        int out = 0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || p != v.data() + v.size()) throw bad_value(key, v, "an integer");
        return out;
    }
    int get_int(const std::string& key, int fallback) {
        return has(key) ? get_int(key) : fallback;
    }

    bool get_bool(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const std::string v = get_string(key);
        if (v == "true") return true;
        if (v == "false") return false;
        throw bad_value(key, v, "true or false");
    }

    ScalarDrive get_drive(const std::string& key) {
        const std::string v = get_string(key);
        try {
            return ScalarDrive::parse(v);
        } catch (const config_error& e) {
            throw config_error(location(key) + ": " + e.what());
        }
    }
    ScalarDrive get_drive(const std::string& key, const ScalarDrive& fallback) {
        return has(key) ? get_drive(key) : fallback;
    }

    /// Reject every key that was never consumed, naming lines.
    void finish() const {
        std::string complaints;
        for (const auto& [key, entry] : raw_->entries) {
            if (consumed_.count(key)) continue;
            if (!complaints.empty()) complaints += "; ";
            complaints += "unknown key '" + key + "' (line " + std::to_string(entry.line) + ")";
        }
        if (!complaints.empty()) throw config_error(raw_->source_name + ": " + complaints);
    }

private:
    config_error missing(const std::string& key) const {
        return config_error(raw_->source_name + ": missing required key '" + key + "'");
    }
    config_error bad_value(const std::string& key, const std::string& v,
                           const std::string& wanted) const {
        return config_error(location(key) + ": expected " + wanted + ", got '" + v + "'");
    }
    std::string location(const std::string& key) const {
        const auto it = raw_->entries.find(key);
        const int line = it == raw_->entries.end() ? 0 : it->second.line;
        return raw_->source_name + ":" + std::to_string(line) + ": key '" + key + "'";
    }
    double to_double(const std::string& key, const std::string& v) const {
        double out = 0.0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || p != v.data() + v.size()) throw bad_value(key, v, "a number");
        if (!std::isfinite(out)) throw bad_value(key, v, "a finite number");
        return out;
    }

    const RawConfig* raw_;
    std::set<std::string> consumed_;
};

enum class ModelKind { jc, spin, fiber };

struct GridSpec {
    double t_final = 1.0;
    int n_steps = 1000;
};

struct ToleranceSet {
    double residual = 1e-6;
    double fidelity = 1e-6;
    double phase = 1e-5;
    double helicity = 1e-8;
    double momentum = 1e-6;
    double dynamical = 1e-7;
};

struct OutputOptions {
    std::string directory; // may be empty; CLI/env provide fallbacks
    bool trajectory = true;
    bool phases = true;
    bool oracle = true;
};

struct JcScenario {
    int m = 0;
    int k = 1;
    DriveParams drive;
    bool lambda0_auto = true;
    double lambda0 = 0.0;
    double gamma0 = 0.0;
    int oracle_steps = 100000;
};

struct SpinScenario {
    int two_j = 1;
    SpinDrive drive;
    double lambda0 = 1.0;
    double gamma0 = 0.0;
    int oracle_steps = 20000;
};

enum class FiberPathKind { helix, ramped_helix, angles, table };

struct FiberScenario {
    FiberPathKind path_kind = FiberPathKind::helix;
    HelixSpec helix;
    double ramp_fraction = 0.25;
    ScalarDrive lambda_fn; // angles paths
    ScalarDrive gamma_fn;
    std::string table_file; // table paths: CSV t,lambda,gamma
    int oracle_steps = 20000;
};

struct ScenarioConfig {
    ModelKind model = ModelKind::jc;
    GridSpec grid;
    ToleranceSet tol;
    OutputOptions out;
    std::variant<JcScenario, SpinScenario, FiberScenario> body;

    const JcScenario& jc() const { return std::get<JcScenario>(body); }
    const SpinScenario& spin() const { return std::get<SpinScenario>(body); }
    const FiberScenario& fiber() const { return std::get<FiberScenario>(body); }
};

namespace detail {

inline void load_common(ConfigView& v, ScenarioConfig& cfg) {
    cfg.grid.t_final = v.get_double("grid.t_final");
    cfg.grid.n_steps = v.get_int("grid.n_steps");
    if (!(cfg.grid.t_final > 0.0))
        throw config_error("grid.t_final must be positive");
    if (cfg.grid.n_steps < 100)
        throw config_error("grid.n_steps must be >= 100 (got " +
                           std::to_string(cfg.grid.n_steps) + ")");
    cfg.tol.residual = v.get_double("tol.residual", cfg.tol.residual);
    cfg.tol.fidelity = v.get_double("tol.fidelity", cfg.tol.fidelity);
    cfg.tol.phase = v.get_double("tol.phase", cfg.tol.phase);
    cfg.tol.helicity = v.get_double("tol.helicity", cfg.tol.helicity);
    cfg.tol.momentum = v.get_double("tol.momentum", cfg.tol.momentum);
    cfg.tol.dynamical = v.get_double("tol.dynamical", cfg.tol.dynamical);
    cfg.out.directory = v.get_string("output.dir", "");
    cfg.out.trajectory = v.get_bool("output.trajectory", true);
    cfg.out.phases = v.get_bool("output.phases", true);
    cfg.out.oracle = v.get_bool("output.oracle", true);
}

inline int load_oracle_steps(ConfigView& v, int fallback, const GridSpec& grid) {
    const int steps = v.get_int("oracle.n_steps", fallback);
    if (steps < 1000) throw config_error("oracle.n_steps must be >= 1000");
    if (steps % grid.n_steps != 0)
        throw config_error("oracle.n_steps must be a multiple of grid.n_steps");
    return steps;
}

} // namespace detail

/// Build a validated scenario from raw key/value entries. Throws
/// config_error on unknown keys, missing keys or out-of-range values.
inline ScenarioConfig load_scenario(const RawConfig& raw) {
    ConfigView v(raw);
    ScenarioConfig cfg;

    const std::string model = v.get_string("model");
    if (model == "jc")
        cfg.model = ModelKind::jc;
    else if (model == "spin")
        cfg.model = ModelKind::spin;
    else if (model == "fiber")
        cfg.model = ModelKind::fiber;
    else
        throw config_error(raw.source_name + ": model must be jc, spin or fiber, got '" + model +
                           "'");

    detail::load_common(v, cfg);

    if (cfg.model == ModelKind::jc) {
        JcScenario s;
        s.m = v.get_int("rep.m");
        s.k = v.get_int("rep.k");
        s.drive.omega = v.get_drive("drive.omega");
        s.drive.omega0 = v.get_drive("drive.omega0");
        s.drive.g_re = v.get_drive("drive.g_re", ScalarDrive::constant(0.0));
        s.drive.g_im = v.get_drive("drive.g_im", ScalarDrive::constant(0.0));
        const std::string l0 = v.get_string("init.lambda0", "auto");
        if (l0 == "auto") {
            s.lambda0_auto = true;
        } else {
            s.lambda0_auto = false;
            double out = 0.0;
            const auto [p, ec] = std::from_chars(l0.data(), l0.data() + l0.size(), out);
            if (ec != std::errc{} || p != l0.data() + l0.size())
                throw config_error("init.lambda0 must be a number or 'auto'");
            s.lambda0 = out;
        }
        s.gamma0 = v.get_double("init.gamma0", 0.0);
        s.oracle_steps = detail::load_oracle_steps(v, 10 * cfg.grid.n_steps, cfg.grid);
        if (!s.drive.finite_on(0.0, cfg.grid.t_final))
            throw config_error("drive functions must be finite on [0, t_final]");
        cfg.body = std::move(s);
    } else if (cfg.model == ModelKind::spin) {
        SpinScenario s;
        s.two_j = v.get_int("rep.two_j");
        s.drive.c0 = v.get_drive("drive.c0");
        s.drive.theta = v.get_drive("drive.theta");
        s.drive.phi = v.get_drive("drive.phi");
        s.lambda0 = v.get_double("init.lambda0");
        s.gamma0 = v.get_double("init.gamma0", 0.0);
        s.oracle_steps = detail::load_oracle_steps(v, 2 * cfg.grid.n_steps, cfg.grid);
        if (!s.drive.finite_on(0.0, cfg.grid.t_final))
            throw config_error("drive functions must be finite on [0, t_final]");
        cfg.body = std::move(s);
    } else {
        FiberScenario s;
        const std::string kind = v.get_string("path.type", "helix");
        if (kind == "helix" || kind == "ramped_helix") {
            s.path_kind = kind == "helix" ? FiberPathKind::helix : FiberPathKind::ramped_helix;
            if (v.has("helix.pitch_angle")) {
                const double angle = v.get_double("helix.pitch_angle");
                if (!(angle > 0.0 && angle < 0.5 * std::numbers::pi))
                    throw config_error("helix.pitch_angle must lie in (0, pi/2)");
                s.helix.pitch = 2.0 * std::numbers::pi;
                s.helix.radius = std::tan(angle);
            } else {
                s.helix.radius = v.get_double("helix.radius");
                s.helix.pitch = v.get_double("helix.pitch");
                if (!(s.helix.radius > 0.0) || !(s.helix.pitch > 0.0))
                    throw config_error("helix.radius and helix.pitch must be positive");
            }
            s.helix.n_turns = v.get_double("helix.turns", 1.0);
            if (!(s.helix.n_turns > 0.0)) throw config_error("helix.turns must be positive");
            if (s.path_kind == FiberPathKind::ramped_helix) {
                s.ramp_fraction = v.get_double("path.ramp_fraction", 0.25);
                if (!(s.ramp_fraction > 0.0 && s.ramp_fraction < 1.0))
                    throw config_error("path.ramp_fraction must lie in (0, 1)");
            }
        } else if (kind == "angles") {
            s.path_kind = FiberPathKind::angles;
            s.lambda_fn = v.get_drive("path.lambda");
            s.gamma_fn = v.get_drive("path.gamma");
            if (!s.lambda_fn.finite_on(0.0, cfg.grid.t_final) ||
                !s.gamma_fn.finite_on(0.0, cfg.grid.t_final))
                throw config_error("path angle functions must be finite on [0, t_final]");
        } else if (kind == "table") {
            s.path_kind = FiberPathKind::table;
            s.table_file = v.get_string("path.file");
        } else {
            throw config_error("path.type must be helix, ramped_helix, angles or table");
        }
        s.oracle_steps = detail::load_oracle_steps(v, 2 * cfg.grid.n_steps, cfg.grid);
        cfg.body = std::move(s);
    }

    v.finish();
    return cfg;
}

inline ScenarioConfig load_scenario_file(const std::filesystem::path& file) {
    return load_scenario(parse_config_file(file));
}

} // namespace lrq
