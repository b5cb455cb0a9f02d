#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "frontlab/birth.hpp"
#include "frontlab/numerics.hpp"

namespace frontlab {

/// Flat `key = value` configuration with [section] headers. Keys are stored as
/// "section.key"; '#' and ';' start comments. The full grammar is documented
/// in docs/config_format.md.
struct ConfigFile {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    std::string get_string(const std::string& key, std::optional<std::string> fallback = {}) const {
        auto it = values.find(key);
        if (it != values.end()) return it->second;
        if (fallback) return *fallback;
        throw std::runtime_error("config: missing key '" + key + "'");
    }

    double get_double(const std::string& key, std::optional<double> fallback = {}) const {
        auto it = values.find(key);
        if (it == values.end()) {
            if (fallback) return *fallback;
            throw std::runtime_error("config: missing key '" + key + "'");
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
        }
    }

    int get_int(const std::string& key, std::optional<int> fallback = {}) const {
        if (!has(key) && fallback) return *fallback;
        const double v = get_double(key);
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw std::runtime_error("config: key '" + key + "' is not an integer");
        return i;
    }

    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(get_string(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.find_first_not_of(" \t") == std::string::npos) continue;
            out.push_back(std::stod(item));
        }
        if (out.empty()) throw std::runtime_error("config: empty list for key '" + key + "'");
        return out;
    }
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}
}  // namespace detail

inline ConfigFile parse_config_text(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config: unterminated section at line " +
                                         std::to_string(lineno));
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected 'key = value' at line " +
                                     std::to_string(lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
        cfg.values[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
}

inline ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Resolved run configuration shared by the CLI subcommands.
struct RunConfig {
    BirthFunction g;
    std::string model_kind;
    double h = 1.0;
    double c = 0.0;    // exactly one of c/eps is configured; both stored resolved
    double eps = 0.0;
    bool has_speed = false;
    double t_min = 0.0, t_max = 0.0, dt = 0.0;  // 0 -> solver defaults
    double tol = 1e-9;
    int max_iter = 2000;
    double damping = 0.7;
    int grid_density = 2000;
    bool force = false;
    // pde section
    double pde_L = 400.0, pde_dx = 0.1, pde_T = 5.0, pde_snap_every = 0.25, pde_x_offset = 140.0;
    // sweep section
    std::vector<double> sweep_c;
};

inline RunConfig resolve_run_config(const ConfigFile& cfg) {
    RunConfig rc;
    rc.model_kind = cfg.get_string("model.kind");
    if (rc.model_kind == "nicholson") {
        rc.g = make_nicholson(cfg.get_double("model.p"));
    } else if (rc.model_kind == "mackey_glass") {
        rc.g = make_mackey_glass(cfg.get_double("model.p"), cfg.get_double("model.n"));
    } else if (rc.model_kind == "tent") {
        rc.g = make_tent(cfg.get_double("model.p"), cfg.get_double("model.q"),
                         cfg.get_double("model.theta"));
    } else if (rc.model_kind == "table") {
        const std::string path = cfg.get_string("model.table");
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open table " + path);
        std::vector<double> xs, gs;
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw std::runtime_error("config: malformed table row");
            xs.push_back(std::stod(line.substr(0, comma)));
            gs.push_back(std::stod(line.substr(comma + 1)));
        }
        rc.g = make_table(std::move(xs), std::move(gs));
    } else {
        throw std::runtime_error("config: unknown model.kind '" + rc.model_kind + "'");
    }

    rc.h = cfg.get_double("run.h");
    require(rc.h > 0, "config: run.h must be positive");
    const bool has_c = cfg.has("run.c"), has_eps = cfg.has("run.eps");
    if (has_c && has_eps) throw std::runtime_error("config: run.c and run.eps are mutually exclusive");
    if (has_c) {
        rc.c = cfg.get_double("run.c");
        require(rc.c > 0, "config: run.c must be positive");
        rc.eps = 1.0 / rc.c;
        rc.has_speed = true;
    } else if (has_eps) {
        rc.eps = cfg.get_double("run.eps");
        require(rc.eps >= 0, "config: run.eps must be nonnegative");
        rc.c = rc.eps > 0 ? 1.0 / rc.eps : 0.0;
        rc.has_speed = true;
    }

    rc.t_min = cfg.get_double("grid.t_min", 0.0);
    rc.t_max = cfg.get_double("grid.t_max", 0.0);
    rc.dt = cfg.get_double("grid.dt", 0.0);
    rc.tol = cfg.get_double("solver.tol", 1e-9);
    rc.max_iter = cfg.get_int("solver.max_iter", 2000);
    rc.damping = cfg.get_double("solver.damping", 0.7);
    rc.grid_density = cfg.get_int("solver.grid_density", 2000);
    rc.force = cfg.get_int("solver.force", 0) != 0;
    require(rc.tol > 0 && rc.damping > 0 && rc.damping <= 1.0,
            "config: tolerances and damping must be positive");

    rc.pde_L = cfg.get_double("pde.L", 400.0);
    rc.pde_dx = cfg.get_double("pde.dx", 0.1);
    rc.pde_T = cfg.get_double("pde.T", 5.0);
    rc.pde_snap_every = cfg.get_double("pde.snap_every", 0.25);
    rc.pde_x_offset = cfg.get_double("pde.x_offset", 140.0);
    if (cfg.has("sweep.c_list")) rc.sweep_c = cfg.get_double_list("sweep.c_list");
    return rc;
}

}  // namespace frontlab
