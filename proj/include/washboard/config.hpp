#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "washboard/experiments.hpp"
#include "washboard/grid.hpp"
#include "washboard/lattice.hpp"
#include "washboard/propagate.hpp"
#include "washboard/stationary.hpp"

namespace washboard {

namespace detail {

// %.17g: enough digits to round-trip any double, few enough to stay canonical.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double to_double(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw std::invalid_argument("empty value, expected a number");
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("'" + t + "' is not a number");
    }
    if (pos != t.size()) throw std::invalid_argument("'" + t + "' is not a number");
    return v;
}

inline long to_long(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw std::invalid_argument("empty value, expected an integer");
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(t, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("'" + t + "' is not an integer");
    }
    if (pos != t.size()) throw std::invalid_argument("'" + t + "' is not an integer");
    return v;
}

inline bool to_bool(const std::string& s) {
    std::string t = trim(s);
    for (auto& c : t) c = char(std::tolower(static_cast<unsigned char>(c)));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw std::invalid_argument("'" + s + "' is not a boolean (use true/false)");
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::vector<double> to_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& p : split_list(s)) out.push_back(to_double(p));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

inline std::vector<int> to_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& p : split_list(s)) out.push_back(int(to_long(p)));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

inline std::string join17(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt17(v[i]);
    }
    return s;
}

inline std::string join_int(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

}

// Weighted depth list: one "r weight" (or "r,weight") pair per line, `#`
// comments allowed; weights are renormalized to sum 1.
inline DepthDistribution load_depth_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open depth file: " + path);
    std::vector<DepthWeight> entries;
    std::string line;
    int line_no = 0;
    double sum = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        for (auto& c : t)
            if (c == ',') c = ' ';
        std::istringstream row(t);
        double r = 0, w = 0;
        if (!(row >> r >> w))
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'r weight', got '" + t + "'");
        std::string rest;
        if (row >> rest)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": trailing content '" + rest + "'");
        entries.push_back({r, w});
        sum += w;
    }
    if (entries.empty()) throw std::runtime_error(path + ": no depth entries");
    if (!(sum > 0)) throw std::runtime_error(path + ": weights sum to zero");
    for (auto& e : entries) e.weight /= sum;
    return DepthDistribution(std::move(entries));
}

// Every field has a working default (the reference operating point), so the
// empty config is valid; files override selectively.
struct RunConfig {
    double lattice_r = 19.0;
    double lattice_s = 2.86;
    double lattice_omega_r_hz = 685.0;
    double lattice_a_m = 0.930e-6;
    double lattice_mass_kg = 1.40999e-25;

    double drive_omega_hz = 4990.0;
    double drive_a_pm_rad = degrees_to_radians(8.0);
    double drive_a_am = 0.10;
    int drive_n = 4;
    double drive_delta_tau_s = 0.0;

    double prop_dt_s = 0.0;  // 0 = drive period / 256
    double prop_absorber_width = 0.1;
    double prop_absorber_strength = 12.0;
    int prop_record_stride = 0;

    int grid_n_wells = 17;
    int grid_points_per_well = 64;

    double solver_loc_threshold = 0.85;
    double solver_e_max = 0.0;

    bool depth_average = false;
    double depth_mean = 19.0;
    double depth_rel_sigma = 0.15;
    double depth_lo = 14.0;
    double depth_hi = 24.0;
    int depth_nodes = 9;
    std::string depth_file;  // overrides the truncated Gaussian when set

    int scan_tau_points = 16;
    double scan_tau_periods = 1.0;

    std::vector<double> visibility_a_pm_list = {
        degrees_to_radians(2.0), degrees_to_radians(4.0), degrees_to_radians(6.0),
        degrees_to_radians(8.0)};

    std::vector<double> sweep_a_pm_list = {degrees_to_radians(5.0), degrees_to_radians(6.0),
                                           degrees_to_radians(8.0)};
    std::vector<double> sweep_a_am_list;  // empty = 0..a_am_max in a_am_step increments
    double sweep_a_am_max = 0.20;
    double sweep_a_am_step = 0.02;
    std::vector<int> sweep_n_list = {2};
    double sweep_calib_a_am = 0.0;  // 0 = median nonzero a_am

    unsigned run_threads = 1;
    std::string output_dir;  // "" -> $WASHBOARD_OUT -> ./out

    LatticeParams lattice() const {
        return LatticeParams(lattice_r, lattice_s, 2.0 * std::numbers::pi * lattice_omega_r_hz,
                             lattice_a_m, lattice_mass_kg);
    }

    DriveSchedule drive() const {
        return DriveSchedule(drive_a_pm_rad, drive_a_am, 2.0 * std::numbers::pi * drive_omega_hz,
                             drive_n, drive_delta_tau_s);
    }

    PropagationConfig prop() const {
        PropagationConfig cfg;
        cfg.dt = prop_dt_s;
        cfg.absorber_width = prop_absorber_width;
        cfg.absorber_strength = prop_absorber_strength;
        cfg.record_stride = prop_record_stride;
        return cfg;
    }

    GridPtr grid() const { return make_grid(grid_n_wells, grid_points_per_well); }

    SolveOptions solver() const { return SolveOptions{solver_loc_threshold, solver_e_max}; }

    DepthDistribution depth_distribution() const {
        if (!depth_file.empty()) return load_depth_file(depth_file);
        return DepthDistribution::truncated_gaussian(depth_mean, depth_rel_sigma * depth_mean,
                                                     depth_lo, depth_hi, depth_nodes);
    }

    std::vector<double> sweep_a_am_values() const {
        if (!sweep_a_am_list.empty()) return sweep_a_am_list;
        if (!(sweep_a_am_step > 0))
            throw std::invalid_argument("config: sweep.a_am_step must be > 0, got " +
                                        detail::fmt17(sweep_a_am_step));
        if (!(sweep_a_am_max >= 0))
            throw std::invalid_argument("config: sweep.a_am_max must be >= 0");
        std::vector<double> v;
        for (int i = 0;; ++i) {
            const double a = double(i) * sweep_a_am_step;
            if (a > sweep_a_am_max + 1e-12) break;
            v.push_back(a);
        }
        return v;
    }

    std::string resolved_output_dir() const {
        if (!output_dir.empty()) return output_dir;
        if (const char* env = std::getenv("WASHBOARD_OUT"); env && *env) return env;
        return "./out";
    }

    // Constructs every derived object so each type-level invariant is checked
    // before any computation starts.
    void validate() const {
        auto wrap = [](const char* section, auto&& fn) {
            try {
                fn();
            } catch (const std::exception& e) {
                throw std::invalid_argument("config: invalid " + std::string(section) + ": " +
                                            e.what());
            }
        };
        wrap("lattice parameters", [&] { (void)lattice(); });
        wrap("drive parameters", [&] { (void)drive(); });
        wrap("grid parameters", [&] { (void)grid(); });
        wrap("propagation parameters", [&] {
            if (prop_dt_s < 0) throw std::invalid_argument("prop.dt_s must be >= 0");
            if (prop_absorber_width < 0 || prop_absorber_width > 0.2)
                throw std::invalid_argument("prop.absorber_width must lie in [0, 0.2]");
            if (prop_absorber_strength < 0)
                throw std::invalid_argument("prop.absorber_strength must be >= 0");
            if (prop_record_stride < 0)
                throw std::invalid_argument("prop.record_stride must be >= 0");
        });
        wrap("solver parameters", [&] {
            if (!(solver_loc_threshold > 0 && solver_loc_threshold <= 1))
                throw std::invalid_argument("solver.loc_threshold must lie in (0, 1]");
            if (solver_e_max < 0) throw std::invalid_argument("solver.e_max must be >= 0");
        });
        wrap("depth distribution", [&] { (void)depth_distribution(); });
        wrap("scan parameters", [&] {
            if (scan_tau_points < 4)
                throw std::invalid_argument("scan.tau_points must be >= 4");
            if (!(scan_tau_periods >= 1.0))
                throw std::invalid_argument("scan.tau_periods must be >= 1");
        });
        wrap("visibility parameters", [&] {
            if (visibility_a_pm_list.empty())
                throw std::invalid_argument("visibility.a_pm_list must be nonempty");
            for (double a : visibility_a_pm_list)
                if (!(a > 0))
                    throw std::invalid_argument("visibility.a_pm_list entries must be > 0");
        });
        wrap("sweep parameters", [&] {
            if (sweep_a_pm_list.empty())
                throw std::invalid_argument("sweep.a_pm_list must be nonempty");
            if (sweep_n_list.empty()) throw std::invalid_argument("sweep.n_list must be nonempty");
            for (int n : sweep_n_list)
                if (n < 1) throw std::invalid_argument("sweep.n_list entries must be >= 1");
            (void)sweep_a_am_values();
            if (sweep_calib_a_am < 0 || sweep_calib_a_am >= 1)
                throw std::invalid_argument("sweep.calib_a_am must lie in [0, 1)");
        });
        wrap("run parameters", [&] {
            if (run_threads < 1) throw std::invalid_argument("run.threads must be >= 1");
        });
    }

    // Canonical key echo for the manifest; sorted by key via std::map.
    std::map<std::string, std::string> as_key_values() const {
        using detail::fmt17;
        std::map<std::string, std::string> kv;
        kv["lattice.r"] = fmt17(lattice_r);
        kv["lattice.s"] = fmt17(lattice_s);
        kv["lattice.omega_r_hz"] = fmt17(lattice_omega_r_hz);
        kv["lattice.a_m"] = fmt17(lattice_a_m);
        kv["lattice.mass_kg"] = fmt17(lattice_mass_kg);
        kv["drive.omega_hz"] = fmt17(drive_omega_hz);
        kv["drive.a_pm_rad"] = fmt17(drive_a_pm_rad);
        kv["drive.a_am"] = fmt17(drive_a_am);
        kv["drive.n"] = std::to_string(drive_n);
        kv["drive.delta_tau_s"] = fmt17(drive_delta_tau_s);
        kv["prop.dt_s"] = fmt17(prop_dt_s);
        kv["prop.absorber_width"] = fmt17(prop_absorber_width);
        kv["prop.absorber_strength"] = fmt17(prop_absorber_strength);
        kv["prop.record_stride"] = std::to_string(prop_record_stride);
        kv["grid.n_wells"] = std::to_string(grid_n_wells);
        kv["grid.points_per_well"] = std::to_string(grid_points_per_well);
        kv["solver.loc_threshold"] = fmt17(solver_loc_threshold);
        kv["solver.e_max"] = fmt17(solver_e_max);
        kv["depth.average"] = depth_average ? "true" : "false";
        kv["depth.mean"] = fmt17(depth_mean);
        kv["depth.rel_sigma"] = fmt17(depth_rel_sigma);
        kv["depth.lo"] = fmt17(depth_lo);
        kv["depth.hi"] = fmt17(depth_hi);
        kv["depth.nodes"] = std::to_string(depth_nodes);
        kv["depth.file"] = depth_file;
        kv["scan.tau_points"] = std::to_string(scan_tau_points);
        kv["scan.tau_periods"] = fmt17(scan_tau_periods);
        kv["visibility.a_pm_list"] = detail::join17(visibility_a_pm_list);
        kv["sweep.a_pm_list"] = detail::join17(sweep_a_pm_list);
        kv["sweep.a_am_list"] = detail::join17(sweep_a_am_list);
        kv["sweep.a_am_max"] = fmt17(sweep_a_am_max);
        kv["sweep.a_am_step"] = fmt17(sweep_a_am_step);
        kv["sweep.n_list"] = detail::join_int(sweep_n_list);
        kv["sweep.calib_a_am"] = fmt17(sweep_calib_a_am);
        kv["run.threads"] = std::to_string(run_threads);
        kv["output.dir"] = output_dir;
        return kv;
    }
};

namespace detail {

// Returns the canonical key (so drive.a_pm_deg and drive.a_pm_rad collide in
// the duplicate check), or throws on an unknown key.
inline std::string apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "lattice.r") { cfg.lattice_r = to_double(value); return key; }
    if (key == "lattice.s") { cfg.lattice_s = to_double(value); return key; }
    if (key == "lattice.omega_r_hz") { cfg.lattice_omega_r_hz = to_double(value); return key; }
    if (key == "lattice.a_m") { cfg.lattice_a_m = to_double(value); return key; }
    if (key == "lattice.mass_kg") { cfg.lattice_mass_kg = to_double(value); return key; }
    if (key == "drive.omega_hz") { cfg.drive_omega_hz = to_double(value); return key; }
    if (key == "drive.a_pm_rad") { cfg.drive_a_pm_rad = to_double(value); return key; }
    if (key == "drive.a_pm_deg") {
        cfg.drive_a_pm_rad = degrees_to_radians(to_double(value));
        return "drive.a_pm_rad";
    }
    if (key == "drive.a_am") { cfg.drive_a_am = to_double(value); return key; }
    if (key == "drive.n") { cfg.drive_n = int(to_long(value)); return key; }
    if (key == "drive.delta_tau_s") { cfg.drive_delta_tau_s = to_double(value); return key; }
    if (key == "prop.dt_s") { cfg.prop_dt_s = to_double(value); return key; }
    if (key == "prop.absorber_width") { cfg.prop_absorber_width = to_double(value); return key; }
    if (key == "prop.absorber_strength") {
        cfg.prop_absorber_strength = to_double(value);
        return key;
    }
    if (key == "prop.record_stride") { cfg.prop_record_stride = int(to_long(value)); return key; }
    if (key == "grid.n_wells") { cfg.grid_n_wells = int(to_long(value)); return key; }
    if (key == "grid.points_per_well") {
        cfg.grid_points_per_well = int(to_long(value));
        return key;
    }
    if (key == "solver.loc_threshold") { cfg.solver_loc_threshold = to_double(value); return key; }
    if (key == "solver.e_max") { cfg.solver_e_max = to_double(value); return key; }
    if (key == "depth.average") { cfg.depth_average = to_bool(value); return key; }
    if (key == "depth.mean") { cfg.depth_mean = to_double(value); return key; }
    if (key == "depth.rel_sigma") { cfg.depth_rel_sigma = to_double(value); return key; }
    if (key == "depth.lo") { cfg.depth_lo = to_double(value); return key; }
    if (key == "depth.hi") { cfg.depth_hi = to_double(value); return key; }
    if (key == "depth.nodes") { cfg.depth_nodes = int(to_long(value)); return key; }
    if (key == "depth.file") { cfg.depth_file = trim(value); return key; }
    if (key == "scan.tau_points") { cfg.scan_tau_points = int(to_long(value)); return key; }
    if (key == "scan.tau_periods") { cfg.scan_tau_periods = to_double(value); return key; }
    if (key == "visibility.a_pm_list") {
        cfg.visibility_a_pm_list = to_double_list(value);
        return key;
    }
    if (key == "sweep.a_pm_list") { cfg.sweep_a_pm_list = to_double_list(value); return key; }
    if (key == "sweep.a_am_list") { cfg.sweep_a_am_list = to_double_list(value); return key; }
    if (key == "sweep.a_am_max") { cfg.sweep_a_am_max = to_double(value); return key; }
    if (key == "sweep.a_am_step") { cfg.sweep_a_am_step = to_double(value); return key; }
    if (key == "sweep.n_list") { cfg.sweep_n_list = to_int_list(value); return key; }
    if (key == "sweep.calib_a_am") { cfg.sweep_calib_a_am = to_double(value); return key; }
    if (key == "run.threads") {
        const long t = to_long(value);
        if (t < 1) throw std::invalid_argument("run.threads must be >= 1, got " + value);
        cfg.run_threads = unsigned(t);
        return key;
    }
    if (key == "output.dir") { cfg.output_dir = trim(value); return key; }
    throw std::invalid_argument("unknown key");
}

}

// Flat UTF-8 key=value text, `#` comments, dot-namespaced keys, no required
// keys. Unknown and duplicate keys are errors naming the key and line.
inline RunConfig parse_config_text(const std::string& text,
                                   const std::string& origin = "<config>") {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::map<std::string, int> seen;  // canonical key -> first line
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                        ": expected key=value, got '" + t + "'");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": empty key");
        std::string canonical;
        try {
            canonical = detail::apply_key(cfg, key, value);
        } catch (const std::exception& e) {
            throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": key '" + key +
                                        "': " + e.what());
        }
        const auto [it, inserted] = seen.emplace(canonical, line_no);
        if (!inserted)
            throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": key '" + key +
                                        "' already set at line " + std::to_string(it->second));
    }
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

}
