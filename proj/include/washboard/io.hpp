#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "washboard/config.hpp"
#include "washboard/experiments.hpp"
#include "washboard/version.hpp"

namespace washboard::io {

// RFC-4180-style quoting; only fields that need it are quoted, so numeric
// columns stay bare. Lines end with \n for byte-stable output everywhere.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::string text;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) text += ',';
        text += csv_field(header[i]);
    }
    text += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::logic_error("write_csv: row width " + std::to_string(row.size()) +
                                   " != header width " + std::to_string(header.size()));
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            text += csv_field(row[i]);
        }
        text += '\n';
    }
    write_text_file(path, text);
}

inline void write_spectrum_csv(const std::string& path, const StateBasis& basis) {
    using detail::fmt17;
    std::vector<std::vector<std::string>> rows;
    rows.reserve(basis.states.size());
    for (const auto& st : basis.states)
        rows.push_back({std::to_string(st.well_index), std::to_string(st.intra_well_rank),
                        fmt17(st.energy), fmt17(st.loc_fraction)});
    write_csv(path, {"well_index", "rank", "energy", "loc_fraction"}, rows);
}

namespace detail_io {

inline void append_report(std::vector<std::string>& row, const PopulationReport& rep) {
    using washboard::detail::fmt17;
    row.push_back(fmt17(rep.p_g));
    row.push_back(fmt17(rep.p_e));
    row.push_back(fmt17(rep.p_l));
    row.push_back(fmt17(rep.leak_intra));
    row.push_back(fmt17(rep.leak_inter));
    row.push_back(fmt17(rep.leak_absorbed));
}

}

// delta_phi_rel is quoted relative to the calibrated minimum tau_min.
inline void write_fringe_csv(const std::string& path, const std::vector<FringePoint>& points,
                             double omega, double tau_min) {
    using detail::fmt17;
    std::vector<std::vector<std::string>> rows;
    rows.reserve(points.size());
    for (const auto& pt : points) {
        std::vector<std::string> row;
        row.push_back(fmt17(pt.delta_tau));
        row.push_back(fmt17(relative_phase(omega, pt.delta_tau, tau_min)));
        detail_io::append_report(row, pt.ok ? pt.report : PopulationReport{});
        row.push_back(pt.ok ? "1" : "0");
        row.push_back(pt.error);
        rows.push_back(std::move(row));
    }
    write_csv(path,
              {"delta_tau_s", "delta_phi_rel_rad", "p_g", "p_e", "p_l", "leak_intra",
               "leak_inter", "leak_absorbed", "ok", "error"},
              rows);
}

inline void write_visibility_csv(const std::string& path,
                                 const std::vector<VisibilityRow>& study) {
    using detail::fmt17;
    std::vector<std::vector<std::string>> rows;
    rows.reserve(study.size());
    for (const auto& r : study)
        rows.push_back({fmt17(r.a_pm), fmt17(r.p_pm), fmt17(r.p_am), fmt17(r.log2_ratio),
                        fmt17(r.p_max), fmt17(r.p_min), fmt17(r.vis), fmt17(r.model_vis),
                        fmt17(r.fit.offset), fmt17(r.fit.amplitude), fmt17(r.fit.phase),
                        fmt17(r.fit.residual_rms)});
    write_csv(path,
              {"a_pm_rad", "p_pm", "p_am", "log2_ratio", "p_max", "p_min", "visibility",
               "model_visibility", "fit_offset", "fit_amplitude", "fit_phase_rad",
               "fit_residual_rms"},
              rows);
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& sweep) {
    using detail::fmt17;
    std::vector<std::vector<std::string>> rows;
    rows.reserve(sweep.size());
    for (const auto& r : sweep) {
        std::vector<std::string> row;
        row.push_back(std::to_string(r.n));
        row.push_back(fmt17(r.a_pm));
        row.push_back(fmt17(r.a_am));
        row.push_back(fmt17(r.delta_tau));
        detail_io::append_report(row, r.ok ? r.report : PopulationReport{});
        row.push_back(fmt17(r.b));
        row.push_back(fmt17(r.b_baseline));
        row.push_back(fmt17(r.improvement));
        row.push_back(r.ok ? "1" : "0");
        row.push_back(r.error);
        rows.push_back(std::move(row));
    }
    write_csv(path,
              {"n", "a_pm_rad", "a_am", "delta_tau_s", "p_g", "p_e", "p_l", "leak_intra",
               "leak_inter", "leak_absorbed", "b", "b_baseline", "improvement", "ok", "error"},
              rows);
}

// Time series of the recorded snapshots plus the final state.
inline void write_snapshots_csv(const std::string& path, const PropagationResult& result,
                                const StateBasis& basis, double t_final) {
    using detail::fmt17;
    std::vector<std::vector<std::string>> rows;
    auto add = [&](double t, const WaveState& psi, double absorbed) {
        PropagationResult frame;
        frame.final_state = psi;
        frame.absorbed_norm = absorbed;
        const PopulationReport rep = measure(frame, basis);
        std::vector<std::string> row;
        row.push_back(fmt17(t));
        row.push_back(fmt17(norm_squared(psi)));
        detail_io::append_report(row, rep);
        rows.push_back(std::move(row));
    };
    double t_last = -1;
    for (const auto& [t, psi] : result.snapshots) {
        add(t, psi, 1.0 - norm_squared(psi));
        t_last = t;
    }
    if (t_final > t_last) add(t_final, result.final_state, result.absorbed_norm);
    write_csv(path,
              {"t_s", "norm_squared", "p_g", "p_e", "p_l", "leak_intra", "leak_inter",
               "leak_absorbed"},
              rows);
}

inline nlohmann::json fit_json(const FringeFit& fit) {
    nlohmann::json j;
    j["amplitude"] = fit.amplitude;
    j["offset"] = fit.offset;
    j["phase_rad"] = fit.phase;
    j["fixed_freq_hz"] = fit.fixed_freq;
    j["residual_rms"] = fit.residual_rms;
    j["offset_covers_amplitude"] = fit.offset_covers_amplitude;
    j["minimum_tau_s"] = fit.minimum_tau();
    return j;
}

// One manifest per run: version, subcommand, resolved config echo, and the
// emitted file list. No timestamps, so identical runs are byte-identical.
inline void write_manifest(const std::string& dir, const std::string& subcommand,
                           const RunConfig& cfg, const std::vector<std::string>& outputs,
                           const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json j;
    j["version"] = version_string;
    j["subcommand"] = subcommand;
    j["config"] = cfg.as_key_values();
    j["outputs"] = outputs;
    for (const auto& [key, value] : extra.items()) j[key] = value;
    write_text_file((std::filesystem::path(dir) / "manifest.json").string(), j.dump(2) + "\n");
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

}
