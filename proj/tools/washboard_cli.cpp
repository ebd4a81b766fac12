// washboard: command-line front end for the lattice qubit leakage simulator.
// Subcommands run one experiment each and emit CSV tables plus a JSON
// manifest into the output directory; all output is deterministic.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "washboard/washboard.hpp"

namespace wb = washboard;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir;
    unsigned threads = 1;
    int tau_points = 16;
    int record_stride = 0;

    CLI::Option* opt_out = nullptr;
    CLI::Option* opt_threads = nullptr;
    CLI::Option* opt_tau = nullptr;
    CLI::Option* opt_avg = nullptr;
    CLI::Option* opt_noavg = nullptr;
    CLI::Option* opt_stride = nullptr;
};

void add_common(CLI::App* sub, Options& o, bool scan, bool snapshots) {
    sub->add_option("-c,--config", o.config_path, "key=value config file");
    o.opt_out = sub->add_option("-o,--out-dir", o.out_dir, "output directory");
    o.opt_threads = sub->add_option("-t,--threads", o.threads, "independent worker threads");
    if (scan) {
        o.opt_tau = sub->add_option("--tau-points", o.tau_points, "delta_tau samples per scan");
        o.opt_avg = sub->add_flag("--depth-average", "average over the depth distribution");
        o.opt_noavg = sub->add_flag("--no-depth-average", "force a single-depth run");
    }
    if (snapshots)
        o.opt_stride = sub->add_option("--record-stride", o.record_stride,
                                       "steps between recorded snapshots");
}

wb::RunConfig load_config(const Options& o) {
    wb::RunConfig cfg;
    if (!o.config_path.empty()) cfg = wb::parse_config(o.config_path);
    if (o.opt_out && o.opt_out->count()) cfg.output_dir = o.out_dir;
    if (o.opt_threads && o.opt_threads->count()) cfg.run_threads = o.threads;
    if (o.opt_tau && o.opt_tau->count()) cfg.scan_tau_points = o.tau_points;
    if (o.opt_avg && o.opt_avg->count()) cfg.depth_average = true;
    if (o.opt_noavg && o.opt_noavg->count()) cfg.depth_average = false;
    if (o.opt_stride && o.opt_stride->count()) cfg.prop_record_stride = o.record_stride;
    cfg.validate();
    return cfg;
}

wb::Ensemble build_ensemble(const wb::RunConfig& cfg) {
    auto grid = cfg.grid();
    if (cfg.depth_average)
        return wb::make_ensemble(cfg.lattice(), cfg.depth_distribution(), grid, cfg.solver());
    return wb::single_ensemble(cfg.lattice(), grid, cfg.solver());
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

int cmd_spectrum(const wb::RunConfig& cfg) {
    const wb::System sys = wb::make_system(cfg.lattice(), cfg.grid(), cfg.solver());
    const std::string dir = cfg.resolved_output_dir();
    wb::io::ensure_dir(dir);
    wb::io::write_spectrum_csv(join_path(dir, "spectrum.csv"), sys.basis);
    nlohmann::json extra;
    extra["splitting"] = sys.basis.splitting();
    extra["n_states"] = sys.basis.states.size();
    wb::io::write_manifest(dir, "spectrum", cfg, {"spectrum.csv"}, extra);
    std::printf("spectrum: %zu localized states, qubit splitting %.6f hbar*omega_r\n",
                sys.basis.states.size(), sys.basis.splitting());
    std::printf("wrote %s\n", join_path(dir, "spectrum.csv").c_str());
    return 0;
}

int cmd_fringe(const wb::RunConfig& cfg) {
    const wb::Ensemble ens = build_ensemble(cfg);
    const double omega = 2.0 * std::numbers::pi * cfg.drive_omega_hz;
    const wb::FringeScanSpec spec{
        cfg.drive(), wb::default_tau_values(omega, cfg.scan_tau_points, cfg.scan_tau_periods)};
    const auto points = wb::run_fringe(ens, spec, cfg.prop(), cfg.run_threads);
    const auto fit = wb::fit_fringe_points(points, wb::fringe_frequency_hz(omega));
    const double tau_min = fit.minimum_tau();

    const std::string dir = cfg.resolved_output_dir();
    wb::io::ensure_dir(dir);
    wb::io::write_fringe_csv(join_path(dir, "fringe.csv"), points, omega, tau_min);
    nlohmann::json fj = wb::io::fit_json(fit);
    wb::io::write_text_file(join_path(dir, "fringe_fit.json"), fj.dump(2) + "\n");
    nlohmann::json extra;
    extra["tau_min_s"] = tau_min;
    wb::io::write_manifest(dir, "fringe", cfg, {"fringe.csv", "fringe_fit.json"}, extra);

    long failed = 0;
    for (const auto& pt : points)
        if (!pt.ok) ++failed;
    std::printf("fringe: %zu points, P_L = %.6g + %.6g cos(2w dtau + %.4f), residual RMS %.3g\n",
                points.size(), fit.offset, fit.amplitude, fit.phase, fit.residual_rms);
    std::printf("fit minimum at delta_tau = %.6g us\n", tau_min * 1e6);
    if (failed) std::printf("warning: %ld of %zu points failed\n", failed, points.size());
    std::printf("wrote %s\n", join_path(dir, "fringe.csv").c_str());
    return 0;
}

int cmd_visibility(const wb::RunConfig& cfg) {
    const wb::Ensemble ens = build_ensemble(cfg);
    wb::VisibilityStudySpec spec;
    spec.a_pm_values = cfg.visibility_a_pm_list;
    spec.a_am = cfg.drive_a_am;
    spec.n = cfg.drive_n;
    spec.omega = 2.0 * std::numbers::pi * cfg.drive_omega_hz;
    spec.tau_points = cfg.scan_tau_points;
    const auto rows = wb::run_visibility_study(ens, spec, cfg.prop(), cfg.run_threads);

    const std::string dir = cfg.resolved_output_dir();
    wb::io::ensure_dir(dir);
    wb::io::write_visibility_csv(join_path(dir, "visibility.csv"), rows);
    wb::io::write_manifest(dir, "visibility", cfg, {"visibility.csv"});
    for (const auto& r : rows)
        std::printf("A_PM = %.4f rad: log2(P_PM/P_AM) = %+.3f, visibility %.4f, 2-path model %.4f\n",
                    r.a_pm, r.log2_ratio, r.vis, r.model_vis);
    std::printf("wrote %s\n", join_path(dir, "visibility.csv").c_str());
    return 0;
}

int cmd_sweep(const wb::RunConfig& cfg) {
    const wb::Ensemble ens = build_ensemble(cfg);
    wb::SweepSpec spec;
    spec.a_pm_values = cfg.sweep_a_pm_list;
    spec.a_am_values = cfg.sweep_a_am_values();
    spec.n_values = cfg.sweep_n_list;
    spec.omega = 2.0 * std::numbers::pi * cfg.drive_omega_hz;
    spec.calib_a_am = cfg.sweep_calib_a_am;
    spec.calib_tau_points = cfg.scan_tau_points;
    const auto rows = wb::run_branching_sweep(ens, spec, cfg.prop(), cfg.run_threads);

    const std::string dir = cfg.resolved_output_dir();
    wb::io::ensure_dir(dir);
    wb::io::write_sweep_csv(join_path(dir, "sweep.csv"), rows);
    wb::io::write_manifest(dir, "sweep", cfg, {"sweep.csv"});

    // one summary line per (n, a_pm) curve: best improvement over the baseline
    std::size_t i = 0;
    while (i < rows.size()) {
        const int n = rows[i].n;
        const double a_pm = rows[i].a_pm;
        double best_impr = 0, best_am = 0;
        bool any = false;
        std::size_t j = i;
        for (; j < rows.size() && rows[j].n == n && rows[j].a_pm == a_pm; ++j) {
            if (!rows[j].ok || rows[j].a_am == 0) continue;
            if (!any || rows[j].improvement > best_impr) {
                best_impr = rows[j].improvement;
                best_am = rows[j].a_am;
                any = true;
            }
        }
        if (any)
            std::printf("n = %d, A_PM = %.4f rad: best B improvement %.3f at A_AM = %.2f\n", n,
                        a_pm, best_impr, best_am);
        else
            std::printf("n = %d, A_PM = %.4f rad: no successful nonzero-A_AM points\n", n, a_pm);
        i = j;
    }
    std::printf("wrote %s\n", join_path(dir, "sweep.csv").c_str());
    return 0;
}

int cmd_propagate(const wb::RunConfig& cfg) {
    const wb::System sys = wb::make_system(cfg.lattice(), cfg.grid(), cfg.solver());
    wb::PropagationConfig prop = cfg.prop();
    if (prop.record_stride == 0) prop.record_stride = 16;
    const wb::DriveSchedule sched = cfg.drive();
    const auto res = wb::propagate(sys.basis.states[sys.basis.qubit_ground].wf, sys.params,
                                   sched, prop);
    const auto rep = wb::measure(res, sys.basis);
    const double t_total = std::max(sched.t_m(), sched.delta_tau + sched.t_m());

    const std::string dir = cfg.resolved_output_dir();
    wb::io::ensure_dir(dir);
    wb::io::write_snapshots_csv(join_path(dir, "propagate.csv"), res, sys.basis, t_total);
    nlohmann::json extra;
    extra["p_g"] = rep.p_g;
    extra["p_e"] = rep.p_e;
    extra["p_l"] = rep.p_l;
    extra["leak_absorbed"] = rep.leak_absorbed;
    wb::io::write_manifest(dir, "propagate", cfg, {"propagate.csv"}, extra);

    std::printf("propagate: t = %.6g ms, P_g = %.6f, P_e = %.6f, P_L = %.6f\n", t_total * 1e3,
                rep.p_g, rep.p_e, rep.p_l);
    std::printf("leakage split: intra %.3g, inter %.3g, absorbed %.3g\n", rep.leak_intra,
                rep.leak_inter, rep.leak_absorbed);
    std::printf("wrote %s\n", join_path(dir, "propagate.csv").c_str());
    return 0;
}

}

int main(int argc, char** argv) {
    CLI::App app{"Tilted washboard lattice qubit: leakage interference simulator"};
    app.require_subcommand(1);

    Options o_spectrum, o_fringe, o_visibility, o_sweep, o_propagate;
    CLI::App* spectrum =
        app.add_subcommand("spectrum", "solve the stationary spectrum and qubit splitting");
    add_common(spectrum, o_spectrum, false, false);
    CLI::App* fringe =
        app.add_subcommand("fringe", "scan leakage vs. the AM start offset delta_tau");
    add_common(fringe, o_fringe, true, false);
    CLI::App* visibility =
        app.add_subcommand("visibility", "fringe visibility vs. the PM/AM leakage ratio");
    add_common(visibility, o_visibility, true, false);
    CLI::App* sweep =
        app.add_subcommand("sweep", "branching-ratio sweep over (A_PM, A_AM, n)");
    add_common(sweep, o_sweep, true, false);
    CLI::App* propagate =
        app.add_subcommand("propagate", "single time evolution with recorded snapshots");
    add_common(propagate, o_propagate, false, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (spectrum->parsed()) return cmd_spectrum(load_config(o_spectrum));
        if (fringe->parsed()) return cmd_fringe(load_config(o_fringe));
        if (visibility->parsed()) return cmd_visibility(load_config(o_visibility));
        if (sweep->parsed()) return cmd_sweep(load_config(o_sweep));
        if (propagate->parsed()) return cmd_propagate(load_config(o_propagate));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
