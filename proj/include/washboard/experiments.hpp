#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "washboard/grid.hpp"
#include "washboard/lattice.hpp"
#include "washboard/measure.hpp"
#include "washboard/models.hpp"
#include "washboard/parallel.hpp"
#include "washboard/propagate.hpp"
#include "washboard/stationary.hpp"

namespace washboard {

// One lattice depth, solved once and reused across a whole scan.
struct System {
    LatticeParams params;
    GridPtr grid;
    StateBasis basis;
};

inline System make_system(const LatticeParams& params, GridPtr grid,
                          const SolveOptions& opts = {}) {
    StateBasis basis = solve_static(params, grid, opts);
    return System{params, std::move(grid), std::move(basis)};
}

// Weighted set of solved systems; a single-depth run is the one-member case.
struct Ensemble {
    std::vector<double> weights;
    std::vector<System> systems;

    std::size_t size() const { return systems.size(); }
};

// Every depth must solve; a failure aborts naming the offending r.
inline Ensemble make_ensemble(const LatticeParams& base, const DepthDistribution& dist,
                              GridPtr grid, const SolveOptions& opts = {}) {
    Ensemble ens;
    ens.weights.reserve(dist.entries.size());
    ens.systems.reserve(dist.entries.size());
    for (const auto& dw : dist.entries) {
        LatticeParams p(dw.r, base.s, base.omega_r, base.a, base.mass);
        try {
            ens.systems.push_back(make_system(p, grid, opts));
        } catch (const std::exception& e) {
            throw std::runtime_error("make_ensemble: depth r = " + std::to_string(dw.r) +
                                     " failed: " + e.what());
        }
        ens.weights.push_back(dw.weight);
    }
    return ens;
}

inline Ensemble single_ensemble(const LatticeParams& params, GridPtr grid,
                                const SolveOptions& opts = {}) {
    return make_ensemble(params, DepthDistribution::single(params.r), std::move(grid), opts);
}

// Ground state in, populations out: the elementary experiment.
inline PopulationReport run_once(const System& sys, const DriveSchedule& sched,
                                 const PropagationConfig& cfg = {}) {
    const WaveState& psi0 = sys.basis.states[sys.basis.qubit_ground].wf;
    const PropagationResult res = propagate(psi0, sys.params, sched, cfg);
    return measure(res, sys.basis);
}

namespace detail {

inline void accumulate(PopulationReport& acc, const PopulationReport& part, double w) {
    acc.p_g += w * part.p_g;
    acc.p_e += w * part.p_e;
    acc.p_l += w * part.p_l;
    acc.leak_intra += w * part.leak_intra;
    acc.leak_inter += w * part.leak_inter;
    acc.leak_absorbed += w * part.leak_absorbed;
}

}

// Probability-weighted mean of every PopulationReport field; each member
// carries its own qubit basis. runner: (const System&) -> PopulationReport.
template <typename Runner>
PopulationReport average_over_depths(const Ensemble& ens, Runner&& runner) {
    PopulationReport acc;
    for (std::size_t m = 0; m < ens.size(); ++m) {
        try {
            detail::accumulate(acc, runner(ens.systems[m]), ens.weights[m]);
        } catch (const std::exception& e) {
            throw std::runtime_error("average_over_depths: depth r = " +
                                     std::to_string(ens.systems[m].params.r) + ": " + e.what());
        }
    }
    return acc;
}

// Ensemble evaluation of one schedule. Members run in parallel; the merge
// order is fixed by member index, so results do not depend on scheduling.
inline PopulationReport run_averaged(const Ensemble& ens, const DriveSchedule& sched,
                                     const PropagationConfig& cfg = {}, unsigned threads = 1) {
    std::vector<PopulationReport> parts(ens.size());
    parallel_for(ens.size(), threads, [&](std::size_t m) {
        try {
            parts[m] = run_once(ens.systems[m], sched, cfg);
        } catch (const std::exception& e) {
            throw std::runtime_error("depth r = " + std::to_string(ens.systems[m].params.r) +
                                     ": " + e.what());
        }
    });
    PopulationReport acc;
    for (std::size_t m = 0; m < ens.size(); ++m) detail::accumulate(acc, parts[m], ens.weights[m]);
    return acc;
}

// The fringe oscillates at 2*omega, so its period in delta_tau is pi/omega
// and the fixed fit frequency in Hz is omega/pi.
inline double fringe_period(double omega) { return std::numbers::pi / omega; }
inline double fringe_frequency_hz(double omega) { return omega / std::numbers::pi; }

inline std::vector<double> default_tau_values(double omega, int n_points = 16,
                                              double periods = 1.0) {
    if (!(omega > 0)) throw std::invalid_argument("default_tau_values: omega must be > 0");
    if (n_points < 4)
        throw std::invalid_argument("default_tau_values: need >= 4 points, got " +
                                    std::to_string(n_points));
    if (!(periods >= 1.0))
        throw std::invalid_argument("default_tau_values: scan must cover >= 1 fringe period");
    const double span = periods * fringe_period(omega);
    std::vector<double> tau(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i)
        tau[std::size_t(i)] = span * double(i) / double(n_points - 1);
    return tau;
}

struct FringeScanSpec {
    DriveSchedule sched_base;        // delta_tau here is ignored, set per point
    std::vector<double> tau_values;  // s, nonnegative, spanning >= pi/omega
};

struct FringePoint {
    double delta_tau = 0;
    PopulationReport report;  // depth-averaged when the ensemble has > 1 member
    bool ok = false;
    std::string error;
};

// One propagate+measure per (tau, depth), flattened for the thread pool.
// Per-point failures are recorded and the scan continues.
inline std::vector<FringePoint> run_fringe(const Ensemble& ens, const FringeScanSpec& spec,
                                           const PropagationConfig& cfg = {},
                                           unsigned threads = 1) {
    const auto& tau = spec.tau_values;
    if (tau.empty()) throw std::invalid_argument("run_fringe: tau_values is empty");
    double lo = tau[0], hi = tau[0];
    for (double t : tau) {
        if (!(t >= 0))
            throw std::invalid_argument("run_fringe: negative delta_tau " + std::to_string(t));
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    const double period = fringe_period(spec.sched_base.omega);
    if (hi - lo < period * (1.0 - 1e-9))
        throw std::invalid_argument("run_fringe: tau span " + std::to_string(hi - lo) +
                                    " s is below one fringe period pi/omega = " +
                                    std::to_string(period) + " s");

    const std::size_t n_tau = tau.size();
    const std::size_t n_mem = ens.size();
    std::vector<PopulationReport> parts(n_tau * n_mem);
    std::vector<std::string> errs(n_tau * n_mem);
    parallel_for(n_tau * n_mem, threads, [&](std::size_t j) {
        const std::size_t it = j / n_mem;
        const std::size_t m = j % n_mem;
        try {
            const DriveSchedule sched(spec.sched_base.a_pm, spec.sched_base.a_am,
                                      spec.sched_base.omega, spec.sched_base.n, tau[it]);
            parts[j] = run_once(ens.systems[m], sched, cfg);
        } catch (const std::exception& e) {
            errs[j] = "depth r = " + std::to_string(ens.systems[m].params.r) + ": " + e.what();
        }
    });

    std::vector<FringePoint> out(n_tau);
    for (std::size_t it = 0; it < n_tau; ++it) {
        FringePoint pt;
        pt.delta_tau = tau[it];
        pt.ok = true;
        PopulationReport acc;
        for (std::size_t m = 0; m < n_mem; ++m) {
            const std::size_t j = it * n_mem + m;
            if (!errs[j].empty()) {
                pt.ok = false;
                if (pt.error.empty()) pt.error = errs[j];
            } else {
                detail::accumulate(acc, parts[j], ens.weights[m]);
            }
        }
        if (pt.ok) pt.report = acc;
        out[it] = std::move(pt);
    }
    return out;
}

// Fit P_L of the surviving points at the pinned fringe frequency.
inline FringeFit fit_fringe_points(const std::vector<FringePoint>& points,
                                   double fixed_freq_hz) {
    std::vector<std::pair<double, double>> samples;
    samples.reserve(points.size());
    for (const auto& pt : points)
        if (pt.ok) samples.emplace_back(pt.delta_tau, pt.report.p_l);
    return fit_fringe(samples, fixed_freq_hz);
}

// Whether delta_tau = 0 lands on the destructive fringe depends on drive sign
// conventions, so every report quotes phase relative to a measured minimum.
struct Calibration {
    double tau_min = 0;  // s, fit minimum reduced to [0, pi/omega)
    FringeFit fit;
    std::vector<FringePoint> points;
};

inline Calibration calibrate_delta_tau(const Ensemble& ens, const DriveSchedule& sched_ref,
                                       const PropagationConfig& cfg = {}, int n_points = 16,
                                       unsigned threads = 1) {
    FringeScanSpec spec{sched_ref, default_tau_values(sched_ref.omega, n_points)};
    Calibration cal;
    cal.points = run_fringe(ens, spec, cfg, threads);
    cal.fit = fit_fringe_points(cal.points, fringe_frequency_hz(sched_ref.omega));
    cal.tau_min = cal.fit.minimum_tau();
    return cal;
}

// 2 omega (delta_tau - tau_min), reduced to [0, 2 pi).
inline double relative_phase(double omega, double delta_tau, double tau_min) {
    const double two_pi = 2.0 * std::numbers::pi;
    double phi = std::fmod(2.0 * omega * (delta_tau - tau_min), two_pi);
    if (phi < 0) phi += two_pi;
    return phi;
}

struct VisibilityStudySpec {
    std::vector<double> a_pm_values;  // rad; the scanned leakage-ratio axis
    double a_am = 0.10;
    int n = 4;
    double omega = 2.0 * std::numbers::pi * 4990.0;
    int tau_points = 16;
};

struct VisibilityRow {
    double a_pm = 0;
    double p_pm = 0;  // leakage, PM alone
    double p_am = 0;  // leakage, AM alone
    double log2_ratio = 0;
    FringeFit fit;
    double p_max = 0;  // fit offset + amplitude
    double p_min = 0;  // fit offset - amplitude, clamped at 0
    double vis = 0;
    double model_vis = 0;  // idealized 2-path value at the measured ratio
};

inline std::vector<VisibilityRow> run_visibility_study(const Ensemble& ens,
                                                       const VisibilityStudySpec& spec,
                                                       const PropagationConfig& cfg = {},
                                                       unsigned threads = 1) {
    if (spec.a_pm_values.empty())
        throw std::invalid_argument("run_visibility_study: a_pm_values is empty");
    if (!(spec.a_am > 0))
        throw std::invalid_argument("run_visibility_study: a_am must be > 0");

    // the AM-only companion run is shared by every row
    const DriveSchedule am_only(0.0, spec.a_am, spec.omega, spec.n, 0.0);
    const double p_am = run_averaged(ens, am_only, cfg, threads).p_l;

    std::vector<VisibilityRow> rows;
    rows.reserve(spec.a_pm_values.size());
    for (double a_pm : spec.a_pm_values) {
        VisibilityRow row;
        row.a_pm = a_pm;
        row.p_am = p_am;
        const DriveSchedule pm_only(a_pm, 0.0, spec.omega, spec.n, 0.0);
        row.p_pm = run_averaged(ens, pm_only, cfg, threads).p_l;
        if (!(row.p_pm > 0) || !(row.p_am > 0))
            throw std::runtime_error("run_visibility_study: single-drive leakage vanished (P_PM = " +
                                     std::to_string(row.p_pm) + ", P_AM = " +
                                     std::to_string(row.p_am) + "), ratio undefined");
        row.log2_ratio = std::log2(row.p_pm / row.p_am);

        FringeScanSpec scan{DriveSchedule(a_pm, spec.a_am, spec.omega, spec.n, 0.0),
                            default_tau_values(spec.omega, spec.tau_points)};
        const auto points = run_fringe(ens, scan, cfg, threads);
        row.fit = fit_fringe_points(points, fringe_frequency_hz(spec.omega));
        row.p_max = row.fit.offset + row.fit.amplitude;
        row.p_min = std::max(0.0, row.fit.offset - row.fit.amplitude);
        row.vis = visibility(row.p_max, row.p_min);
        row.model_vis = two_path_visibility_curve(row.log2_ratio);
        rows.push_back(std::move(row));
    }
    return rows;
}

struct SweepSpec {
    std::vector<double> a_pm_values;  // rad
    std::vector<double> a_am_values;  // the A_AM = 0 baseline is added if absent
    std::vector<int> n_values;
    double omega = 2.0 * std::numbers::pi * 4990.0;
    double calib_a_am = 0;  // 0 picks the median nonzero a_am
    int calib_tau_points = 16;
};

struct SweepRow {
    double a_pm = 0;
    double a_am = 0;
    int n = 0;
    double delta_tau = 0;  // calibrated fringe minimum used for this curve
    PopulationReport report;
    double b = 0;
    double b_baseline = 0;    // same-curve A_AM = 0 value
    double improvement = 0;   // b / b_baseline
    bool ok = false;
    std::string error;
};

// Full (a_pm, a_am, n) grid at the per-curve calibrated fringe minimum.
// Per-point failures are recorded and the sweep continues.
inline std::vector<SweepRow> run_branching_sweep(const Ensemble& ens, const SweepSpec& spec,
                                                 const PropagationConfig& cfg = {},
                                                 unsigned threads = 1) {
    if (spec.a_pm_values.empty() || spec.a_am_values.empty() || spec.n_values.empty())
        throw std::invalid_argument("run_branching_sweep: empty sweep axis");

    std::vector<double> a_am = spec.a_am_values;
    std::sort(a_am.begin(), a_am.end());
    a_am.erase(std::unique(a_am.begin(), a_am.end()), a_am.end());
    if (!(a_am.front() >= 0))
        throw std::invalid_argument("run_branching_sweep: negative a_am in sweep axis");
    if (a_am.front() != 0.0) a_am.insert(a_am.begin(), 0.0);  // baseline inclusion

    double calib_am = spec.calib_a_am;
    if (calib_am <= 0) {
        std::vector<double> nz(a_am.begin() + 1, a_am.end());
        if (nz.empty())
            calib_am = 0;  // baseline-only sweep, nothing to calibrate against
        else
            calib_am = nz[nz.size() / 2];
    }

    const std::size_t n_am = a_am.size();
    const std::size_t n_mem = ens.size();
    std::vector<SweepRow> rows;
    rows.reserve(spec.n_values.size() * spec.a_pm_values.size() * n_am);

    for (int n : spec.n_values) {
        for (double a_pm : spec.a_pm_values) {
            double tau_min = 0;
            if (calib_am > 0) {
                const DriveSchedule ref(a_pm, calib_am, spec.omega, n, 0.0);
                tau_min =
                    calibrate_delta_tau(ens, ref, cfg, spec.calib_tau_points, threads).tau_min;
            }

            std::vector<PopulationReport> parts(n_am * n_mem);
            std::vector<std::string> errs(n_am * n_mem);
            parallel_for(n_am * n_mem, threads, [&](std::size_t j) {
                const std::size_t ia = j / n_mem;
                const std::size_t m = j % n_mem;
                try {
                    const DriveSchedule sched(a_pm, a_am[ia], spec.omega, n, tau_min);
                    parts[j] = run_once(ens.systems[m], sched, cfg);
                } catch (const std::exception& e) {
                    errs[j] = "depth r = " + std::to_string(ens.systems[m].params.r) + ": " +
                              e.what();
                }
            });

            const std::size_t first = rows.size();
            for (std::size_t ia = 0; ia < n_am; ++ia) {
                SweepRow row;
                row.a_pm = a_pm;
                row.a_am = a_am[ia];
                row.n = n;
                row.delta_tau = tau_min;
                row.ok = true;
                PopulationReport acc;
                for (std::size_t m = 0; m < n_mem; ++m) {
                    const std::size_t j = ia * n_mem + m;
                    if (!errs[j].empty()) {
                        row.ok = false;
                        if (row.error.empty()) row.error = errs[j];
                    } else {
                        detail::accumulate(acc, parts[j], ens.weights[m]);
                    }
                }
                if (row.ok) {
                    row.report = acc;
                    row.b = branching_ratio(acc);
                }
                rows.push_back(std::move(row));
            }

            // the baseline is always rows[first]: a_am is sorted with 0 in front
            const SweepRow& base = rows[first];
            const double b0 = base.ok ? base.b : std::numeric_limits<double>::quiet_NaN();
            for (std::size_t i = first; i < rows.size(); ++i) {
                rows[i].b_baseline = b0;
                rows[i].improvement = rows[i].ok ? rows[i].b / b0
                                                 : std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return rows;
}

}
