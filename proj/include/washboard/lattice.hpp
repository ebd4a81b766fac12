#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace washboard {

inline constexpr double planck_h = 6.62607015e-34;  // J s, exact SI

inline double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

// Dimensionless lattice: depth r and tilt-per-well s in units of hbar*omega_r,
// with the recoil scale omega_r = 2*pi*h/(8*m*a^2). omega_r is authoritative
// when given directly; from_physical derives it from (mass, a).
struct LatticeParams {
    double r;        // lattice depth, hbar*omega_r
    double s;        // tilt per lattice spacing, hbar*omega_r
    double omega_r;  // recoil angular frequency, rad/s
    double a;        // lattice spacing, m
    double mass;     // atom mass, kg

    LatticeParams(double r_, double s_, double omega_r_, double a_, double mass_)
        : r(r_), s(s_), omega_r(omega_r_), a(a_), mass(mass_) {
        if (!(r > 0)) throw std::invalid_argument("LatticeParams: r must be > 0, got " + std::to_string(r));
        if (!(s >= 0)) throw std::invalid_argument("LatticeParams: s must be >= 0, got " + std::to_string(s));
        if (!(omega_r > 0)) throw std::invalid_argument("LatticeParams: omega_r must be > 0");
        if (!(a > 0)) throw std::invalid_argument("LatticeParams: a must be > 0");
        if (!(mass > 0)) throw std::invalid_argument("LatticeParams: mass must be > 0");
    }

    static LatticeParams from_physical(double mass, double a, double r, double s) {
        const double omega_r = 2.0 * std::numbers::pi * planck_h / (8.0 * mass * a * a);
        LatticeParams p(r, s, omega_r, a, mass);
        const double rel = std::abs(p.omega_r - 2.0 * std::numbers::pi * planck_h / (8.0 * p.mass * p.a * p.a)) / p.omega_r;
        if (rel > 1e-9)
            throw std::logic_error("LatticeParams::from_physical: omega_r consistency violated");
        return p;
    }
};

// Reference system: 85Rb in a 0.930 um lattice; the quoted omega_r of
// 2*pi*685 Hz is kept authoritative over the (mass, a)-derived 679 Hz.
inline LatticeParams default_lattice() {
    return LatticeParams(19.0, 2.86, 2.0 * std::numbers::pi * 685.0, 0.930e-6, 1.40999e-25);
}

// PM drive theta(t) = A_PM (1 - cos w t) on [0, t_m], t_m = 2 n pi / w;
// AM drive eta(t) = A_AM sin(2 w (t - dtau)) on [dtau, dtau + t_m].
struct DriveSchedule {
    double a_pm;       // rad of lattice displacement in x units
    double a_am;       // fractional depth modulation, [0, 1)
    double omega;      // drive angular frequency, rad/s
    int n;             // PM periods in the pulse
    double delta_tau;  // AM start offset, s, >= 0

    DriveSchedule(double a_pm_, double a_am_, double omega_, int n_, double delta_tau_ = 0.0)
        : a_pm(a_pm_), a_am(a_am_), omega(omega_), n(n_), delta_tau(delta_tau_) {
        if (!(a_pm >= 0)) throw std::invalid_argument("DriveSchedule: a_pm must be >= 0");
        if (!(a_am >= 0 && a_am < 1))
            throw std::invalid_argument("DriveSchedule: a_am must lie in [0, 1), got " + std::to_string(a_am));
        if (!(omega > 0)) throw std::invalid_argument("DriveSchedule: omega must be > 0");
        if (n < 1) throw std::invalid_argument("DriveSchedule: n must be >= 1, got " + std::to_string(n));
        if (!(delta_tau >= 0))
            throw std::invalid_argument("DriveSchedule: delta_tau must be >= 0, got " + std::to_string(delta_tau));
    }

    double t_m() const { return 2.0 * double(n) * std::numbers::pi / omega; }
};

inline double theta(double t, const DriveSchedule& d) {
    if (t < 0 || t > d.t_m()) return 0.0;
    return d.a_pm * (1.0 - std::cos(d.omega * t));
}

// Analytic d^2 theta/dt^2; the propagator applies the -(theta_ddot/2) x sign.
inline double theta_ddot(double t, const DriveSchedule& d) {
    if (t < 0 || t > d.t_m()) return 0.0;
    return d.a_pm * d.omega * d.omega * std::cos(d.omega * t);
}

inline double eta(double t, const DriveSchedule& d) {
    if (t < d.delta_tau || t > d.delta_tau + d.t_m()) return 0.0;
    return d.a_am * std::sin(2.0 * d.omega * (t - d.delta_tau));
}

// Relative drive phase 2 w dtau, reduced to [0, 2 pi).
inline double phase_from_offset(const DriveSchedule& d) {
    const double two_pi = 2.0 * std::numbers::pi;
    double phi = std::fmod(2.0 * d.omega * d.delta_tau, two_pi);
    if (phi < 0) phi += two_pi;
    return phi;
}

struct DepthWeight {
    double r;
    double weight;
};

// Normalized discrete stand-in for the (unpublished) experimental spread of
// lattice depths; every entry must solve with two central-well states.
struct DepthDistribution {
    std::vector<DepthWeight> entries;

    explicit DepthDistribution(std::vector<DepthWeight> e) : entries(std::move(e)) {
        if (entries.empty()) throw std::invalid_argument("DepthDistribution: no entries");
        double sum = 0;
        for (const auto& d : entries) {
            if (!(d.weight >= 0))
                throw std::invalid_argument("DepthDistribution: negative weight at r = " + std::to_string(d.r));
            if (!(d.r > 0))
                throw std::invalid_argument("DepthDistribution: depth must be > 0, got " + std::to_string(d.r));
            sum += d.weight;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("DepthDistribution: weights sum to " + std::to_string(sum) +
                                        ", must be 1 within 1e-12");
    }

    static DepthDistribution single(double r) { return DepthDistribution({{r, 1.0}}); }

    // Equally spaced nodes on [lo, hi] weighted by a Gaussian pdf (trapezoid
    // end factors), renormalized. Support must stay inside the two-state
    // regime of the central well (see solve_static).
    static DepthDistribution truncated_gaussian(double mean, double sigma, double lo, double hi,
                                                int nodes) {
        if (nodes < 1) throw std::invalid_argument("DepthDistribution: nodes must be >= 1");
        if (!(hi > lo)) throw std::invalid_argument("DepthDistribution: hi must exceed lo");
        if (!(sigma > 0)) throw std::invalid_argument("DepthDistribution: sigma must be > 0");
        std::vector<DepthWeight> e;
        if (nodes == 1) {
            e.push_back({mean, 1.0});
        } else {
            const double step = (hi - lo) / double(nodes - 1);
            double sum = 0;
            for (int i = 0; i < nodes; ++i) {
                const double r = lo + step * double(i);
                const double z = (r - mean) / sigma;
                double w = std::exp(-0.5 * z * z);
                if (i == 0 || i == nodes - 1) w *= 0.5;
                e.push_back({r, w});
                sum += w;
            }
            for (auto& d : e) d.weight /= sum;
        }
        return DepthDistribution(std::move(e));
    }
};

inline DepthDistribution default_depth_distribution() {
    return DepthDistribution::truncated_gaussian(19.0, 0.15 * 19.0, 14.0, 24.0, 9);
}

}
