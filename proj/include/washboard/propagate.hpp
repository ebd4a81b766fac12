#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "washboard/grid.hpp"
#include "washboard/lattice.hpp"
#include "washboard/stationary.hpp"

namespace washboard {

// tau = omega_r * t: the dimensionless time of H = p^2 + ... in hbar*omega_r.
inline double time_rescale(double t_si, const LatticeParams& p) { return p.omega_r * t_si; }

struct PropagationConfig {
    double dt = 0;                    // step, s; 0 picks (2 pi / omega) / 256
    double absorber_width = 0.1;      // fraction of the domain per edge
    double absorber_strength = 12.0;  // imaginary-mask rate, hbar*omega_r
    int record_stride = 0;            // steps between snapshots; 0 = none
};

struct PropagationResult {
    WaveState final_state;
    double absorbed_norm = 0;
    std::vector<std::pair<double, WaveState>> snapshots;
};

// One Strang step: half potential at the step's midpoint time, full kinetic in
// momentum space (term is p^2, no 1/2), half potential, then absorber mask.
class Stepper {
public:
    Stepper(const LatticeParams& params, const DriveSchedule& sched, GridPtr grid,
            const PropagationConfig& cfg, double dt_si)
        : params_(params), sched_(sched), grid_(std::move(grid)), dt_(dt_si) {
        const SpectralGrid& g = *grid_;
        if (dt_si == 0) throw std::invalid_argument("Stepper: dt must be nonzero");
        if (cfg.absorber_width < 0 || cfg.absorber_width > 0.2)
            throw std::invalid_argument("Stepper: absorber_width must lie in [0, 0.2]");
        v_static_ = potential_static(params, g);
        const double x0 = registration_shift(params);
        w_am_.resize(g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double sn = std::sin(g.x[j] + x0);
            w_am_[j] = sn * sn;
        }
        const double dtau = params.omega_r * dt_si;
        kinetic_.resize(g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double ang = -g.k[j] * g.k[j] * dtau;
            kinetic_[j] = {std::cos(ang), std::sin(ang)};
        }
        static_half_.resize(g.n_points);
        const double half_tau = 0.5 * dtau;
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double ang = -v_static_[j] * half_tau;
            static_half_[j] = {std::cos(ang), std::sin(ang)};
        }
        scratch_.resize(g.n_points);
        mask_.assign(g.n_points, 1.0);
        if (cfg.absorber_width > 0 && cfg.absorber_strength > 0 && dt_si > 0) {
            const double span = g.x_max - g.x_min;
            const double l_abs = cfg.absorber_width * span;
            for (std::size_t j = 0; j < g.n_points; ++j) {
                const double dist = std::min(g.x[j] - g.x_min, g.x_max - g.x[j]);
                if (dist < l_abs) {
                    const double ramp = std::cos(std::numbers::pi / 2.0 * dist / l_abs);
                    mask_[j] = std::exp(-cfg.absorber_strength * ramp * ramp * dtau);
                }
            }
        }
    }

    double dt() const { return dt_; }

    void step(std::vector<std::complex<double>>& a, double t_mid_si) const {
        const SpectralGrid& g = *grid_;
        const double half_tau = 0.5 * params_.omega_r * dt_;
        const double c_lin = -theta_ddot(t_mid_si, sched_) / (2.0 * params_.omega_r * params_.omega_r);
        const double c_am = params_.r * eta(t_mid_si, sched_);
        // both half-steps of one Strang step share the midpoint time, so the
        // phase vector is computed once and applied twice
        const std::vector<std::complex<double>>* half;
        if (c_lin == 0.0 && c_am == 0.0) {
            half = &static_half_;
        } else {
            for (std::size_t j = 0; j < g.n_points; ++j) {
                const double ang = -(v_static_[j] + c_lin * g.x[j] + c_am * w_am_[j]) * half_tau;
                scratch_[j] = {std::cos(ang), std::sin(ang)};
            }
            half = &scratch_;
        }
        const auto& h = *half;
        for (std::size_t j = 0; j < g.n_points; ++j) a[j] *= h[j];
        g.fft->forward(a);
        for (std::size_t j = 0; j < g.n_points; ++j) a[j] *= kinetic_[j];
        g.fft->inverse(a);
        for (std::size_t j = 0; j < g.n_points; ++j) a[j] *= mask_[j] * h[j];
    }

private:
    LatticeParams params_;
    DriveSchedule sched_;
    GridPtr grid_;
    double dt_;
    std::vector<double> v_static_, w_am_, mask_;
    std::vector<std::complex<double>> kinetic_, static_half_;
    mutable std::vector<std::complex<double>> scratch_;
};

inline PropagationResult propagate(const WaveState& psi0, const LatticeParams& params,
                                   const DriveSchedule& sched, const PropagationConfig& cfg = {}) {
    if (psi0.momentum_rep)
        throw std::invalid_argument("propagate: initial state must be in position representation");
    if (!is_normalized(psi0))
        throw std::invalid_argument("propagate: initial state is not normalized (norm^2 = " +
                                    std::to_string(norm_squared(psi0)) + ")");
    const double period = 2.0 * std::numbers::pi / sched.omega;
    const double dt = (cfg.dt > 0) ? cfg.dt : period / 256.0;
    if (sched.omega * dt > 2.0 * std::numbers::pi / 64.0 + 1e-12)
        throw std::invalid_argument("propagate: dt too coarse, need >= 64 steps per drive period");

    const double t_total = std::max(sched.t_m(), sched.delta_tau + sched.t_m());
    long n_steps = std::lround(t_total / dt);
    double dt_last = dt;
    if (std::abs(double(n_steps) * dt - t_total) > 1e-9 * t_total) {
        n_steps = long(std::ceil(t_total / dt - 1e-9));
        dt_last = t_total - double(n_steps - 1) * dt;
    }
    if (n_steps < 1) n_steps = 1;

    Stepper stepper(params, sched, psi0.grid, cfg, dt);
    PropagationResult res;
    res.final_state = psi0;
    auto& a = res.final_state.amp;
    double t = 0;
    for (long j = 0; j < n_steps; ++j) {
        const bool last = (j == n_steps - 1);
        const double step_dt = last ? dt_last : dt;
        if (last && std::abs(dt_last - dt) > 1e-15 * dt) {
            Stepper tail(params, sched, psi0.grid, cfg, dt_last);
            tail.step(a, t + 0.5 * step_dt);
        } else {
            stepper.step(a, t + 0.5 * step_dt);
        }
        t += step_dt;
        double n2 = 0;
        for (const auto& v : a) n2 += std::norm(v);
        n2 *= psi0.grid->dx;
        if (!std::isfinite(n2))
            throw std::runtime_error("propagate: non-finite state at step " + std::to_string(j + 1) +
                                     " of " + std::to_string(n_steps) + ", norm^2 = " + std::to_string(n2));
        res.absorbed_norm = std::max(0.0, 1.0 - n2);  // FP noise can push 1-n2 below zero
        if (cfg.record_stride > 0 && (j + 1) % cfg.record_stride == 0)
            res.snapshots.emplace_back(t, res.final_state);
    }
    return res;
}

// <H0> for the static Hamiltonian: kinetic from the momentum representation
// plus the potential quadrature.
inline double energy_expectation(const WaveState& psi, const LatticeParams& params) {
    const SpectralGrid& g = *psi.grid;
    const WaveState phi = to_momentum(psi);
    const double dk = 2.0 * std::numbers::pi / (double(g.n_points) * g.dx);
    double kin = 0;
    for (std::size_t j = 0; j < g.n_points; ++j) kin += g.k[j] * g.k[j] * std::norm(phi.amp[j]);
    kin *= dk;
    const auto v = potential_static(params, g);
    double pot = 0;
    for (std::size_t j = 0; j < g.n_points; ++j) pot += v[j] * std::norm(psi.amp[j]);
    pot *= g.dx;
    return kin + pot;
}

}
