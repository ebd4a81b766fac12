#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "washboard/grid.hpp"
#include "washboard/lattice.hpp"

namespace washboard {

// Shift applied to the lattice argument so every local minimum of the full
// tilted potential r sin^2(x + x0) + (s/pi) x sits exactly at x = m*pi.
inline double registration_shift(const LatticeParams& p) {
    const double ratio = p.s / (std::numbers::pi * p.r);
    if (ratio >= 1.0)
        throw std::invalid_argument("registration_shift: tilt s = " + std::to_string(p.s) +
                                    " exceeds the lattice force (s >= pi*r); no well minima exist");
    return -0.5 * std::asin(ratio);
}

inline std::vector<double> potential_static(const LatticeParams& p, const SpectralGrid& g) {
    const double x0 = registration_shift(p);
    std::vector<double> v(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double sn = std::sin(g.x[j] + x0);
        v[j] = p.r * sn * sn + (p.s / std::numbers::pi) * g.x[j];
    }
    return v;
}

struct BasisState {
    double energy;        // hbar*omega_r
    WaveState wf;         // position representation, unit norm
    int well_index;       // nearest well center, in units of pi
    int intra_well_rank;  // energy order among states sharing well_index
    double loc_fraction;  // probability within +-pi/2 of the well center
};

struct StateBasis {
    std::vector<BasisState> states;  // energy-ascending
    std::size_t qubit_ground = 0;
    std::size_t qubit_excited = 0;
    GridPtr grid;
    double x0 = 0;  // registration shift used for the potential

    double splitting() const {
        return states[qubit_excited].energy - states[qubit_ground].energy;
    }
};

struct SolveOptions {
    double loc_threshold = 0.85;  // min probability within +-pi/2 of the well center
    double e_max = 0;             // eigenvalue ceiling; 0 = r + s*half_wells + 4
};

namespace detail {

// Eigenvalue count of the symmetric tridiagonal (diag, off) below lambda,
// via the Sturm/LDL^T sign recurrence.
inline int sturm_count(const std::vector<double>& diag, double off2, double lambda) {
    int count = 0;
    double q = 1.0;
    const double tiny = 1e-150;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        q = diag[i] - lambda - (i ? off2 / q : 0.0);
        if (q == 0.0) q = tiny;
        if (q < 0) ++count;
    }
    return count;
}

// All eigenvalues < e_max, found by index bisection; abs tolerance ~1e-13 of
// the Gershgorin range.
inline std::vector<double> tridiag_eigenvalues_below(const std::vector<double>& diag, double off,
                                                     double e_max) {
    const std::size_t n = diag.size();
    double lo = diag[0], hi = diag[0];
    for (double d : diag) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    lo -= 2.0 * std::abs(off) + 1.0;
    hi += 2.0 * std::abs(off) + 1.0;
    const double off2 = off * off;
    const double tol = 1e-13 * (hi - lo);
    const int k = sturm_count(diag, off2, e_max);
    std::vector<double> ev(static_cast<std::size_t>(k));
    // progressive bisection: eigenvalue j lies where the count crosses j -> j+1
    std::vector<double> lo_bound(std::size_t(k), lo);
    double hi_common = std::min(hi, e_max);
    for (int j = 0; j < k; ++j) {
        double a = lo_bound[std::size_t(j)], b = hi_common;
        while (b - a > tol) {
            const double m = 0.5 * (a + b);
            const int c = sturm_count(diag, off2, m);
            if (c > j) {
                b = m;
            } else {
                a = m;
                // m has count <= j: it is a lower bound for all later eigenvalues too
                for (int jj = j + 1; jj < k && lo_bound[std::size_t(jj)] < m; ++jj)
                    lo_bound[std::size_t(jj)] = m;
            }
        }
        ev[std::size_t(j)] = 0.5 * (a + b);
        (void)n;
    }
    return ev;
}

// Partial-pivot LU of (T - lambda I) and one solve, for inverse iteration.
// Zero pivots are replaced by a tiny value: near-singularity is the point.
struct TridiagLU {
    std::vector<double> dl, d, du, du2;
    std::vector<unsigned char> swapped;

    TridiagLU(const std::vector<double>& diag, double off, double lambda) {
        const std::size_t n = diag.size();
        d.resize(n);
        dl.assign(n > 1 ? n - 1 : 0, off);
        du.assign(n > 1 ? n - 1 : 0, off);
        du2.assign(n > 2 ? n - 2 : 0, 0.0);
        swapped.assign(n > 1 ? n - 1 : 0, 0);
        for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - lambda;
        double scale = std::abs(off);
        for (double x : d) scale = std::max(scale, std::abs(x));
        // eps-scale floor keeps the deliberately near-singular solve finite
        const double tiny = std::max(scale, 1.0) * 2.220446049250313e-16;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (std::abs(d[i]) >= std::abs(dl[i])) {
                if (std::abs(d[i]) < tiny) d[i] = (d[i] < 0 ? -tiny : tiny);
                const double f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                const double f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                const double t = du[i];
                du[i] = d[i + 1];
                d[i + 1] = t - f * d[i + 1];
                if (i + 2 < n) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                swapped[i] = 1;
            }
        }
        if (std::abs(d[n - 1]) < tiny) d[n - 1] = (d[n - 1] < 0 ? -tiny : tiny);
    }

    void solve(std::vector<double>& b) const {
        const std::size_t n = d.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (swapped[i]) std::swap(b[i], b[i + 1]);
            b[i + 1] -= dl[i] * b[i];
        }
        b[n - 1] /= d[n - 1];
        if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for (std::size_t ii = n; ii >= 3; --ii) {
            const std::size_t i = ii - 3;
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// Deterministic start vector; xorshift64 keeps runs bit-identical everywhere.
inline std::vector<double> seed_vector(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    std::uint64_t s = seed * 0x9E3779B97F4A7C15ull + 0xBF58476D1CE4E5B9ull;
    for (std::size_t i = 0; i < n; ++i) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        v[i] = double(s >> 11) * (1.0 / 9007199254740992.0) - 0.5;
    }
    return v;
}

// Inverse iteration for each eigenvalue, with Gram-Schmidt inside clusters of
// near-degenerate eigenvalues (gap below cluster_tol).
inline std::vector<std::vector<double>> tridiag_eigenvectors(const std::vector<double>& diag,
                                                             double off,
                                                             const std::vector<double>& ev) {
    const std::size_t n = diag.size();
    std::vector<std::vector<double>> vecs;
    vecs.reserve(ev.size());
    double scale = 2.0 * std::abs(off);
    for (double x : diag) scale = std::max(scale, std::abs(x));
    const double cluster_tol = 1e-8 * scale;
    std::size_t cluster_begin = 0;
    for (std::size_t j = 0; j < ev.size(); ++j) {
        if (j > 0 && ev[j] - ev[j - 1] > cluster_tol) cluster_begin = j;
        TridiagLU lu(diag, off, ev[j]);
        std::vector<double> v = seed_vector(n, j + 1);
        for (int pass = 0; pass < 3; ++pass) {
            lu.solve(v);
            for (std::size_t c = cluster_begin; c < j; ++c) {
                const double proj = dot(v, vecs[c]);
                for (std::size_t i = 0; i < n; ++i) v[i] -= proj * vecs[c][i];
            }
            double nrm = std::sqrt(dot(v, v));
            if (!(nrm > 0) || !std::isfinite(nrm)) {
                v = seed_vector(n, (j + 1) * 7919);
                nrm = std::sqrt(dot(v, v));
            }
            for (auto& x : v) x /= nrm;
        }
        // fix sign: largest-magnitude component positive
        std::size_t imax = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
        if (v[imax] < 0)
            for (auto& x : v) x = -x;
        vecs.push_back(std::move(v));
    }
    return vecs;
}

}

// Hard-wall finite-difference diagonalization of p^2 + r sin^2(x+x0) + (s/pi) x.
// Returns localized states only (>= loc_threshold probability within +-pi/2 of
// their well center); the two lowest central-well states form the qubit.
inline StateBasis solve_static(const LatticeParams& params, GridPtr grid,
                               const SolveOptions& opts = {}) {
    const SpectralGrid& g = *grid;
    if (g.n_wells < 3)
        throw std::invalid_argument("solve_static: grid must span >= 3 wells");
    if (params.r < 1.0 || params.r > 60.0)
        throw std::invalid_argument("solve_static: r = " + std::to_string(params.r) +
                                    " outside supported range [1, 60]");

    const std::vector<double> v = potential_static(params, g);
    const double inv_dx2 = 1.0 / (g.dx * g.dx);
    std::vector<double> diag(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) diag[j] = 2.0 * inv_dx2 + v[j];
    const double off = -inv_dx2;

    const double e_max =
        (opts.e_max > 0) ? opts.e_max : params.r + params.s * double(g.half_wells()) + 4.0;
    const auto ev = detail::tridiag_eigenvalues_below(diag, off, e_max);
    const auto vecs = detail::tridiag_eigenvectors(diag, off, ev);

    StateBasis basis;
    basis.grid = grid;
    basis.x0 = registration_shift(params);
    const double inv_sqrt_dx = 1.0 / std::sqrt(g.dx);
    for (std::size_t j = 0; j < ev.size(); ++j) {
        const auto& u = vecs[j];
        // probability-weighted mean position -> nearest well center
        double mean = 0;
        for (std::size_t i = 0; i < g.n_points; ++i) mean += g.x[i] * u[i] * u[i];
        const int well = int(std::lround(mean / std::numbers::pi));
        if (std::abs(well) > g.half_wells()) continue;
        const double wc = double(well) * std::numbers::pi;
        double loc = 0;
        for (std::size_t i = 0; i < g.n_points; ++i)
            if (std::abs(g.x[i] - wc) <= std::numbers::pi / 2.0) loc += u[i] * u[i];
        if (loc < opts.loc_threshold) continue;
        BasisState st;
        st.energy = ev[j];
        st.well_index = well;
        st.intra_well_rank = 0;  // assigned below
        st.loc_fraction = loc;
        st.wf = make_state(grid);
        for (std::size_t i = 0; i < g.n_points; ++i) st.wf.amp[i] = u[i] * inv_sqrt_dx;
        basis.states.push_back(std::move(st));
    }

    // energy-ascending already (ev sorted); assign per-well ranks
    std::vector<int> next_rank(std::size_t(g.n_wells), 0);
    for (auto& st : basis.states)
        st.intra_well_rank = next_rank[std::size_t(st.well_index + g.half_wells())]++;

    std::size_t ground = basis.states.size(), excited = basis.states.size();
    for (std::size_t i = 0; i < basis.states.size(); ++i) {
        if (basis.states[i].well_index != 0) continue;
        if (basis.states[i].intra_well_rank == 0) ground = i;
        if (basis.states[i].intra_well_rank == 1) excited = i;
    }
    if (ground >= basis.states.size() || excited >= basis.states.size()) {
        int n_central = 0;
        for (const auto& st : basis.states)
            if (st.well_index == 0) ++n_central;
        throw std::runtime_error(
            "solve_static: central well holds " + std::to_string(n_central) +
            " localized state(s), need >= 2 (r = " + std::to_string(params.r) +
            ", threshold = " + std::to_string(opts.loc_threshold) +
            "); lattice too shallow or threshold too strict");
    }
    basis.qubit_ground = ground;
    basis.qubit_excited = excited;
    return basis;
}

inline std::complex<double> overlap(const WaveState& psi, std::size_t basis_state_index,
                                    const StateBasis& basis) {
    if (basis_state_index >= basis.states.size())
        throw std::out_of_range("overlap: basis state index " + std::to_string(basis_state_index) +
                                " out of range (size " + std::to_string(basis.states.size()) + ")");
    return inner_product(basis.states[basis_state_index].wf, psi);
}

}
