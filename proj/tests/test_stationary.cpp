#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "washboard/grid.hpp"
#include "washboard/lattice.hpp"
#include "washboard/stationary.hpp"
#include "oracles.hpp"

using namespace washboard;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LatticeParams params_at(double r, double s = 2.86) {
    auto d = default_lattice();
    return LatticeParams(r, s, d.omega_r, d.a, d.mass);
}

}  // namespace

TEST_CASE("registration shift places all well minima on multiples of pi", "[stationary]") {
    auto p = params_at(19.0);
    const double x0 = registration_shift(p);
    CHECK(x0 < 0.0);
    // dV/dx at x = m*pi is r*sin(2*x0) + s/pi, zero by construction
    CHECK_THAT(p.r * std::sin(2.0 * x0) + p.s / std::numbers::pi, WithinAbs(0.0, 1e-12));
    CHECK(registration_shift(params_at(19.0, 0.0)) == 0.0);
    // tilt beyond the lattice force: no minima anywhere
    CHECK_THROWS_AS(registration_shift(params_at(1.0, 3.2)), std::invalid_argument);
    CHECK_THROWS_WITH(registration_shift(params_at(1.0, 3.2)), ContainsSubstring("3.2"));
}

TEST_CASE("qubit splitting at the reference depth", "[stationary]") {
    auto basis = solve_static(params_at(19.0), make_grid(17, 64));
    CHECK_THAT(basis.splitting(), WithinAbs(7.3, 0.4));
    const auto& g = basis.states[basis.qubit_ground];
    const auto& e = basis.states[basis.qubit_excited];
    CHECK(g.well_index == 0);
    CHECK(e.well_index == 0);
    CHECK(g.intra_well_rank == 0);
    CHECK(e.intra_well_rank == 1);
    CHECK(e.energy > g.energy);
    for (const auto& st : basis.states) {
        CHECK(st.loc_fraction >= 0.85);
        CHECK(st.loc_fraction <= 1.0 + 1e-12);
    }
}

TEST_CASE("splitting approaches the harmonic value 2 sqrt(r) at weak tilt", "[stationary]") {
    // s = 0 exactly has no localized Wannier-Stark states (tested below), so
    // the harmonic limit is probed at the smallest tilt that still localizes.
    auto basis = solve_static(params_at(19.0, 0.5), make_grid(17, 64));
    const double harmonic = 2.0 * std::sqrt(19.0);
    CHECK(basis.splitting() / harmonic > 0.85);  // anharmonicity lowers it
    CHECK(basis.splitting() / harmonic < 1.15);
}

TEST_CASE("zero tilt leaves no localized states to build a qubit from", "[stationary]") {
    CHECK_THROWS_AS(solve_static(params_at(19.0, 0.0), make_grid(17, 64)), std::runtime_error);
    CHECK_THROWS_WITH(solve_static(params_at(19.0, 0.0), make_grid(17, 64)),
                      ContainsSubstring("central well"));
}

TEST_CASE("ground-state energies step by s from well to well", "[stationary]") {
    auto basis = solve_static(params_at(19.0), make_grid(17, 64));
    const int half = 8;
    std::vector<double> e0(2 * half + 1, std::numeric_limits<double>::quiet_NaN());
    for (const auto& st : basis.states)
        if (st.intra_well_rank == 0) e0[std::size_t(st.well_index + half)] = st.energy;
    // interior wells only; the outermost pair feels the hard wall
    for (int w = -half + 1; w < half - 1; ++w) {
        const double diff = e0[std::size_t(w + 1 + half)] - e0[std::size_t(w + half)];
        INFO("well " << w << " -> " << w + 1);
        CHECK_THAT(diff, WithinRel(2.86, 0.05));
    }
}

TEST_CASE("splitting grows monotonically with depth", "[stationary]") {
    // r near 16 is skipped: there the excited level crosses a neighbor-well
    // resonance and hybridizes, which defeats the well classification.
    auto grid = make_grid(17, 64);
    double prev = 0.0;
    for (double r : {12.0, 14.0, 16.5, 19.0, 22.0, 26.0, 30.0}) {
        auto basis = solve_static(params_at(r), grid);
        INFO("r = " << r);
        CHECK(basis.splitting() > prev);
        prev = basis.splitting();
    }
}

TEST_CASE("basis states are orthonormal and satisfy the discrete eigenproblem", "[stationary]") {
    auto grid = make_grid(17, 64);
    auto p = params_at(19.0);
    auto basis = solve_static(p, grid);
    REQUIRE(basis.states.size() >= 2);

    for (std::size_t i = 0; i < basis.states.size(); ++i) {
        for (std::size_t j = i; j < basis.states.size(); ++j) {
            const auto ip = inner_product(basis.states[i].wf, basis.states[j].wf);
            const double want = (i == j) ? 1.0 : 0.0;
            CHECK_THAT(std::abs(ip), WithinAbs(want, 1e-8));
        }
    }

    // residual of the same finite-difference operator the solver used
    const auto v = potential_static(p, *grid);
    const double inv_dx2 = 1.0 / (grid->dx * grid->dx);
    for (const auto& st : basis.states) {
        const auto& a = st.wf.amp;
        double acc = 0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            std::complex<double> h = (2.0 * inv_dx2 + v[j]) * a[j];
            if (j > 0) h -= inv_dx2 * a[j - 1];
            if (j + 1 < a.size()) h -= inv_dx2 * a[j + 1];
            acc += std::norm(h - st.energy * a[j]);
        }
        CHECK(std::sqrt(acc * grid->dx) < 1e-6);  // relative to unit-norm wf
    }
}

TEST_CASE("projection amplitudes behave like an orthonormal expansion", "[stationary]") {
    auto grid = make_grid(17, 64);
    auto basis = solve_static(params_at(19.0), grid);
    const auto& g = basis.states[basis.qubit_ground].wf;
    const auto& e = basis.states[basis.qubit_excited].wf;

    CHECK_THAT(std::abs(overlap(g, basis.qubit_ground, basis)), WithinAbs(1.0, 1e-9));
    CHECK_THAT(std::abs(overlap(g, basis.qubit_excited, basis)), WithinAbs(0.0, 1e-8));

    WaveState mix = make_state(grid);
    for (std::size_t j = 0; j < mix.amp.size(); ++j)
        mix.amp[j] = (g.amp[j] + e.amp[j]) / std::sqrt(2.0);
    normalize(mix);
    CHECK_THAT(std::abs(overlap(mix, basis.qubit_ground, basis)),
               WithinAbs(1.0 / std::sqrt(2.0), 1e-8));
    CHECK_THAT(std::abs(overlap(mix, basis.qubit_excited, basis)),
               WithinAbs(1.0 / std::sqrt(2.0), 1e-8));
    CHECK_THROWS_AS(overlap(g, basis.states.size(), basis), std::out_of_range);
}

TEST_CASE("solver rejects unusable inputs", "[stationary]") {
    CHECK_THROWS_AS(solve_static(params_at(0.5), make_grid(5, 64)), std::invalid_argument);
    CHECK_THROWS_AS(solve_static(params_at(65.0), make_grid(5, 64)), std::invalid_argument);
}

TEST_CASE("eigenvalue ceiling trims the basis", "[stationary]") {
    auto grid = make_grid(17, 64);
    auto all = solve_static(params_at(19.0), grid);
    SolveOptions opts;
    opts.e_max = 13.0;  // keeps both qubit levels, drops everything above
    auto trimmed = solve_static(params_at(19.0), grid, opts);
    CHECK(trimmed.states.size() < all.states.size());
    CHECK_THAT(trimmed.splitting(), WithinAbs(all.splitting(), 1e-8));
    for (const auto& st : trimmed.states) CHECK(st.energy < 13.0);
}

TEST_CASE("central-well levels agree with an independent Numerov solver", "[stationary]") {
    // Same boundary-value problem, different discretization (4th-order
    // shooting on half the resolution) and different eigenvalue search
    // (node-count bisection vs Sturm sequences).
    auto grid = make_grid(3, 300);  // 900 -> 1024 points
    auto p = params_at(19.0);
    SolveOptions opts;
    opts.loc_threshold = 0.0;  // keep every level below the ceiling
    auto basis = solve_static(p, grid, opts);

    const double x0 = registration_shift(p);
    auto v_cont = [&](double x) {
        const double sn = std::sin(x + x0);
        return p.r * sn * sn + (p.s / std::numbers::pi) * x;
    };
    const double e_max = p.r + p.s * double(grid->half_wells()) + 4.0;
    const double wall_lo = grid->x[0] - grid->dx;
    const double wall_hi = grid->x[grid->n_points - 1] + grid->dx;
    auto ladder = oracle::numerov_eigenvalues(v_cont, wall_lo, wall_hi, 512, e_max);
    REQUIRE(ladder.size() >= 3);

    int checked = 0;
    for (const auto& st : basis.states) {
        if (st.well_index != 0 || checked >= 3) continue;
        double best = 1e9;
        for (double e : ladder) best = std::min(best, std::abs(e - st.energy));
        INFO("central level rank " << st.intra_well_rank << " energy " << st.energy);
        CHECK(best < 1e-3);
        ++checked;
    }
    CHECK(checked >= 2);
}
