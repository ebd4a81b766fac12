#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "washboard/fft.hpp"

namespace washboard {

// Position grid spanning an odd number of lattice wells (period pi in x units),
// cell-centered so the domain is symmetric about x = 0 with no point on the
// boundary. k follows DFT ordering: j < n/2 positive, then negative.
struct SpectralGrid {
    std::size_t n_points = 0;
    int n_wells = 0;
    double x_min = 0, x_max = 0, dx = 0;
    std::vector<double> x;
    std::vector<double> k;
    std::shared_ptr<const Fft> fft;

    int half_wells() const { return (n_wells - 1) / 2; }
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

namespace detail {

inline std::size_t next_pow2(std::size_t v) {
    std::size_t p = 1;
    while (p < v) p *= 2;
    return p;
}

}

// auto_round=true (default) rounds the total point count up to the next power
// of two, as needed for any odd n_wells > 1; auto_round=false rejects
// non-power-of-two totals and names the nearest valid count.
inline GridPtr make_grid(int n_wells, int points_per_well, bool auto_round = true) {
    if (n_wells < 3 || n_wells % 2 == 0)
        throw std::invalid_argument("make_grid: n_wells must be odd and >= 3, got " +
                                    std::to_string(n_wells));
    if (points_per_well < 16)
        throw std::invalid_argument("make_grid: points_per_well must be >= 16, got " +
                                    std::to_string(points_per_well));
    const std::size_t requested = std::size_t(n_wells) * std::size_t(points_per_well);
    const std::size_t total = detail::next_pow2(requested);
    if (!auto_round && total != requested)
        throw std::invalid_argument(
            "make_grid: " + std::to_string(n_wells) + "*" + std::to_string(points_per_well) +
            " = " + std::to_string(requested) + " points is not a power of two; nearest valid total is " +
            std::to_string(total) + " (use auto_round or pass a power-of-two total)");

    auto g = std::make_shared<SpectralGrid>();
    g->n_points = total;
    g->n_wells = n_wells;
    const double half_span = double(n_wells) * std::numbers::pi / 2.0;
    g->x_min = -half_span;
    g->x_max = half_span;
    g->dx = double(n_wells) * std::numbers::pi / double(total);
    g->x.resize(total);
    for (std::size_t j = 0; j < total; ++j)
        g->x[j] = g->x_min + (double(j) + 0.5) * g->dx;
    g->k.resize(total);
    const double dk = 2.0 * std::numbers::pi / (double(total) * g->dx);
    for (std::size_t j = 0; j < total; ++j) {
        const auto sj = (j < total / 2) ? double(j) : double(j) - double(total);
        g->k[j] = sj * dk;
    }
    g->fft = std::make_shared<Fft>(total);
    return g;
}

// Wavefunction samples on a grid. momentum_rep distinguishes the position
// representation (quadrature weight dx) from its Fourier conjugate
// (weight dk = 2*pi/(n*dx)); norms agree across the pair (Parseval).
struct WaveState {
    std::vector<std::complex<double>> amp;
    GridPtr grid;
    bool momentum_rep = false;

    double weight() const {
        return momentum_rep ? 2.0 * std::numbers::pi / (double(grid->n_points) * grid->dx)
                            : grid->dx;
    }
};

inline WaveState make_state(GridPtr grid) {
    WaveState s;
    s.grid = std::move(grid);
    s.amp.assign(s.grid->n_points, {0.0, 0.0});
    return s;
}

inline double norm_squared(const WaveState& s) {
    double acc = 0;
    for (const auto& v : s.amp) acc += std::norm(v);
    return acc * s.weight();
}

inline double norm(const WaveState& s) { return std::sqrt(norm_squared(s)); }

inline bool is_normalized(const WaveState& s) {
    const double n2 = norm_squared(s);
    return n2 >= 1.0 - 1e-9 && n2 <= 1.0 + 1e-9;
}

inline void normalize(WaveState& s) {
    const double n = norm(s);
    if (n <= 0 || !std::isfinite(n))
        throw std::runtime_error("normalize: state has non-finite or zero norm");
    for (auto& v : s.amp) v /= n;
}

// <a|b> with the representation's quadrature weight; both states must share
// grid and representation.
inline std::complex<double> inner_product(const WaveState& a, const WaveState& b) {
    if (a.grid.get() != b.grid.get() || a.momentum_rep != b.momentum_rep)
        throw std::invalid_argument("inner_product: grid or representation mismatch");
    std::complex<double> acc = 0;
    for (std::size_t j = 0; j < a.amp.size(); ++j)
        acc += std::conj(a.amp[j]) * b.amp[j];
    return acc * a.weight();
}

// psi~(k_m) = dx/sqrt(2 pi) * sum_j psi(x_j) exp(-i k_m x_j); unitary with the
// paired quadrature weights, exactly invertible by to_position.
inline WaveState to_momentum(const WaveState& psi) {
    if (psi.momentum_rep)
        throw std::invalid_argument("to_momentum: state is already in momentum representation");
    if (psi.amp.size() != psi.grid->n_points)
        throw std::invalid_argument("to_momentum: amplitude length does not match grid");
    const auto& g = *psi.grid;
    WaveState out = psi;
    out.momentum_rep = true;
    g.fft->forward(out.amp);
    const double scale = g.dx / std::sqrt(2.0 * std::numbers::pi);
    const double x0 = g.x[0];
    for (std::size_t j = 0; j < out.amp.size(); ++j) {
        const double ang = -g.k[j] * x0;
        out.amp[j] *= scale * std::complex<double>{std::cos(ang), std::sin(ang)};
    }
    return out;
}

inline WaveState to_position(const WaveState& phi) {
    if (!phi.momentum_rep)
        throw std::invalid_argument("to_position: state is already in position representation");
    if (phi.amp.size() != phi.grid->n_points)
        throw std::invalid_argument("to_position: amplitude length does not match grid");
    const auto& g = *phi.grid;
    WaveState out = phi;
    out.momentum_rep = false;
    const double scale = std::sqrt(2.0 * std::numbers::pi) / g.dx;
    const double x0 = g.x[0];
    for (std::size_t j = 0; j < out.amp.size(); ++j) {
        const double ang = g.k[j] * x0;
        out.amp[j] *= scale * std::complex<double>{std::cos(ang), std::sin(ang)};
    }
    g.fft->inverse(out.amp);
    return out;
}

}
