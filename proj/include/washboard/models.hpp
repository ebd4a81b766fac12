#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace washboard {

// Idealized coherent two-path interference of the leakage amplitudes.
struct TwoPathInputs {
    double p_pm;  // leakage with PM alone, [0, 1]
    double p_am;  // leakage with AM alone, [0, 1]

    TwoPathInputs(double p_pm_, double p_am_) : p_pm(p_pm_), p_am(p_am_) {
        if (!(p_pm >= 0 && p_pm <= 1))
            throw std::invalid_argument("TwoPathInputs: p_pm outside [0, 1]");
        if (!(p_am >= 0 && p_am <= 1))
            throw std::invalid_argument("TwoPathInputs: p_am outside [0, 1]");
    }
};

// P_max,min = P_PM + P_AM +- 2 sqrt(P_PM P_AM) = (sqrt(P_PM) +- sqrt(P_AM))^2.
inline std::pair<double, double> two_path_extrema(const TwoPathInputs& in) {
    const double cross = 2.0 * std::sqrt(in.p_pm * in.p_am);
    return {in.p_pm + in.p_am + cross, in.p_pm + in.p_am - cross};
}

inline double visibility(double p_max, double p_min) {
    if (!(p_max > 0))
        throw std::invalid_argument("visibility: p_max must be > 0");
    if (!(p_max >= p_min && p_min >= 0))
        throw std::invalid_argument("visibility: need p_max >= p_min >= 0");
    return (p_max - p_min) / (p_max + p_min);
}

// Visibility of the 2-path model vs log2(P_PM/P_AM): 2 sqrt(rho)/(1+rho),
// maximal (=1) at equal leakage, symmetric under ratio inversion.
inline double two_path_visibility_curve(double log2_ratio) {
    const double rho = std::exp2(log2_ratio);
    return 2.0 * std::sqrt(rho) / (1.0 + rho);
}

// offset + amplitude * cos(2 pi f tau + phase) with f held fixed.
struct FringeFit {
    double amplitude = 0;
    double offset = 0;
    double phase = 0;        // rad, in (-pi, pi]
    double fixed_freq = 0;   // Hz
    double residual_rms = 0;
    bool offset_covers_amplitude = true;  // offset >= amplitude; flagged, not rejected

    double eval(double tau) const {
        return offset + amplitude * std::cos(2.0 * std::numbers::pi * fixed_freq * tau + phase);
    }
    double p_max() const { return offset + amplitude; }
    double p_min() const { return offset - amplitude; }
    // smallest tau >= 0 where the fit attains its minimum
    double minimum_tau() const {
        const double two_pi = 2.0 * std::numbers::pi;
        double t = (std::numbers::pi - phase) / (two_pi * fixed_freq);
        const double period = 1.0 / fixed_freq;
        t = std::fmod(t, period);
        if (t < 0) t += period;
        return t;
    }
};

namespace detail {

// 3x3 Gaussian elimination with partial pivoting; m is row-major, rhs in b.
inline void solve3(double m[3][3], double b[3], double pivot_floor) {
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int best = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(m[perm[row]][col]) > std::abs(m[perm[best]][col])) best = row;
        std::swap(perm[col], perm[best]);
        const double piv = m[perm[col]][col];
        if (std::abs(piv) < pivot_floor)
            throw std::invalid_argument(
                "fit_fringe: rank-deficient design (all delta_tau equal or degenerate sampling)");
        for (int row = col + 1; row < 3; ++row) {
            const double f = m[perm[row]][col] / piv;
            for (int k = col; k < 3; ++k) m[perm[row]][k] -= f * m[perm[col]][k];
            b[perm[row]] -= f * b[perm[col]];
        }
    }
    double out[3];
    for (int col = 2; col >= 0; --col) {
        double acc = b[perm[col]];
        for (int k = col + 1; k < 3; ++k) acc -= m[perm[col]][k] * out[k];
        out[col] = acc / m[perm[col]][col];
    }
    b[0] = out[0];
    b[1] = out[1];
    b[2] = out[2];
}

}

// Linear least squares for p(tau) = offset + a cos(xi) + b sin(xi),
// xi = 2 pi f tau, solved by the normal equations; no iterative optimizer.
inline FringeFit fit_fringe(const std::vector<std::pair<double, double>>& samples,
                            double fixed_freq_hz) {
    if (samples.size() < 4)
        throw std::invalid_argument("fit_fringe: need >= 4 samples, got " +
                                    std::to_string(samples.size()));
    if (!(fixed_freq_hz > 0))
        throw std::invalid_argument("fit_fringe: fixed frequency must be > 0");
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double rhs[3] = {0, 0, 0};
    for (const auto& [tau, p] : samples) {
        const double xi = 2.0 * std::numbers::pi * fixed_freq_hz * tau;
        const double base[3] = {1.0, std::cos(xi), std::sin(xi)};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) m[i][j] += base[i] * base[j];
            rhs[i] += base[i] * p;
        }
    }
    detail::solve3(m, rhs, 1e-9 * double(samples.size()));

    FringeFit fit;
    fit.fixed_freq = fixed_freq_hz;
    fit.offset = rhs[0];
    fit.amplitude = std::hypot(rhs[1], rhs[2]);
    fit.phase = std::atan2(-rhs[2], rhs[1]);
    double ss = 0;
    for (const auto& [tau, p] : samples) {
        const double d = p - fit.eval(tau);
        ss += d * d;
    }
    fit.residual_rms = std::sqrt(ss / double(samples.size()));
    fit.offset_covers_amplitude = fit.offset >= fit.amplitude;
    return fit;
}

}
