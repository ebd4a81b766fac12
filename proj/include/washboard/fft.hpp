#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace washboard {

// Radix-2 decimation-in-time DFT on power-of-two sizes.
// forward applies no scale, inverse scales by 1/n, so inverse(forward(x)) == x
// and the pair is unitary up to rounding.
class Fft {
public:
    using cvec = std::vector<std::complex<double>>;

    explicit Fft(std::size_t n) : n_(n) {
        if (n < 2 || (n & (n - 1)) != 0)
            throw std::invalid_argument("Fft: size " + std::to_string(n) +
                                        " is not a power of two >= 2");
        rev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            rev_[i] = r;
        }
        // twiddles for stage with half-length h live at tw_[h-1 .. 2h-2]
        tw_.resize(n - 1);
        for (std::size_t h = 1; h < n; h *= 2) {
            for (std::size_t j = 0; j < h; ++j) {
                double ang = -std::numbers::pi * double(j) / double(h);
                tw_[h - 1 + j] = {std::cos(ang), std::sin(ang)};
            }
        }
    }

    std::size_t size() const { return n_; }

    void forward(cvec& a) const { transform(a, false); }

    void inverse(cvec& a) const {
        transform(a, true);
        const double inv_n = 1.0 / double(n_);
        for (auto& v : a) v *= inv_n;
    }

private:
    void transform(cvec& a, bool conj_tw) const {
        if (a.size() != n_)
            throw std::invalid_argument("Fft: input length " + std::to_string(a.size()) +
                                        " does not match transform size " + std::to_string(n_));
        for (std::size_t i = 0; i < n_; ++i)
            if (rev_[i] > i) std::swap(a[i], a[rev_[i]]);
        for (std::size_t h = 1; h < n_; h *= 2) {
            const std::complex<double>* w = &tw_[h - 1];
            for (std::size_t start = 0; start < n_; start += 2 * h) {
                for (std::size_t j = 0; j < h; ++j) {
                    std::complex<double> tw = conj_tw ? std::conj(w[j]) : w[j];
                    std::complex<double> u = a[start + j];
                    std::complex<double> t = tw * a[start + j + h];
                    a[start + j] = u + t;
                    a[start + j + h] = u - t;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::size_t> rev_;
    cvec tw_;
};

}
