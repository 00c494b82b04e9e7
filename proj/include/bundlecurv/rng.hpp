#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace bundlecurv {

/// Deterministic 64-bit generator (splitmix64). We roll our own instead of
/// using <random> distributions so that byte-identical reports do not depend
/// on the standard-library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::complex<double> complex_in_box(double re_lo, double re_hi, double im_lo, double im_hi) {
        const double re = uniform(re_lo, re_hi);
        const double im = uniform(im_lo, im_hi);
        return {re, im};
    }

    /// Centered square box [-w, w] x [-w, w].
    std::complex<double> complex_in_box(double w) { return complex_in_box(-w, w, -w, w); }

    /// Complex vector uniform on the unit sphere of C^n (Gaussian + normalize).
    std::vector<std::complex<double>> unit_vector(int n) {
        std::vector<std::complex<double>> v(static_cast<std::size_t>(n));
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (auto& x : v) {
                x = {gaussian(), gaussian()};
                norm2 += std::norm(x);
            }
        } while (norm2 < 1e-12);
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& x : v) x *= inv;
        return v;
    }

    /// Standard normal via Box-Muller (deterministic given the stream).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace bundlecurv
