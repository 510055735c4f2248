#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace shearspec {

using cplx = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;

inline double sqr(double x) { return x * x; }
inline cplx sqr(cplx x) { return x * x; }

/// mu = (1+k^2)^{-1/2}, the wave-number scale used throughout.
inline double mu_of_k(double k) { return 1.0 / std::sqrt(1.0 + k * k); }

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    v.front() = a;
    v.back() = b;
    return v;
}

/// log(sinh x) for x >= 0 without overflow.
inline double log_sinh(double x) {
    if (x < 1e-30) return std::log(x <= 0 ? std::numeric_limits<double>::min() : x);
    if (x < 20.0) return std::log(std::sinh(x));
    return x - std::log(2.0) + std::log1p(-std::exp(-2.0 * x));
}

/// Distance from a complex point to the real segment [lo, hi].
inline double dist_to_segment(cplx c, double lo, double hi) {
    double dr = 0.0;
    if (c.real() < lo) dr = lo - c.real();
    else if (c.real() > hi) dr = c.real() - hi;
    return std::hypot(dr, c.imag());
}

}  // namespace shearspec
