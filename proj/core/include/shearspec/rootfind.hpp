#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "shearspec/errors.hpp"
#include "shearspec/util.hpp"

namespace shearspec {

/// Brent-style bracketed root finding: f(a) and f(b) must have opposite signs.
template <typename F>
double brent(F&& f, double a, double b, double xtol = 1e-14, double ftol = 0.0,
             int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw numeric_error("brent: root not bracketed");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * xtol;
        double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= ftol) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                double r = fb / fc;
                double t = fa / fc;
                p = s * (2.0 * xm * t * (t - r) - (b - a) * (r - 1.0));
                q = (t - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

/// Expands [a, b] to the right by doubling until f changes sign; returns the
/// bracketing pair. Throws if no sign change up to b_max.
template <typename F>
std::pair<double, double> bracket_right(F&& f, double a, double b, double b_max) {
    double fa = f(a);
    double x = b;
    double prev = a, fprev = fa;
    while (x <= b_max * (1 + 1e-12)) {
        double fx = f(x);
        if ((fa > 0) != (fx > 0)) return {prev, x};
        prev = x;
        fprev = fx;
        x *= 2.0;
    }
    (void)fprev;
    throw numeric_error("bracket_right: no sign change found");
}

/// Golden-section maximization on [a, b].
template <typename F>
double golden_max(F&& f, double a, double b, double xtol = 1e-10, int max_iter = 200) {
    const double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

/// Newton iteration on a holomorphic map with finite-difference derivative.
/// Returns the refined root; iters_out reports the steps actually used.
template <typename F>
cplx newton_complex(F&& f, cplx c0, double f_tol, int max_iter, double fd_step,
                    int* iters_out = nullptr, bool* converged = nullptr) {
    cplx c = c0;
    bool ok = false;
    int used = max_iter;
    for (int it = 0; it < max_iter; ++it) {
        cplx fc = f(c);
        if (std::abs(fc) < f_tol) {
            ok = true;
            used = it;
            break;
        }
        double dstep = fd_step * std::max(1.0, std::abs(c));
        cplx df = (f(c + dstep) - f(c - dstep)) / (2.0 * dstep);
        if (std::abs(df) < 1e-300) break;
        cplx step = fc / df;
        c -= step;
        if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(c))) {
            ok = std::abs(f(c)) < 10 * f_tol;
            used = it + 1;
            break;
        }
    }
    if (converged) *converged = ok;
    if (iters_out) *iters_out = used;
    return c;
}

}  // namespace shearspec
