#include "shearspec/ode.hpp"

#include <algorithm>
#include <cmath>

#include "shearspec/errors.hpp"

namespace shearspec {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

struct Deriv {
    cplx dy, dyp;
};

inline Deriv rhs(const std::function<cplx(cplx)>& coeff, const PathSeg& path, double s,
                 const RayState& st) {
    cplx dz = path.dzeta(s);
    cplx z = path.zeta(s);
    return {dz * st.yp, dz * coeff(z) * st.y};
}

}  // namespace

void integrate_ray(const std::function<cplx(cplx)>& coeff, const PathSeg& path, double s0,
                   double s1, RayState& state, double* logscale, const OdeOptions& opt,
                   const std::vector<double>& samples,
                   const std::function<void(double, const RayState&, double)>& sample) {
    if (s1 <= s0) {
        for (double sv : samples)
            if (sample) sample(sv, state, logscale ? *logscale : 0.0);
        return;
    }
    double ls = logscale ? *logscale : 0.0;
    std::size_t next_sample = 0;
    // emit any samples at or before the start
    while (next_sample < samples.size() && samples[next_sample] <= s0 + 1e-15 * (s1 - s0)) {
        if (sample) sample(samples[next_sample], state, ls);
        ++next_sample;
    }

    double s = s0;
    double span = s1 - s0;
    double h = span * 1e-3;
    double h_max = span * opt.h_max_frac;
    Deriv k1 = rhs(coeff, path, s, state);
    // crude initial step from the local coefficient magnitude
    {
        double w = std::sqrt(std::abs(coeff(path.zeta(s)))) + 1.0;
        h = std::min(h, 0.1 / w);
    }

    while (s < s1 - 1e-15 * span) {
        bool clipped = false;
        double target = s1;
        if (next_sample < samples.size()) target = std::min(target, samples[next_sample]);
        if (s + h >= target) {
            h = target - s;
            clipped = true;
        }
        if (h < opt.h_min)
            throw step_underflow_error("integrate_ray: step size underflow");

        RayState st = state;
        Deriv k2, k3, k4, k5, k6, k7;
        RayState tmp;
        auto axpy = [](RayState& out, const RayState& base, double hh,
                       std::initializer_list<std::pair<double, const Deriv*>> terms) {
            cplx dy = 0.0, dyp = 0.0;
            for (auto& t : terms) {
                dy += t.first * t.second->dy;
                dyp += t.first * t.second->dyp;
            }
            out.y = base.y + hh * dy;
            out.yp = base.yp + hh * dyp;
        };
        axpy(tmp, st, h, {{a21, &k1}});
        k2 = rhs(coeff, path, s + c2 * h, tmp);
        axpy(tmp, st, h, {{a31, &k1}, {a32, &k2}});
        k3 = rhs(coeff, path, s + c3 * h, tmp);
        axpy(tmp, st, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
        k4 = rhs(coeff, path, s + c4 * h, tmp);
        axpy(tmp, st, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
        k5 = rhs(coeff, path, s + c5 * h, tmp);
        axpy(tmp, st, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        k6 = rhs(coeff, path, s + h, tmp);
        RayState y5;
        axpy(y5, st, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        k7 = rhs(coeff, path, s + h, y5);

        cplx err_y = h * (e1 * k1.dy + e3 * k3.dy + e4 * k4.dy + e5 * k5.dy + e6 * k6.dy +
                          e7 * k7.dy);
        cplx err_yp = h * (e1 * k1.dyp + e3 * k3.dyp + e4 * k4.dyp + e5 * k5.dyp +
                           e6 * k6.dyp + e7 * k7.dyp);
        double sc_y = opt.atol + opt.rtol * std::max(std::abs(st.y), std::abs(y5.y));
        double sc_yp = opt.atol + opt.rtol * std::max(std::abs(st.yp), std::abs(y5.yp));
        double err = std::sqrt(0.5 * (sqr(std::abs(err_y) / sc_y) +
                                      sqr(std::abs(err_yp) / sc_yp)));

        if (err <= 1.0) {
            s += h;
            state = y5;
            k1 = k7;  // FSAL
            double mag = std::max(std::abs(state.y), std::abs(state.yp));
            if (mag > 1e120) {
                state.y /= mag;
                state.yp /= mag;
                k1.dy /= mag;
                k1.dyp /= mag;
                ls += std::log(mag);
            }
            if (clipped && next_sample < samples.size() &&
                s >= samples[next_sample] - 1e-15 * span) {
                if (sample) sample(samples[next_sample], state, ls);
                ++next_sample;
            }
            double fac = (err > 1e-30) ? 0.9 * std::pow(err, -0.2) : 5.0;
            h = h * std::clamp(fac, 0.2, 5.0);
            h = std::min(h, h_max);
        } else {
            double fac = 0.9 * std::pow(err, -0.2);
            h = h * std::clamp(fac, 0.1, 0.9);
        }
    }
    while (next_sample < samples.size()) {  // samples exactly at the end
        if (sample) sample(samples[next_sample], state, ls);
        ++next_sample;
    }
    if (logscale) *logscale = ls;
}

}  // namespace shearspec
