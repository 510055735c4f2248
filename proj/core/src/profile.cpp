#include "shearspec/profile.hpp"

#include <cmath>
#include <limits>

#include "shearspec/errors.hpp"

namespace shearspec {

namespace {
constexpr int kGridN = 4097;        // validation grid density
constexpr double kInvertTolRel = 1e-13;
}  // namespace

ShearProfile ShearProfile::parse(const std::string& text, double h) {
    if (!(h > 0.0)) throw parse_error("depth h must be positive");
    ShearProfile p;
    p.text_ = text;
    p.h_ = h;
    p.expr_ = ProfileExpr::parse(text);
    p.d1_ = p.expr_.derivative();
    p.d2_ = p.d1_.derivative();
    p.d3_ = p.d2_.derivative();
    p.d4_ = p.d3_.derivative();
    p.validate_and_finalize();
    return p;
}

void ShearProfile::validate_and_finalize() {
    // Pass 1: core interval [-h, 0].
    double m_int = std::numeric_limits<double>::infinity();
    double sup_upp = 0.0;
    {
        auto grid = linspace(-h_, 0.0, kGridN);
        for (double x : grid) {
            double du = up(x);
            if (!std::isfinite(du))
                throw not_smooth_error("U' not finite at x2=" + std::to_string(x));
            if (du <= 0.0)
                throw not_monotone_error("U' <= 0 at x2=" + std::to_string(x), x);
            m_int = std::min(m_int, du);
            double d2 = upp(x);
            if (!std::isfinite(d2))
                throw not_smooth_error("U'' not finite at x2=" + std::to_string(x));
            sup_upp = std::max(sup_upp, std::abs(d2));
        }
    }
    m_int_ = m_int;
    sup_upp_ = sup_upp;

    // Extension margin; shrink until the extension bounds hold.
    double h0 = (sup_upp > 1e-300) ? std::min(h_ / 2.0, m_int / (4.0 * sup_upp)) : h_ / 2.0;
    const double h0_floor = h_ / 64.0;
    for (;;) {
        bool ok = true;
        double m_ext = std::numeric_limits<double>::infinity();
        auto grid = linspace(-h_ - h0, h0, kGridN);
        double sup_d[5] = {0, 0, 0, 0, 0};
        for (double x : grid) {
            double vals[5] = {u(x), up(x), upp(x), uppp(x), upppp(x)};
            for (int j = 0; j < 5; ++j) {
                if (!std::isfinite(vals[j])) {
                    ok = false;
                    break;
                }
                sup_d[j] = std::max(sup_d[j], std::abs(vals[j]));
            }
            if (!ok) break;
            if (vals[1] < m_int / 2.0) ok = false;
            m_ext = std::min(m_ext, vals[1]);
        }
        if (ok) {
            // extension may not inflate derivative sups beyond a factor 2
            double core_sup[5] = {0, 0, 0, 0, 0};
            auto cg = linspace(-h_, 0.0, kGridN);
            for (double x : cg) {
                core_sup[1] = std::max(core_sup[1], std::abs(up(x)));
                core_sup[2] = std::max(core_sup[2], std::abs(upp(x)));
                core_sup[3] = std::max(core_sup[3], std::abs(uppp(x)));
                core_sup[4] = std::max(core_sup[4], std::abs(upppp(x)));
            }
            for (int j = 1; j <= 4; ++j)
                if (sup_d[j] > 2.0 * core_sup[j] + 1e-300) ok = false;
        }
        if (ok) {
            m_ext_ = m_ext;
            break;
        }
        h0 *= 0.5;
        if (h0 < h0_floor)
            throw not_smooth_error("profile cannot be extended smoothly beyond [-h, 0]");
    }
    h0_ = h0;
    umin_ = u(-h_);
    umax_ = u(0.0);
    uext_min_ = u(-h_ - h0_);
    uext_max_ = u(h0_);
    rho0_ = 4.0 / (h0_ * m_ext_);

    // Inflection points: sign changes of U'' in the open core interval,
    // refined by bisection; non-sign-changing near-zeros are reported apart.
    const double tol_inflect = 1e-10 * std::max(sup_upp_, 1e-300);
    auto grid = linspace(-h_, 0.0, kGridN);
    std::vector<double> uppv(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) uppv[i] = upp(grid[i]);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        double a = grid[i], b = grid[i + 1];
        double fa = uppv[i], fb = uppv[i + 1];
        if (fa == 0.0 && i > 0) continue;  // handled as the endpoint of the previous cell
        bool change = (fa < 0 && fb > 0) || (fa > 0 && fb < 0) || (fa == 0.0) || (fb == 0.0 && i + 2 == grid.size());
        if (!change) continue;
        // bisection to |b - a| < 1e-12
        double lo = a, hi = b, flo = fa;
        if (fa == 0.0) {
            lo = hi = a;
        } else if (fb == 0.0) {
            lo = hi = b;
        } else {
            while (hi - lo > 1e-12) {
                double mid = 0.5 * (lo + hi);
                double fm = upp(mid);
                if ((flo < 0) == (fm < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
        }
        double x0 = 0.5 * (lo + hi);
        if (x0 <= -h_ + 1e-12 || x0 >= -1e-12) continue;  // interior only
        if (std::abs(upp(x0)) >= tol_inflect) continue;
        // true sign change across the refined root?
        double wl = std::max(1e-9, 4.0 * (hi - lo));
        double s1 = upp(x0 - wl), s2 = upp(x0 + wl);
        if (s1 * s2 < 0.0) {
            InflectionPoint ip;
            ip.x20 = x0;
            ip.c0 = u(x0);
            ip.uppp = uppp(x0);
            ip.uppp_sign = (std::abs(ip.uppp) <= tol_inflect) ? 0 : (ip.uppp > 0 ? 1 : -1);
            // dedupe
            bool dup = false;
            for (const auto& q : inflections_)
                if (std::abs(q.x20 - x0) < 1e-9) dup = true;
            if (!dup) inflections_.push_back(ip);
        } else {
            bool dup = false;
            for (double q : degenerate_upp_zeros_)
                if (std::abs(q - x0) < 1e-9) dup = true;
            if (!dup) degenerate_upp_zeros_.push_back(x0);
        }
    }
}

double ShearProfile::invert(double c) const {
    double lo = -h_ - h0_, hi = h0_;
    double span = umax_ - umin_;
    if (c < uext_min_ - kInvertTolRel * span || c > uext_max_ + kInvertTolRel * span)
        throw out_of_range_error("invert: c outside the range of the extended profile");
    double c_cl = std::clamp(c, uext_min_, uext_max_);
    double x = std::clamp(-h_ + (c_cl - umin_) / std::max(m_int_, 1e-300), lo, hi);
    for (int it = 0; it < 200; ++it) {
        double f = u(x) - c_cl;
        if (std::abs(f) < kInvertTolRel * span) return x;
        if (f > 0) hi = x;
        else lo = x;
        double step = f / up(x);
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection safeguard
        if (xn == x) break;
        x = xn;
    }
    if (std::abs(u(x) - c_cl) >= kInvertTolRel * span)
        throw numeric_error("invert: Newton failed to reach tolerance");
    return x;
}

Interval3Split ShearProfile::split_intervals(double k, cplx c) const {
    Interval3Split out;
    out.mu = mu_of_k(k);
    out.rho0 = rho0_;
    double thr = std::pow(out.mu, 1.5) / rho0_;
    double ci = c.imag();
    if (std::abs(ci) >= thr) return out;  // middle zone empty
    double w = std::sqrt(thr * thr - ci * ci);
    double lo_c = c.real() - w, hi_c = c.real() + w;
    if (hi_c <= umin_ || lo_c >= umax_) return out;
    double xl = (lo_c <= umin_) ? -h_ : invert(lo_c);
    double xr = (hi_c >= umax_) ? 0.0 : invert(hi_c);
    if (xr <= xl) return out;
    out.has_middle = true;
    out.x2l = xl;
    out.x2r = xr;
    return out;
}

}  // namespace shearspec
