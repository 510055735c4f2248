#include "shearspec/dispersion.hpp"

#include <cmath>

#include "shearspec/errors.hpp"
#include "shearspec/winding.hpp"

namespace shearspec {

namespace {

std::vector<double> surface_grid(const ShearProfile& p) { return {-p.h(), 0.0}; }

bool y0_is_tiny(const ShearProfile& p, double k, const RaySolution& sol) {
    // |y(0)| < 1e-8 * mu * sinh(h/mu), evaluated in logs
    const double mu = mu_of_k(k);
    double thr = std::log(1e-8) + std::log(mu) + log_sinh(p.h() / mu);
    double v = std::log(std::abs(sol.y_top()) + 1e-300) + sol.logscale_top();
    return v < thr;
}

}  // namespace

DispersionSample eval_F(const ShearProfile& p, double g, double sigma, double k, cplx c,
                        const SolverOptions& opt) {
    DispersionSample s;
    s.k = k;
    s.c = c;
    s.g = g;
    s.sigma = sigma;
    const double u0 = p.u_max();
    const double up0 = p.up(0.0);
    const double span = p.range();

    if (c.imag() == 0.0 && std::abs(c.real() - u0) <= 1e-14 * std::max(1.0, std::abs(u0))) {
        // exact top endpoint: F(k, U(0)) = -g as the boundary limit
        s.valid = SampleValidity::kAtU0;
        s.yp_singular = true;
        const std::vector<double> sg = surface_grid(p);
        RaySolution sol = solve_limit(p, k, u0, opt, &sg);
        s.y0 = sol.y_top();
        s.logscale = sol.logscale_top();
        s.yp0 = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
        s.Y = s.yp0;
        s.F = cplx(-g, 0.0);
        s.Fbold = s.y0 * s.F;
        return s;
    }

    const std::vector<double> sg = surface_grid(p);
    RaySolution sol = solve_auto(p, k, c, opt, &sg);
    s.y0 = sol.y_top();
    s.yp0 = sol.yp_top();
    s.logscale = sol.logscale_top();
    s.yp_singular = sol.yp_singular_at_top;
    cplx um = u0 - c;
    s.Fbold = um * um * s.yp0 - (up0 * um + g) * s.y0;
    s.F = s.Fbold / s.y0;
    s.Y = s.yp0 / s.y0;
    if (std::abs(c - cplx(u0, 0.0)) < 1e-6 * span) s.valid = SampleValidity::kAtU0;
    else if (y0_is_tiny(p, k, sol)) s.valid = SampleValidity::kY0Vanishes;
    return s;
}

cplx eval_Y(const ShearProfile& p, double k, cplx c, const SolverOptions& opt) {
    const double u0 = p.u_max();
    if (std::abs(c - cplx(u0, 0.0)) < 1e-6 * p.range())
        throw at_u0_error("eval_Y: c at U(0) where Y is undefined");
    const std::vector<double> sg = surface_grid(p);
    RaySolution sol = solve_auto(p, k, c, opt, &sg);
    if (y0_is_tiny(p, k, sol))
        throw y0_vanishes_error("eval_Y: y-(k, c, 0) vanishes (channel eigenvalue)");
    return sol.Y_surface();
}

double eval_YI_formula(const ShearProfile& p, double k, double c, const SolverOptions& opt) {
    if (!(c > p.u_min() && c < p.u_max()))
        throw out_of_range_error("eval_YI_formula: c must be an interior value of U");
    const std::vector<double> sg = surface_grid(p);
    RaySolution sol = solve_limit(p, k, c, opt, &sg);
    if (y0_is_tiny(p, k, sol))
        throw y0_vanishes_error("eval_YI_formula: y-(k, c, 0) vanishes");
    if (!sol.critical) return 0.0;  // critical window degenerated away
    const CriticalLayer& cl = *sol.critical;
    double x2c = cl.x2c;
    double num_log = 2.0 * (std::log(std::abs(cl.y_at_xc) + 1e-300) + cl.logscale_at_xc);
    double den_log = 2.0 * sol.log_abs_y_top();
    double ratio = std::exp(num_log - den_log);
    // sign of y_at_xc^2 is positive (real below the layer)
    return kPi * p.upp(x2c) * ratio / p.up(x2c);
}

namespace {

// 12-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGx[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                           0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
constexpr double kGw[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                           0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

template <typename F>
cplx gauss12(F&& f, double a, double b) {
    double hm = 0.5 * (b - a), mid = 0.5 * (a + b);
    cplx acc = 0.0;
    for (int i = 0; i < 6; ++i) {
        acc += kGw[i] * f(mid + hm * kGx[i]);
        acc += kGw[i] * f(mid - hm * kGx[i]);
    }
    return hm * acc;
}

template <typename F>
cplx adaptive_gauss(F&& f, double a, double b, double tol, int depth = 0) {
    cplx whole = gauss12(f, a, b);
    double mid = 0.5 * (a + b);
    cplx left = gauss12(f, a, mid), right = gauss12(f, mid, b);
    if (depth >= 14 || std::abs(whole - (left + right)) <= tol)
        return left + right;
    return adaptive_gauss(f, a, mid, tol / 2, depth + 1) +
           adaptive_gauss(f, mid, b, tol / 2, depth + 1);
}

}  // namespace

double cauchy_residual(const ShearProfile& p, double k, cplx c, const SolverOptions& opt) {
    const double h = p.h();
    // Precondition: y-(k, ., 0) zero-free over the complex plane. Channel
    // eigenvalues live inside the semicircle disk, so a zero winding of
    // y-(k, ., 0) along an inflated disk boundary plus a segment min-scan
    // certifies the sweep.
    {
        double m = 0.5 * (p.u_min() + p.u_max());
        double R = 0.5 * p.range() + 0.05 * p.range();
        std::vector<cplx> pts;
        int n = 64;
        for (int i = 0; i < n; ++i) {
            double th = 2.0 * kPi * i / n;
            pts.push_back(cplx(m + R * std::cos(th), R * std::sin(th)));
        }
        const std::vector<double> sg = surface_grid(p);
        auto fn = [&](cplx z) -> cplx {
            RaySolution sol = solve_auto(p, k, z, opt, &sg);
            return sol.y_top();
        };
        WindingResult wr = winding_number(fn, pts);
        if (wr.winding != 0)
            throw precondition_error("cauchy_residual: y-(k, ., 0) has zeros off the segment");
        double worst = 1e300;
        const std::vector<double> sg2 = surface_grid(p);
        for (double x : linspace(-h + 1e-6 * h, -1e-6 * h, 41)) {
            RaySolution sol = solve_limit(p, k, p.u(x), opt, &sg2);
            worst = std::min(worst, sol.log_abs_y_top() - std::log(mu_of_k(k)) -
                                        log_sinh(h / mu_of_k(k)));
        }
        if (worst < std::log(1e-6))
            throw precondition_error("cauchy_residual: y-(k, ., 0) nearly vanishes on the segment");
    }

    cplx lhs = eval_Y(p, k, c, opt);
    double kcoth = (std::abs(k) < 1e-12) ? 1.0 / h : k / std::tanh(k * h);
    auto integrand = [&](double x) -> cplx {
        double cp = p.u(x);
        double yi = eval_YI_formula(p, k, cp, opt);
        return yi * p.up(x) / (cp - c);
    };
    cplx integral = adaptive_gauss(integrand, -h, 0.0, 1e-9);
    cplx rhs = integral / kPi + kcoth;
    return std::abs(lhs - rhs);
}

cplx dF_dc(const ShearProfile& p, double g, double sigma, double k, cplx c, double step_rel,
           const SolverOptions& opt) {
    double d = step_rel * std::max(1.0, std::abs(c));
    DispersionSample a = eval_F(p, g, sigma, k, c + d);
    DispersionSample b = eval_F(p, g, sigma, k, c - d);
    return (a.F_sigma() - b.F_sigma()) / (2.0 * d);
}

}  // namespace shearspec
