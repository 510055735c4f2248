#pragma once

#include <optional>
#include <vector>

#include "shearspec/ode.hpp"
#include "shearspec/profile.hpp"
#include "shearspec/util.hpp"

namespace shearspec {

struct SolverOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double r_loc_factor = 8.0;  // crossing half-width = min(mu, h/4) / r_loc_factor
    int series_terms = 4;       // starting truncation order of the local series
    int grid_n = 33;            // default sampling grid size
};

/// Critical-layer metadata attached to limit solutions y0-.
struct CriticalLayer {
    double x2c = 0.0;
    double mu = 1.0;
    double q = 0.0;              // U''(x2c) / U'(x2c)
    cplx b2m{0.0, 0.0};          // regularized derivative limit at x2c (scaled)
    cplx y_at_xc{0.0, 0.0};      // y0-(x2c) (scaled)
    double logscale_at_xc = 0.0;
    double r_loc = 0.0;
};

/// Fundamental solution y-(k, c, x2) with y-(-h)=0, y-'(-h)=1, sampled on a
/// grid. Stored values are scaled: true value = y[i] * exp(logscale[i]).
struct RaySolution {
    double k = 0.0;
    cplx c{0.0, 0.0};
    std::vector<double> grid;
    std::vector<cplx> y, yp;
    std::vector<double> logscale;
    std::optional<CriticalLayer> critical;
    bool yp_singular_at_top = false;  // c == U(0): y' log-singular at x2 = 0

    cplx y_top() const { return y.back(); }
    cplx yp_top() const { return yp.back(); }
    double logscale_top() const { return logscale.back(); }
    /// log|y(0)| including the scale factor.
    double log_abs_y_top() const { return std::log(std::abs(y.back())) + logscale.back(); }
    cplx Y_surface() const { return yp.back() / y.back(); }
};

/// True when a real wave speed must go through the limit (Frobenius) path.
bool real_needs_limit(const ShearProfile& p, cplx c);

/// Solution for c off the singular segment. Wave speeds with small nonzero
/// imaginary part are handled by deforming the integration path into the
/// half-plane opposite the singularity. Throws step_underflow_error when
/// c is real inside the extended range of U (use solve_limit).
RaySolution solve_regular(const ShearProfile& p, double k, cplx c,
                          const SolverOptions& opt = {},
                          const std::vector<double>* grid = nullptr);

/// Boundary-value limit y0- = lim_{cI->0+} y- for real c in the extended
/// range of U, crossing the critical layer with the local log-structured
/// fundamental pair.
RaySolution solve_limit(const ShearProfile& p, double k, double c,
                        const SolverOptions& opt = {},
                        const std::vector<double>* grid = nullptr);

/// Dispatch on c: limit path for real c in the extended range, regular
/// integration otherwise.
RaySolution solve_auto(const ShearProfile& p, double k, cplx c,
                       const SolverOptions& opt = {},
                       const std::vector<double>* grid = nullptr);

struct AsymptoticReport {
    double sup_ratio = 0.0;  // sup |mu^{-1} y- / sinh(mu^{-1}(x2+h)) - 1| / mu^alpha
    double alpha = 0.4;
};

/// Empirical constant for the |k| >> 1 envelope bound of y-.
AsymptoticReport asymptotic_bounds_check(const ShearProfile& p, double k, cplx c,
                                         const SolverOptions& opt = {});

namespace detail {

/// Local Frobenius pair at a critical point x2c (real c = U(x2c)):
///   phi1 = (U - c)(1 + O(t^2)) regular,
///   phi2 = v(t) + q phi1 (log|t| + i pi [t > 0]) with v(0) = U'(x2c).
/// Upper-half-plane branch (c_I -> 0+).
struct LocalPair {
    double x2c = 0.0;
    double a1 = 0.0;  // U'(x2c)
    double q = 0.0;
    std::vector<double> f;  // phi1 series coefficients
    std::vector<double> v;  // analytic part of phi2

    void eval(double t, cplx& phi1, cplx& phi1p, cplx& phi2, cplx& phi2p) const;
};

LocalPair build_local_pair(const ShearProfile& p, double k, double x2c, int order);

}  // namespace detail

}  // namespace shearspec
