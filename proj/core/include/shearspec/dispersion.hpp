#pragma once

#include <optional>

#include "shearspec/rayleigh.hpp"

namespace shearspec {

enum class SampleValidity { kOk, kY0Vanishes, kAtU0 };

/// One evaluation of the dispersion functions at (k, c).
///
/// Fbold is stored rescaled by exp(-logscale) together with y0, yp0 (the
/// scale factor is positive real, so arguments and zero sets are unaffected).
struct DispersionSample {
    double k = 0.0;
    cplx c{0.0, 0.0};
    double g = 0.0;
    double sigma = 0.0;
    SampleValidity valid = SampleValidity::kOk;

    cplx y0{0.0, 0.0};   // y-(k, c, 0), scaled
    cplx yp0{0.0, 0.0};  // y-'(k, c, 0), scaled
    double logscale = 0.0;
    bool yp_singular = false;

    cplx Y{0.0, 0.0};      // yp0 / y0 (scale-free)
    cplx F{0.0, 0.0};      // Y (U(0)-c)^2 - U'(0)(U(0)-c) - g
    cplx Fbold{0.0, 0.0};  // y0 * F, scaled by exp(-logscale)

    cplx F_sigma() const { return F - sigma * k * k; }
    cplx Fbold_sigma() const { return Fbold - sigma * k * k * y0; }
};

/// Rescales b to the scale of a: returns b * exp(ls_b - ls_a).
inline cplx at_scale_of(double ls_a, cplx b, double ls_b) { return b * std::exp(ls_b - ls_a); }

cplx eval_Y(const ShearProfile& p, double k, cplx c, const SolverOptions& opt = {});

DispersionSample eval_F(const ShearProfile& p, double g, double sigma, double k, cplx c,
                        const SolverOptions& opt = {});

/// Closed formula Y_I = pi U''(x2c) y-(k,c,x2c)^2 / (U'(x2c) |y-(k,c,0)|^2)
/// for real c inside U((-h, 0)).
double eval_YI_formula(const ShearProfile& p, double k, double c, const SolverOptions& opt = {});

/// |Y(k,c) - (1/pi) int Y_I(k,c')/(c'-c) dc' - k coth(kh)| for c off the
/// segment; preconditioned by a zero-free sweep of y-(k, ., 0).
double cauchy_residual(const ShearProfile& p, double k, cplx c, const SolverOptions& opt = {});

/// d/dc of F at c off the segment (holomorphic direction), by central
/// finite differences.
cplx dF_dc(const ShearProfile& p, double g, double sigma, double k, cplx c, double step_rel,
           const SolverOptions& opt = {});

}  // namespace shearspec
