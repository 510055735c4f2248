#pragma once

#include <functional>
#include <vector>

#include "shearspec/util.hpp"

namespace shearspec {

/// State of the second-order Rayleigh system: (y, y').
struct RayState {
    cplx y{0.0, 0.0};
    cplx yp{0.0, 0.0};
};

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_min = 1e-14;
    double h_max_frac = 0.25;  // of interval length
};

/// Integration path in the complex x2-plane, parametrized by arc parameter s.
/// zeta(s) must be C^1 on each segment between breakpoints.
struct PathSeg {
    std::function<cplx(double)> zeta;    // position
    std::function<cplx(double)> dzeta;   // d zeta / d s
};

/// Adaptive Dormand-Prince 5(4) for dy/ds = dzeta * yp,
/// dyp/ds = dzeta * coeff(zeta) * y, with renormalization of exponentially
/// growing solutions. coeff(z) is the Rayleigh potential k^2 + U''/(U-c).
///
/// Integrates from s0 to s1 (s1 > s0), calling sample(s, state, logscale)
/// at every s in `samples` (which must be sorted, inside [s0, s1]).
/// Returns the final state; accumulated log of the removed scale factor is
/// added to *logscale.
void integrate_ray(const std::function<cplx(cplx)>& coeff, const PathSeg& path, double s0,
                   double s1, RayState& state, double* logscale, const OdeOptions& opt,
                   const std::vector<double>& samples = {},
                   const std::function<void(double, const RayState&, double)>& sample = {});

}  // namespace shearspec
