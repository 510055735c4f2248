#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shearspec/dispersion.hpp"
#include "shearspec/profile.hpp"

namespace shearspec {

/// One non-positive eigenvalue of the Robin Sturm-Liouville problem
///   -y'' + U''/(U - c0) y = lambda y,  y(-h) = 0,
///   (U(0)-c0)^2 y'(0) - (U'(0)(U(0)-c0) + g) y(0) = 0.
struct SLEigenvalue {
    double lambda = 0.0;            // Richardson-extrapolated FD value
    double k = 0.0;                 // sqrt(-lambda), polished on F(., c0)
    double dispersion_residual = 0.0;  // |F(k, c0)| after polishing
    bool eigenfunction_positive = false;
    int sign_changes = 0;
};

std::vector<SLEigenvalue> sl_negative_eigenvalues(const ShearProfile& p, double g, double c0,
                                                  const SolverOptions& opt = {},
                                                  int n_nodes = 2001);

/// Channel (Dirichlet) neutral wave number at an inflection value, if any.
std::optional<double> find_k_C(const ShearProfile& p, double c0, const SolverOptions& opt = {},
                               int n_nodes = 2001);

/// g-independent classifier F0(c0) = F(0, c0) + g = (U(0)-c0)^2 Y(0,c0)
/// - U'(0)(U(0)-c0); k_C exists iff F0(c0) > 0.
double eval_F0(const ShearProfile& p, double c0, const SolverOptions& opt = {});

/// Wave numbers making an interior inflection value a singular neutral mode.
struct SSet {
    std::vector<double> ks;  // sorted ascending, |ks| in {1, 2}
    bool k0_eigenfunction_positive = false;
    bool marginal_k1 = false;          // g == F0(c0): k1 = 0 boundary case
    bool ill_conditioned_gap = false;  // k_C - k1 < 1e-4
};
SSet find_S(const ShearProfile& p, double g, double c0, const SolverOptions& opt = {});

/// Roots of F_sigma(., U(-h)): the unique k_minus when sigma = 0, or the
/// 0/1/2 capillary-gravity roots k_#-+ <= k_#+ together with g_sharp.
struct CriticalWavenumbers {
    double g_sharp = 0.0;     // meaningful when sigma > 0
    std::vector<double> ks;   // sorted
};
CriticalWavenumbers find_k_minus(const ShearProfile& p, double g, double sigma = 0.0,
                                 const SolverOptions& opt = {});

struct InflectionModeEntry {
    double x20 = 0.0;
    double c0 = 0.0;
    int uppp_sign = 0;
    std::optional<double> k_C;
    double F0 = 0.0;
    SSet S;
    std::string classification;  // single_k0 | pair_k1_k0 | marginal_pair
};

struct NeutralModeReport {
    double g = 0.0, sigma = 0.0;
    double k_minus = 0.0;
    std::vector<InflectionModeEntry> entries;
    std::optional<CriticalWavenumbers> sigma_variant;  // when sigma > 0
};

NeutralModeReport neutral_mode_report(const ShearProfile& p, double g, double sigma,
                                      const SolverOptions& opt = {});

/// Scan cap for k roots of F(., c): 4x the linear-growth estimate, capped.
double k_scan_cap(const ShearProfile& p, double g, double c0);

}  // namespace shearspec
