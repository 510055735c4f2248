#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shearspec/dispersion.hpp"
#include "shearspec/modes.hpp"

namespace shearspec {

/// A closed contour in the c-plane avoiding the segment U([-h, 0]).
class Region {
public:
    enum class Kind { kRectangle, kDisk, kUpperSemicircle };

    static Region rectangle(cplx lo, cplx hi, int n_per_side = 24);
    static Region disk(cplx center, double radius, int n = 96);
    /// Howard semicircle disk enlarged by margin delta, upper component,
    /// with a corridor of height delta above the singular segment.
    static Region upper_semicircle(const ShearProfile& p, double delta, int n_arc = 48);

    std::vector<cplx> polyline() const;
    bool contains(cplx c) const;
    /// Inflated (amount > 0) or deflated (amount < 0) copy.
    Region adjusted(double amount) const;

    Kind kind() const { return kind_; }
    double margin() const { return delta_; }

private:
    Kind kind_ = Kind::kRectangle;
    cplx lo_{0, 0}, hi_{0, 0};   // rectangle
    cplx center_{0, 0};          // disk
    double radius_ = 0.0;        // disk
    double m_ = 0.0, R_ = 0.0, delta_ = 0.0;  // semicircle params
    int density_ = 24;
};

struct TracerOptions {
    double branch_tol = 1e-9;       // |F| at accepted branch points
    double simple_tol = 1e-7;       // |dF/dc| lower bound for simple roots
    double step_init = 0.02;
    double step_min = 1e-5;
    double step_max = 0.1;
    double delta_frac = 1e-4;       // segment margin = delta_frac * (Umax - Umin)
    double fd_step = 1e-6;
    int newton_max = 12;
    SolverOptions solver;
};

/// Argument-principle zero count of Fbold_sigma(k, .) inside the region.
int index_count(const ShearProfile& p, double g, double sigma, double k, const Region& region,
                const TracerOptions& opt = {});

/// Closed-form large-k seeds for the two outer branches.
std::pair<cplx, cplx> seed_large_k(const ShearProfile& p, double g, double k);
double default_k_seed(const ShearProfile& p, double g);

struct PolishResult {
    cplx c;
    cplx dFdc;
    bool converged = false;
    int iterations = 0;
};
PolishResult polish_mode(const ShearProfile& p, double g, double sigma, double k, cplx c0,
                         const TracerOptions& opt = {}, int max_iter = -1);

enum class BranchLabel { kCPlus, kCMinusLower, kCMinusUpper, kInflectionBranch };

enum class TerminationKind { kReachedSegment, kCollision, kKRangeEnd, kIndexLost };

struct Termination {
    TerminationKind kind = TerminationKind::kKRangeEnd;
    double k_end = 0.0;
    cplx c_end{0, 0};
    int other_branch_id = -1;
};

struct BranchPoint {
    double k = 0.0;
    cplx c{0, 0};
    cplx dFdc{0, 0};
};

struct Branch {
    std::vector<BranchPoint> points;
    BranchLabel label = BranchLabel::kCPlus;
    Termination termination;
};

struct TraceSeed {
    double k = 0.0;
    cplx c{0, 0};
};

Branch trace_branch(const ShearProfile& p, double g, double sigma, TraceSeed seed,
                    double k_target, const TracerOptions& opt = {},
                    bool continue_through_segment = false,
                    BranchLabel label = BranchLabel::kCPlus);

struct BifurcationSlope {
    cplx slope{0, 0};        // C'(k0) = -dk F_sigma / dcR F
    double cI_prime = 0.0;   // dk F_sigma * dcR F_I / |dcR F|^2
    cplx dkF{0, 0};
    cplx dcF{0, 0};
};
BifurcationSlope bifurcation_slope(const ShearProfile& p, double g, double sigma, double k0,
                                   double c0, const TracerOptions& opt = {});

struct CensusMode {
    cplx c{0, 0};
    double absF = 0.0;
    bool sub_resolution = false;  // |Im c| below double resolution; sign predicted
    int predicted_sign = 0;       // sign of U''(U^{-1}(c_R)) for sub-resolution modes
};

struct ModeCensus {
    double k = 0.0;
    std::vector<CensusMode> unstable;
    std::vector<double> neutral_nonsingular;  // real c outside [Umin, Umax]
    std::vector<double> singular_neutral;     // real c in [Umin, Umax]
    int index_upper = 0;
    double delta_used = 0.0;
    bool multiple_root_flag = false;
};

ModeCensus mode_census(const ShearProfile& p, double g, double sigma, double k,
                       const TracerOptions& opt = {},
                       const NeutralModeReport* neutral = nullptr);

/// Even closed branch of unstable modes for |k| <= k1 when g exceeds F0(c0)
/// at a concave-direction inflection value. Returns nullopt when k1 is absent.
std::optional<Branch> closed_low_k_branch(const ShearProfile& p, double g, double c0,
                                          const TracerOptions& opt = {});

}  // namespace shearspec
