#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shearspec/expr.hpp"
#include "shearspec/util.hpp"

namespace shearspec {

/// An interior inflection point of U: U''(x20) = 0 with a sign change.
struct InflectionPoint {
    double x20 = 0.0;       // location in (-h, 0)
    double c0 = 0.0;        // U(x20)
    int uppp_sign = 0;      // sign of U'''(x20); 0 marks a degenerate direction
    double uppp = 0.0;      // U'''(x20)
};

/// Three-interval decomposition around the critical zone for one (k, c).
struct Interval3Split {
    bool has_middle = false;
    double x2l = 0.0;  // left edge of the critical zone (valid when has_middle)
    double x2r = 0.0;  // right edge
    double mu = 1.0;
    double rho0 = 0.0;
};

/// A validated uniformly monotone shear profile U(x2) on [-h, 0], smoothly
/// extended to [-h-h0, h0] by evaluating the same closed-form expression.
class ShearProfile {
public:
    static ShearProfile parse(const std::string& text, double h);

    double h() const { return h_; }
    double h0() const { return h0_; }
    double u_min() const { return umin_; }     // U(-h)
    double u_max() const { return umax_; }     // U(0)
    double range() const { return umax_ - umin_; }
    double m_ext() const { return m_ext_; }    // inf U' on the extended interval
    double m_int() const { return m_int_; }    // inf U' on [-h, 0]
    double sup_upp() const { return sup_upp_; }  // sup |U''| on [-h, 0]
    double rho0() const { return rho0_; }

    const std::string& text() const { return text_; }
    const std::vector<InflectionPoint>& inflections() const { return inflections_; }
    const std::vector<double>& degenerate_upp_zeros() const { return degenerate_upp_zeros_; }

    double u(double x2) const { return expr_.eval(x2); }
    double up(double x2) const { return d1_.eval(x2); }
    double upp(double x2) const { return d2_.eval(x2); }
    double uppp(double x2) const { return d3_.eval(x2); }
    double upppp(double x2) const { return d4_.eval(x2); }

    cplx u(cplx x2) const { return expr_.eval(x2); }
    cplx upp(cplx x2) const { return d2_.eval(x2); }

    /// Taylor coefficients of U around x0 (length n), via series propagation.
    std::vector<double> u_taylor(double x0, int n) const { return expr_.taylor(x0, n); }

    /// x2 with U(x2) = c, safeguarded Newton on the extended interval.
    double invert(double c) const;

    /// Range of c values reachable through the extension.
    double u_ext_min() const { return uext_min_; }
    double u_ext_max() const { return uext_max_; }

    Interval3Split split_intervals(double k, cplx c) const;

    const ProfileExpr& expr() const { return expr_; }

private:
    ShearProfile() = default;
    void validate_and_finalize();

    std::string text_;
    ProfileExpr expr_, d1_, d2_, d3_, d4_;
    double h_ = 1.0;
    double h0_ = 0.0;
    double umin_ = 0.0, umax_ = 0.0;
    double uext_min_ = 0.0, uext_max_ = 0.0;
    double m_int_ = 0.0, m_ext_ = 0.0, sup_upp_ = 0.0;
    double rho0_ = 0.0;
    std::vector<InflectionPoint> inflections_;
    std::vector<double> degenerate_upp_zeros_;
};

}  // namespace shearspec
