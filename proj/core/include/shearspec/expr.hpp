#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shearspec/util.hpp"

namespace shearspec {

/// A closed-form expression in the single variable x2.
///
/// Node set: constants, x2, +, -, *, /, integer powers, tanh, exp, sin, cos.
/// Supports symbolic differentiation (any order), evaluation at real and
/// complex arguments, and propagation of truncated Taylor series (used to
/// build the local Frobenius expansions to arbitrary order).
class ProfileExpr {
public:
    enum class Op : std::uint8_t {
        kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kPowInt, kTanh, kExp, kSin, kCos
    };

    struct Node {
        Op op = Op::kConst;
        double value = 0.0;  // kConst
        int ipow = 0;        // kPowInt exponent
        int a = -1, b = -1;  // child indices
    };

    ProfileExpr() = default;

    /// Parses the documented grammar; throws parse_error on malformed input.
    static ProfileExpr parse(const std::string& text);

    /// Prints a formula that parses back to an identically-evaluating tree.
    std::string to_string() const;

    /// Symbolic d/dx2 with constant folding.
    ProfileExpr derivative() const;

    double eval(double x2) const;
    cplx eval(cplx x2) const;

    /// Taylor coefficients of x2 |-> expr(x0 + t) up to t^(n-1).
    std::vector<double> taylor(double x0, int n) const;

    bool empty() const { return nodes_.empty(); }

private:
    std::vector<Node> nodes_;
    int root_ = -1;

    int add_node(Node n);
    std::string print_node(int idx, int parent_prec) const;
    int diff_node(int idx, ProfileExpr& out) const;
    int clone_into(int idx, ProfileExpr& out) const;

    // simplifying constructors used by diff
    int mk_const(double v);
    int mk_bin(Op op, int a, int b);
    int mk_un(Op op, int a, int ipow = 0);

    template <typename T>
    T eval_impl(T x2) const;
};

}  // namespace shearspec
