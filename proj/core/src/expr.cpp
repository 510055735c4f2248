#include "shearspec/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "shearspec/errors.hpp"

namespace shearspec {

namespace {

struct Lexer {
    const std::string& s;
    std::size_t pos = 0;

    explicit Lexer(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    char get() {
        skip_ws();
        return pos < s.size() ? s[pos++] : '\0';
    }
    bool eat(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        return s.substr(start, pos - start);
    }
    double number() {
        skip_ws();
        const char* begin = s.c_str() + pos;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) throw parse_error("expected number at offset " + std::to_string(pos));
        pos += static_cast<std::size_t>(end - begin);
        return v;
    }
    int integer() {
        skip_ws();
        bool neg = eat('-');
        if (!neg) eat('+');
        skip_ws();
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
            throw parse_error("expected integer exponent at offset " + std::to_string(pos));
        int v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + (s[pos] - '0');
            ++pos;
        }
        return neg ? -v : v;
    }
};

struct Parser {
    Lexer lex;
    ProfileExpr::Node scratch;
    std::vector<ProfileExpr::Node>& nodes;

    Parser(const std::string& text, std::vector<ProfileExpr::Node>& out)
        : lex(text), nodes(out) {}

    int push(ProfileExpr::Node n) {
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
    }

    int expr() {
        int left = term();
        for (;;) {
            char c = lex.peek();
            if (c == '+' || c == '-') {
                lex.get();
                int right = term();
                ProfileExpr::Node n;
                n.op = (c == '+') ? ProfileExpr::Op::kAdd : ProfileExpr::Op::kSub;
                n.a = left;
                n.b = right;
                left = push(n);
            } else {
                return left;
            }
        }
    }

    int term() {
        int left = factor();
        for (;;) {
            char c = lex.peek();
            if (c == '*' || c == '/') {
                lex.get();
                int right = factor();
                ProfileExpr::Node n;
                n.op = (c == '*') ? ProfileExpr::Op::kMul : ProfileExpr::Op::kDiv;
                n.a = left;
                n.b = right;
                left = push(n);
            } else {
                return left;
            }
        }
    }

    int factor() {
        char c = lex.peek();
        if (c == '-') {
            lex.get();
            int inner = factor();
            ProfileExpr::Node n;
            n.op = ProfileExpr::Op::kNeg;
            n.a = inner;
            return push(n);
        }
        if (c == '+') {
            lex.get();
            return factor();
        }
        return power();
    }

    int power() {
        int base = atom();
        if (lex.peek() == '^') {
            lex.get();
            int e = lex.integer();
            ProfileExpr::Node n;
            n.op = ProfileExpr::Op::kPowInt;
            n.a = base;
            n.ipow = e;
            return push(n);
        }
        return base;
    }

    int atom() {
        char c = lex.peek();
        if (c == '(') {
            lex.get();
            int inner = expr();
            if (!lex.eat(')')) throw parse_error("missing ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            ProfileExpr::Node n;
            n.op = ProfileExpr::Op::kConst;
            n.value = lex.number();
            return push(n);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string id = lex.ident();
            if (id == "x2") {
                ProfileExpr::Node n;
                n.op = ProfileExpr::Op::kVar;
                return push(n);
            }
            ProfileExpr::Op op;
            if (id == "tanh") op = ProfileExpr::Op::kTanh;
            else if (id == "exp") op = ProfileExpr::Op::kExp;
            else if (id == "sin") op = ProfileExpr::Op::kSin;
            else if (id == "cos") op = ProfileExpr::Op::kCos;
            else throw parse_error("unknown identifier '" + id + "'");
            if (!lex.eat('(')) throw parse_error("expected '(' after '" + id + "'");
            int inner = expr();
            if (!lex.eat(')')) throw parse_error("missing ')' after argument of '" + id + "'");
            ProfileExpr::Node n;
            n.op = op;
            n.a = inner;
            return push(n);
        }
        throw parse_error(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

ProfileExpr ProfileExpr::parse(const std::string& text) {
    ProfileExpr e;
    Parser p(text, e.nodes_);
    e.root_ = p.expr();
    p.lex.skip_ws();
    if (p.lex.pos != text.size())
        throw parse_error("trailing input at offset " + std::to_string(p.lex.pos));
    return e;
}

int ProfileExpr::add_node(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

int ProfileExpr::mk_const(double v) {
    Node n;
    n.op = Op::kConst;
    n.value = v;
    return add_node(n);
}

int ProfileExpr::mk_un(Op op, int a, int ipow) {
    Node n;
    n.op = op;
    n.a = a;
    n.ipow = ipow;
    return add_node(n);
}

int ProfileExpr::mk_bin(Op op, int a, int b) {
    const Node& na = nodes_[static_cast<std::size_t>(a)];
    const Node& nb = nodes_[static_cast<std::size_t>(b)];
    bool ca = na.op == Op::kConst, cb = nb.op == Op::kConst;
    // constant folding and unit/zero elimination keep high-order derivatives small
    if (ca && cb) {
        switch (op) {
            case Op::kAdd: return mk_const(na.value + nb.value);
            case Op::kSub: return mk_const(na.value - nb.value);
            case Op::kMul: return mk_const(na.value * nb.value);
            case Op::kDiv: return mk_const(na.value / nb.value);
            default: break;
        }
    }
    if (op == Op::kAdd) {
        if (ca && na.value == 0.0) return b;
        if (cb && nb.value == 0.0) return a;
    }
    if (op == Op::kSub && cb && nb.value == 0.0) return a;
    if (op == Op::kMul) {
        if ((ca && na.value == 0.0) || (cb && nb.value == 0.0)) return mk_const(0.0);
        if (ca && na.value == 1.0) return b;
        if (cb && nb.value == 1.0) return a;
    }
    if (op == Op::kDiv && cb && nb.value == 1.0) return a;
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    return add_node(n);
}

int ProfileExpr::clone_into(int idx, ProfileExpr& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    Node m = n;
    if (n.a >= 0) m.a = clone_into(n.a, out);
    if (n.b >= 0) m.b = clone_into(n.b, out);
    return out.add_node(m);
}

int ProfileExpr::diff_node(int idx, ProfileExpr& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.op) {
        case Op::kConst: return out.mk_const(0.0);
        case Op::kVar: return out.mk_const(1.0);
        case Op::kAdd: return out.mk_bin(Op::kAdd, diff_node(n.a, out), diff_node(n.b, out));
        case Op::kSub: return out.mk_bin(Op::kSub, diff_node(n.a, out), diff_node(n.b, out));
        case Op::kNeg: return out.mk_un(Op::kNeg, diff_node(n.a, out));
        case Op::kMul: {
            int fa = clone_into(n.a, out), fb = clone_into(n.b, out);
            int da = diff_node(n.a, out), db = diff_node(n.b, out);
            return out.mk_bin(Op::kAdd, out.mk_bin(Op::kMul, da, fb),
                              out.mk_bin(Op::kMul, fa, db));
        }
        case Op::kDiv: {
            int fa = clone_into(n.a, out), fb = clone_into(n.b, out);
            int da = diff_node(n.a, out), db = diff_node(n.b, out);
            int num = out.mk_bin(Op::kSub, out.mk_bin(Op::kMul, da, fb),
                                 out.mk_bin(Op::kMul, fa, db));
            int den = out.mk_un(Op::kPowInt, clone_into(n.b, out), 2);
            return out.mk_bin(Op::kDiv, num, den);
        }
        case Op::kPowInt: {
            if (n.ipow == 0) return out.mk_const(0.0);
            int fa = clone_into(n.a, out);
            int da = diff_node(n.a, out);
            int pw = (n.ipow == 2) ? fa : out.mk_un(Op::kPowInt, fa, n.ipow - 1);
            return out.mk_bin(Op::kMul, out.mk_const(static_cast<double>(n.ipow)),
                              out.mk_bin(Op::kMul, pw, da));
        }
        case Op::kTanh: {
            // d tanh u = (1 - tanh(u)^2) u'
            int u1 = clone_into(n.a, out);
            int th = out.mk_un(Op::kTanh, u1);
            int th2 = out.mk_un(Op::kPowInt, th, 2);
            int one = out.mk_const(1.0);
            int da = diff_node(n.a, out);
            return out.mk_bin(Op::kMul, out.mk_bin(Op::kSub, one, th2), da);
        }
        case Op::kExp: {
            int u1 = clone_into(n.a, out);
            int ex = out.mk_un(Op::kExp, u1);
            return out.mk_bin(Op::kMul, ex, diff_node(n.a, out));
        }
        case Op::kSin: {
            int u1 = clone_into(n.a, out);
            int cs = out.mk_un(Op::kCos, u1);
            return out.mk_bin(Op::kMul, cs, diff_node(n.a, out));
        }
        case Op::kCos: {
            int u1 = clone_into(n.a, out);
            int sn = out.mk_un(Op::kSin, u1);
            return out.mk_bin(Op::kMul, out.mk_un(Op::kNeg, sn), diff_node(n.a, out));
        }
    }
    throw numeric_error("diff: corrupt expression node");
}

ProfileExpr ProfileExpr::derivative() const {
    ProfileExpr out;
    out.root_ = diff_node(root_, out);
    return out;
}

template <typename T>
T ProfileExpr::eval_impl(T x2) const {
    std::vector<T> val(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        switch (n.op) {
            case Op::kConst: val[i] = T(n.value); break;
            case Op::kVar: val[i] = x2; break;
            case Op::kAdd: val[i] = val[static_cast<std::size_t>(n.a)] + val[static_cast<std::size_t>(n.b)]; break;
            case Op::kSub: val[i] = val[static_cast<std::size_t>(n.a)] - val[static_cast<std::size_t>(n.b)]; break;
            case Op::kMul: val[i] = val[static_cast<std::size_t>(n.a)] * val[static_cast<std::size_t>(n.b)]; break;
            case Op::kDiv: val[i] = val[static_cast<std::size_t>(n.a)] / val[static_cast<std::size_t>(n.b)]; break;
            case Op::kNeg: val[i] = -val[static_cast<std::size_t>(n.a)]; break;
            case Op::kPowInt: {
                T base = val[static_cast<std::size_t>(n.a)];
                int e = n.ipow;
                bool inv = e < 0;
                unsigned int m = static_cast<unsigned int>(inv ? -e : e);
                T acc(1.0);
                T b = base;
                while (m) {
                    if (m & 1u) acc *= b;
                    b *= b;
                    m >>= 1u;
                }
                val[i] = inv ? T(1.0) / acc : acc;
                break;
            }
            case Op::kTanh: val[i] = std::tanh(val[static_cast<std::size_t>(n.a)]); break;
            case Op::kExp: val[i] = std::exp(val[static_cast<std::size_t>(n.a)]); break;
            case Op::kSin: val[i] = std::sin(val[static_cast<std::size_t>(n.a)]); break;
            case Op::kCos: val[i] = std::cos(val[static_cast<std::size_t>(n.a)]); break;
        }
    }
    return val[static_cast<std::size_t>(root_)];
}

double ProfileExpr::eval(double x2) const { return eval_impl<double>(x2); }
cplx ProfileExpr::eval(cplx x2) const { return eval_impl<cplx>(x2); }

namespace {

// Truncated power-series arithmetic in t, all vectors of fixed length n.
using Series = std::vector<double>;

Series s_const(double v, int n) {
    Series s(static_cast<std::size_t>(n), 0.0);
    s[0] = v;
    return s;
}

Series s_mul(const Series& a, const Series& b) {
    int n = static_cast<int>(a.size());
    Series c(a.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        if (a[static_cast<std::size_t>(i)] == 0.0) continue;
        for (int j = 0; j + i < n; ++j)
            c[static_cast<std::size_t>(i + j)] +=
                a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
    }
    return c;
}

Series s_div(const Series& a, const Series& b) {
    int n = static_cast<int>(a.size());
    if (b[0] == 0.0) throw not_smooth_error("series division by series vanishing at base point");
    Series c(a.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = a[static_cast<std::size_t>(i)];
        for (int j = 1; j <= i; ++j)
            acc -= b[static_cast<std::size_t>(j)] * c[static_cast<std::size_t>(i - j)];
        c[static_cast<std::size_t>(i)] = acc / b[0];
    }
    return c;
}

Series s_exp(const Series& u) {
    int n = static_cast<int>(u.size());
    Series e(u.size(), 0.0);
    e[0] = std::exp(u[0]);
    for (int m = 1; m < n; ++m) {
        double acc = 0.0;
        for (int j = 1; j <= m; ++j)
            acc += j * u[static_cast<std::size_t>(j)] * e[static_cast<std::size_t>(m - j)];
        e[static_cast<std::size_t>(m)] = acc / m;
    }
    return e;
}

void s_sincos(const Series& u, Series& sn, Series& cs) {
    int n = static_cast<int>(u.size());
    sn.assign(u.size(), 0.0);
    cs.assign(u.size(), 0.0);
    sn[0] = std::sin(u[0]);
    cs[0] = std::cos(u[0]);
    for (int m = 1; m < n; ++m) {
        double as = 0.0, ac = 0.0;
        for (int j = 1; j <= m; ++j) {
            double ju = j * u[static_cast<std::size_t>(j)];
            as += ju * cs[static_cast<std::size_t>(m - j)];
            ac += ju * sn[static_cast<std::size_t>(m - j)];
        }
        sn[static_cast<std::size_t>(m)] = as / m;
        cs[static_cast<std::size_t>(m)] = -ac / m;
    }
}

Series s_tanh(const Series& u) {
    // t' = u' (1 - t^2); recurrence m*t_m = sum j*u_j*(1 - t^2)_{m-j}
    int n = static_cast<int>(u.size());
    Series t(u.size(), 0.0);
    Series w(u.size(), 0.0);  // w = 1 - t^2, maintained incrementally
    t[0] = std::tanh(u[0]);
    w[0] = 1.0 - t[0] * t[0];
    for (int m = 1; m < n; ++m) {
        double acc = 0.0;
        for (int j = 1; j <= m; ++j)
            acc += j * u[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(m - j)];
        t[static_cast<std::size_t>(m)] = acc / m;
        // update w_m = -(t^2)_m
        double t2 = 0.0;
        for (int j = 0; j <= m; ++j)
            t2 += t[static_cast<std::size_t>(j)] * t[static_cast<std::size_t>(m - j)];
        w[static_cast<std::size_t>(m)] = -t2;
    }
    return t;
}

Series s_powint(const Series& a, int e, int n) {
    if (e < 0) return s_div(s_const(1.0, n), s_powint(a, -e, n));
    Series acc = s_const(1.0, n);
    Series b = a;
    unsigned int m = static_cast<unsigned int>(e);
    while (m) {
        if (m & 1u) acc = s_mul(acc, b);
        b = s_mul(b, b);
        m >>= 1u;
    }
    return acc;
}

}  // namespace

std::vector<double> ProfileExpr::taylor(double x0, int n) const {
    std::vector<Series> val(nodes_.size());
    Series var = s_const(x0, n);
    if (n > 1) var[1] = 1.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& nd = nodes_[i];
        switch (nd.op) {
            case Op::kConst: val[i] = s_const(nd.value, n); break;
            case Op::kVar: val[i] = var; break;
            case Op::kAdd: {
                val[i] = val[static_cast<std::size_t>(nd.a)];
                const Series& b = val[static_cast<std::size_t>(nd.b)];
                for (int j = 0; j < n; ++j) val[i][static_cast<std::size_t>(j)] += b[static_cast<std::size_t>(j)];
                break;
            }
            case Op::kSub: {
                val[i] = val[static_cast<std::size_t>(nd.a)];
                const Series& b = val[static_cast<std::size_t>(nd.b)];
                for (int j = 0; j < n; ++j) val[i][static_cast<std::size_t>(j)] -= b[static_cast<std::size_t>(j)];
                break;
            }
            case Op::kNeg: {
                val[i] = val[static_cast<std::size_t>(nd.a)];
                for (double& v : val[i]) v = -v;
                break;
            }
            case Op::kMul:
                val[i] = s_mul(val[static_cast<std::size_t>(nd.a)], val[static_cast<std::size_t>(nd.b)]);
                break;
            case Op::kDiv:
                val[i] = s_div(val[static_cast<std::size_t>(nd.a)], val[static_cast<std::size_t>(nd.b)]);
                break;
            case Op::kPowInt:
                val[i] = s_powint(val[static_cast<std::size_t>(nd.a)], nd.ipow, n);
                break;
            case Op::kTanh: val[i] = s_tanh(val[static_cast<std::size_t>(nd.a)]); break;
            case Op::kExp: val[i] = s_exp(val[static_cast<std::size_t>(nd.a)]); break;
            case Op::kSin: {
                Series sn, cs;
                s_sincos(val[static_cast<std::size_t>(nd.a)], sn, cs);
                val[i] = sn;
                break;
            }
            case Op::kCos: {
                Series sn, cs;
                s_sincos(val[static_cast<std::size_t>(nd.a)], sn, cs);
                val[i] = cs;
                break;
            }
        }
    }
    return val[static_cast<std::size_t>(root_)];
}

std::string ProfileExpr::print_node(int idx, int parent_prec) const {
    // precedence: 0 add, 1 mul, 2 unary/pow, 3 atom
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    std::ostringstream os;
    int prec = 3;
    std::string s;
    switch (n.op) {
        case Op::kConst: {
            os.precision(17);
            os << n.value;
            s = os.str();
            if (n.value < 0) prec = 2;
            break;
        }
        case Op::kVar: s = "x2"; break;
        case Op::kAdd: prec = 0; s = print_node(n.a, 0) + " + " + print_node(n.b, 1); break;
        case Op::kSub: prec = 0; s = print_node(n.a, 0) + " - " + print_node(n.b, 1); break;
        case Op::kMul: prec = 1; s = print_node(n.a, 1) + "*" + print_node(n.b, 2); break;
        case Op::kDiv: prec = 1; s = print_node(n.a, 1) + "/" + print_node(n.b, 2); break;
        case Op::kNeg: prec = 2; s = "-" + print_node(n.a, 2); break;
        case Op::kPowInt:
            prec = 2;
            s = print_node(n.a, 3) + "^" + std::to_string(n.ipow);
            break;
        case Op::kTanh: s = "tanh(" + print_node(n.a, 0) + ")"; break;
        case Op::kExp: s = "exp(" + print_node(n.a, 0) + ")"; break;
        case Op::kSin: s = "sin(" + print_node(n.a, 0) + ")"; break;
        case Op::kCos: s = "cos(" + print_node(n.a, 0) + ")"; break;
    }
    if (prec < parent_prec) return "(" + s + ")";
    return s;
}

std::string ProfileExpr::to_string() const { return print_node(root_, 0); }

}  // namespace shearspec
