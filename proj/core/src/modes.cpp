#include "shearspec/modes.hpp"

#include <cmath>
#include <lapacke.h>

#include "shearspec/errors.hpp"
#include "shearspec/rootfind.hpp"

namespace shearspec {

namespace {

// Potential V = U''/(U - c0) with the removable singularity at x20 filled in
// by the local expansion (U''(x20) = 0 at an inflection value).
double sl_potential(const ShearProfile& p, double c0, double x20, double x) {
    double t = x - x20;
    if (std::abs(t) > 1e-4) return p.upp(x) / (p.u(x) - c0);
    double u3 = p.uppp(x20), u4 = p.upppp(x20), u1 = p.up(x20);
    double num = u3 + 0.5 * u4 * t;
    double den = u1 + u3 * t * t / 6.0;
    return num / den;
}

double require_inflection(const ShearProfile& p, double c0) {
    for (const auto& ip : p.inflections())
        if (std::abs(ip.c0 - c0) <= 1e-8 * std::max(1.0, p.range())) return ip.x20;
    throw not_inflection_error("c0 is not an interior inflection value of U");
}

struct TridiagEigs {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // empty unless requested
};

TridiagEigs tridiag_eigs_range(std::vector<double> d, std::vector<double> e, double vl,
                               double vu, bool want_vectors) {
    lapack_int n = static_cast<lapack_int>(d.size());
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<double> z;
    std::vector<lapack_int> isuppz(static_cast<std::size_t>(2 * n));
    lapack_int m = 0;
    char jobz = want_vectors ? 'V' : 'N';
    if (want_vectors) z.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, jobz, 'V', n, d.data(), e.data(), vl,
                                     vu, 0, 0, 0.0, &m, w.data(),
                                     want_vectors ? z.data() : nullptr, n, isuppz.data());
    if (info != 0) throw numeric_error("dstevr failed, info=" + std::to_string(info));
    TridiagEigs out;
    out.values.assign(w.begin(), w.begin() + m);
    if (want_vectors) {
        out.vectors.resize(static_cast<std::size_t>(m));
        for (lapack_int j = 0; j < m; ++j)
            out.vectors[static_cast<std::size_t>(j)].assign(
                z.begin() + static_cast<std::size_t>(j) * static_cast<std::size_t>(n),
                z.begin() + static_cast<std::size_t>(j + 1) * static_cast<std::size_t>(n));
    }
    return out;
}

// Assemble the symmetric tridiagonal FD matrix for R = -d^2 + V on (-h, 0),
// Dirichlet at -h, and either Dirichlet or the Robin surface condition at 0.
// Robin row uses the half-cell mass weight; the similarity transform keeps
// the matrix symmetric.
void assemble(const ShearProfile& p, double c0, double x20, int n_nodes, bool robin,
              double robin_r, std::vector<double>& diag, std::vector<double>& off) {
    const double h = p.h();
    const double dx = h / (n_nodes - 1);
    int n_unknown = robin ? n_nodes - 1 : n_nodes - 2;
    diag.assign(static_cast<std::size_t>(n_unknown), 0.0);
    off.assign(static_cast<std::size_t>(std::max(0, n_unknown - 1)), 0.0);
    for (int j = 1; j <= n_unknown; ++j) {
        double x = -h + j * dx;
        double V = sl_potential(p, c0, x20, x);
        diag[static_cast<std::size_t>(j - 1)] = 2.0 / (dx * dx) + V;
    }
    for (std::size_t j = 0; j + 1 < static_cast<std::size_t>(n_unknown); ++j)
        off[j] = -1.0 / (dx * dx);
    if (robin && n_unknown >= 2) {
        diag[static_cast<std::size_t>(n_unknown - 1)] += -2.0 * robin_r / dx;
        off[static_cast<std::size_t>(n_unknown - 2)] = -std::sqrt(2.0) / (dx * dx);
    }
}

std::vector<double> eigs_leq_zero(const ShearProfile& p, double c0, double x20, int n_nodes,
                                  bool robin, double robin_r, double vu,
                                  TridiagEigs* full = nullptr) {
    std::vector<double> d, e;
    assemble(p, c0, x20, n_nodes, robin, robin_r, d, e);
    double floor = -sqr(50.0 / p.h());  // discretization artifacts below this
    TridiagEigs te = tridiag_eigs_range(std::move(d), std::move(e), floor, vu,
                                        full != nullptr);
    if (full) *full = te;
    return te.values;
}

}  // namespace

std::vector<SLEigenvalue> sl_negative_eigenvalues(const ShearProfile& p, double g, double c0,
                                                  const SolverOptions& opt, int n_nodes) {
    double x20 = require_inflection(p, c0);
    const double u0c = p.u_max() - c0;
    const double robin_r = (p.up(0.0) * u0c + g) / (u0c * u0c);
    const double vu = sqr(0.5 / p.h());  // keep a near-zero eigenvalue visible

    TridiagEigs fine;
    std::vector<double> lam1 = eigs_leq_zero(p, c0, x20, n_nodes, true, robin_r, vu);
    std::vector<double> lam2 = eigs_leq_zero(p, c0, x20, 2 * n_nodes - 1, true, robin_r, vu,
                                             &fine);

    std::vector<SLEigenvalue> out;
    for (std::size_t i = 0; i < lam2.size(); ++i) {
        double l2 = lam2[i];
        // pair with the closest coarse eigenvalue for Richardson
        double l1 = l2;
        double best = 1e300;
        for (double v : lam1)
            if (std::abs(v - l2) < best) {
                best = std::abs(v - l2);
                l1 = v;
            }
        double lam = (4.0 * l2 - l1) / 3.0;
        if (lam > 1e-10 * sqr(1.0 / p.h())) continue;  // keep only <= 0 (tolerant)
        SLEigenvalue ev;
        ev.lambda = lam;
        double k_fd = std::sqrt(std::max(-lam, 0.0));
        // polish against the dispersion formulation
        auto Fr = [&](double k) { return eval_F(p, g, 0.0, k, cplx(c0, 0.0), opt).F.real(); };
        double k_pol = k_fd;
        if (k_fd < 1e-3) {
            k_pol = 0.0;
        } else {
            double w = std::max(0.05 * k_fd, 1e-3);
            double lo = std::max(k_fd - w, 1e-6), hi = k_fd + w;
            double flo = Fr(lo), fhi = Fr(hi);
            int guard = 0;
            while ((flo > 0) == (fhi > 0) && guard++ < 8) {
                w *= 2.0;
                lo = std::max(k_fd - w, 1e-6);
                hi = k_fd + w;
                flo = Fr(lo);
                fhi = Fr(hi);
            }
            if ((flo > 0) != (fhi > 0)) k_pol = brent(Fr, lo, hi, 1e-13, 1e-11);
        }
        ev.k = k_pol;
        ev.dispersion_residual = std::abs(Fr(k_pol));
        // eigenfunction sign structure from the fine-grid vector
        if (i < fine.vectors.size()) {
            const auto& vec = fine.vectors[i];
            int changes = 0;
            double prev = 0.0;
            for (double vv : vec) {
                if (std::abs(vv) < 1e-12) continue;
                if (prev != 0.0 && (vv > 0) != (prev > 0)) ++changes;
                prev = vv;
            }
            ev.sign_changes = changes;
            ev.eigenfunction_positive = (changes == 0);
        }
        out.push_back(ev);
    }
    std::sort(out.begin(), out.end(),
              [](const SLEigenvalue& a, const SLEigenvalue& b) { return a.lambda < b.lambda; });
    return out;
}

std::optional<double> find_k_C(const ShearProfile& p, double c0, const SolverOptions& opt,
                               int n_nodes) {
    double x20 = require_inflection(p, c0);
    std::vector<double> lam1 = eigs_leq_zero(p, c0, x20, n_nodes, false, 0.0, 1e300);
    std::vector<double> lam2 = eigs_leq_zero(p, c0, x20, 2 * n_nodes - 1, false, 0.0, 1e300);
    if (lam1.empty() || lam2.empty()) return std::nullopt;
    double l1 = *std::min_element(lam1.begin(), lam1.end());
    double l2 = *std::min_element(lam2.begin(), lam2.end());
    double lam = (4.0 * l2 - l1) / 3.0;
    if (lam >= -1e-8) return std::nullopt;
    double k_fd = std::sqrt(-lam);
    // polish by shooting on y-(k, c0, 0) = 0 (real at an inflection value)
    auto yv = [&](double k) {
        RaySolution s = solve_limit(p, k, c0, opt);
        return s.y_top().real();  // positive scale factor preserves the sign
    };
    double w = std::max(0.05 * k_fd, 1e-3);
    double lo = std::max(k_fd - w, 1e-6), hi = k_fd + w;
    double flo = yv(lo), fhi = yv(hi);
    int guard = 0;
    while ((flo > 0) == (fhi > 0) && guard++ < 10) {
        w *= 2.0;
        lo = std::max(k_fd - w, 1e-6);
        hi = k_fd + w;
        flo = yv(lo);
        fhi = yv(hi);
    }
    if ((flo > 0) == (fhi > 0)) return k_fd;  // FD value; shooting bracket not found
    return brent(yv, lo, hi, 1e-12);
}

double eval_F0(const ShearProfile& p, double c0, const SolverOptions& opt) {
    require_inflection(p, c0);
    cplx Y = eval_Y(p, 0.0, cplx(c0, 0.0), opt);  // throws y0_vanishes on the k_C = 0 edge
    double u0c = p.u_max() - c0;
    return u0c * u0c * Y.real() - p.up(0.0) * u0c;
}

double k_scan_cap(const ShearProfile& p, double g, double c0) {
    double u0c = std::max(p.u_max() - c0, 1e-6 * p.range());
    double k_est = (g + p.up(0.0) * u0c) / (u0c * u0c);
    return std::min(std::max(4.0 * k_est, 8.0 / p.h()), 200.0 / p.h());
}

SSet find_S(const ShearProfile& p, double g, double c0, const SolverOptions& opt) {
    require_inflection(p, c0);
    SSet out;
    std::optional<double> kC = find_k_C(p, c0, opt);
    double F0 = 0.0;
    bool have_F0 = true;
    try {
        F0 = eval_F0(p, c0, opt);
    } catch (const y0_vanishes_error&) {
        have_F0 = false;  // k_C = 0 edge
    }
    auto Fr = [&](double k) { return eval_F(p, g, 0.0, k, cplx(c0, 0.0), opt).F.real(); };

    const double cap = k_scan_cap(p, g, c0);
    const double k_star = kC.value_or(0.0);

    // k0: unique root above k_star (above the F-pole at k_C when it exists)
    double a = (k_star > 0.0) ? k_star * 1.02 + 1e-3 : 1e-4;
    double fa = Fr(a);
    if (k_star > 0.0) {
        int guard = 0;
        while (fa > 0.0 && guard++ < 20) {  // move toward the pole where F -> -inf
            a = k_star + 0.5 * (a - k_star);
            fa = Fr(a);
        }
    }
    double k0;
    {
        auto br = bracket_right(Fr, a, std::max(2.0 * a, 1.0 / p.h()), cap);
        k0 = brent(Fr, br.first, br.second, 1e-13, 1e-11);
    }

    // k1 in [0, k_C) iff k_C exists and g >= F0
    bool want_k1 = kC.has_value() && have_F0 && g >= F0 - 1e-10 * std::max(1.0, std::abs(F0));
    if (kC && have_F0 && std::abs(g - F0) <= 1e-10 * std::max(1.0, std::abs(F0))) {
        out.marginal_k1 = true;
        out.ks.push_back(0.0);
    } else if (want_k1) {
        double b = *kC * (1.0 - 1e-3);
        double fb = Fr(b);
        int guard = 0;
        while (fb < 0.0 && guard++ < 20) {  // approach the pole where F -> +inf
            b = *kC - 0.25 * (*kC - b);
            fb = Fr(b);
        }
        double f0v = Fr(0.0);
        if (f0v <= 0.0 && fb > 0.0) {
            double k1 = brent(Fr, 0.0, b, 1e-13, 1e-11);
            out.ks.push_back(k1);
            if (*kC - k1 < 1e-4) out.ill_conditioned_gap = true;
        }
    }
    out.ks.push_back(k0);
    std::sort(out.ks.begin(), out.ks.end());

    // positivity of the k0 eigenfunction on (-h, 0]
    {
        SolverOptions o2 = opt;
        o2.grid_n = 65;
        RaySolution s = solve_limit(p, k0, c0, o2);
        bool pos = true;
        for (std::size_t i = 1; i < s.grid.size(); ++i)
            if (s.y[i].real() <= 0.0) pos = false;
        out.k0_eigenfunction_positive = pos;
    }
    return out;
}

CriticalWavenumbers find_k_minus(const ShearProfile& p, double g, double sigma,
                                 const SolverOptions& opt) {
    CriticalWavenumbers out;
    const double umin = p.u_min();
    auto Fs = [&](double k) {
        return eval_F(p, g, sigma, k, cplx(umin, 0.0)).F_sigma().real();
    };
    const double cap = std::max(k_scan_cap(p, g, umin), 1.0 / p.h());
    if (sigma == 0.0) {
        // F(0, U(-h)) = -g < 0 and F grows for large k: bracket and bisect
        auto br = bracket_right(Fs, 0.0, 1.0 / p.h(), 2.0 * cap);
        double km = brent(Fs, br.first, br.second, 1e-13, 1e-10);
        out.g_sharp = std::numeric_limits<double>::infinity();
        out.ks.push_back(km);
        return out;
    }
    // sigma > 0: F_sigma(., U(-h)) is concave in K = k^2; locate its max
    auto FsK = [&](double K) { return Fs(std::sqrt(std::max(K, 0.0))); };
    double K_hi = 1.0;
    {
        double prev = FsK(0.0);
        int guard = 0;
        while (guard++ < 60) {
            double v = FsK(K_hi);
            if (v < prev && v < FsK(K_hi / 2.0)) break;
            prev = std::max(prev, v);
            K_hi *= 2.0;
            if (K_hi > sqr(400.0 / p.h())) break;
        }
    }
    double K_star = golden_max(FsK, 0.0, K_hi, 1e-12 * std::max(1.0, K_hi));
    double fmax = FsK(K_star);
    out.g_sharp = fmax + g;
    double tol = 1e-10 * std::max(1.0, std::abs(g));
    if (fmax < -tol) return out;  // no roots: g > g_sharp
    if (fmax <= tol) {
        out.ks.push_back(std::sqrt(K_star));  // double root at the max
        return out;
    }
    // two roots around K_star
    double kl = 0.0;
    if (FsK(0.0) < 0.0) kl = brent(FsK, 0.0, K_star, 1e-13, 1e-10);
    double K_right = K_star * 2.0 + 1.0;
    while (FsK(K_right) > 0.0 && K_right < sqr(800.0 / p.h())) K_right *= 2.0;
    double kr = brent(FsK, K_star, K_right, 1e-13, 1e-10);
    out.ks.push_back(std::sqrt(std::max(kl, 0.0)));
    out.ks.push_back(std::sqrt(kr));
    std::sort(out.ks.begin(), out.ks.end());
    return out;
}

NeutralModeReport neutral_mode_report(const ShearProfile& p, double g, double sigma,
                                      const SolverOptions& opt) {
    NeutralModeReport rep;
    rep.g = g;
    rep.sigma = sigma;
    rep.k_minus = find_k_minus(p, g, 0.0, opt).ks.front();
    for (const auto& ip : p.inflections()) {
        InflectionModeEntry e;
        e.x20 = ip.x20;
        e.c0 = ip.c0;
        e.uppp_sign = ip.uppp_sign;
        e.k_C = find_k_C(p, ip.c0, opt);
        try {
            e.F0 = eval_F0(p, ip.c0, opt);
        } catch (const y0_vanishes_error&) {
            e.F0 = std::numeric_limits<double>::quiet_NaN();
        }
        e.S = find_S(p, g, ip.c0, opt);
        if (e.S.marginal_k1) e.classification = "marginal_pair";
        else if (e.S.ks.size() == 2) e.classification = "pair_k1_k0";
        else e.classification = "single_k0";
        rep.entries.push_back(std::move(e));
    }
    if (sigma > 0.0) rep.sigma_variant = find_k_minus(p, g, sigma, opt);
    return rep;
}

}  // namespace shearspec
