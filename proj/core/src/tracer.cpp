#include "shearspec/tracer.hpp"

#include <algorithm>
#include <cmath>

#include "shearspec/errors.hpp"
#include "shearspec/rootfind.hpp"
#include "shearspec/winding.hpp"

namespace shearspec {

namespace {

void push_arc(std::vector<cplx>& pts, cplx center, double r, double th0, double th1, int n) {
    for (int i = 0; i < n; ++i) {
        double th = th0 + (th1 - th0) * i / n;
        pts.push_back(center + cplx(r * std::cos(th), r * std::sin(th)));
    }
}

void push_line(std::vector<cplx>& pts, cplx a, cplx b, int n) {
    for (int i = 0; i < n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / n));
}

}  // namespace

Region Region::rectangle(cplx lo, cplx hi, int n_per_side) {
    Region r;
    r.kind_ = Kind::kRectangle;
    r.lo_ = lo;
    r.hi_ = hi;
    r.density_ = n_per_side;
    return r;
}

Region Region::disk(cplx center, double radius, int n) {
    Region r;
    r.kind_ = Kind::kDisk;
    r.center_ = center;
    r.radius_ = radius;
    r.density_ = n;
    return r;
}

Region Region::upper_semicircle(const ShearProfile& p, double delta, int n_arc) {
    Region r;
    r.kind_ = Kind::kUpperSemicircle;
    r.m_ = 0.5 * (p.u_min() + p.u_max());
    r.R_ = 0.5 * p.range();
    r.delta_ = delta;
    r.density_ = n_arc;
    return r;
}

std::vector<cplx> Region::polyline() const {
    std::vector<cplx> pts;
    int n = density_;
    switch (kind_) {
        case Kind::kRectangle: {
            cplx a = lo_, b = cplx(hi_.real(), lo_.imag()), c = hi_,
                 d = cplx(lo_.real(), hi_.imag());
            push_line(pts, a, b, n);
            push_line(pts, b, c, n);
            push_line(pts, c, d, n);
            push_line(pts, d, a, n);
            break;
        }
        case Kind::kDisk:
            push_arc(pts, center_, radius_, 0.0, 2.0 * kPi, n);
            break;
        case Kind::kUpperSemicircle: {
            // counterclockwise: outer arc over the top, then the corridor at
            // height delta above the segment, with quarter-turns at the ends
            double lo = m_ - R_, hi = m_ + R_;
            double Rout = R_ + delta_;
            push_arc(pts, cplx(m_, 0.0), Rout, 0.0, kPi, 2 * n);
            // left quarter-circle around Umin: from (lo - delta, 0) up to (lo, delta)
            push_arc(pts, cplx(lo, 0.0), delta_, kPi, kPi / 2.0, n / 2);
            // corridor
            push_line(pts, cplx(lo, delta_), cplx(hi, delta_), 2 * n);
            // right quarter-circle around Umax: from (hi, delta) down to (hi + delta, 0)
            push_arc(pts, cplx(hi, 0.0), delta_, kPi / 2.0, 0.0, n / 2);
            break;
        }
    }
    return pts;
}

bool Region::contains(cplx c) const {
    switch (kind_) {
        case Kind::kRectangle:
            return c.real() > lo_.real() && c.real() < hi_.real() && c.imag() > lo_.imag() &&
                   c.imag() < hi_.imag();
        case Kind::kDisk:
            return std::abs(c - center_) < radius_;
        case Kind::kUpperSemicircle: {
            if (std::abs(c - cplx(m_, 0.0)) >= R_ + delta_) return false;
            if (c.imag() <= 0.0) return false;
            return dist_to_segment(c, m_ - R_, m_ + R_) > delta_;
        }
    }
    return false;
}

Region Region::adjusted(double amount) const {
    Region r = *this;
    switch (kind_) {
        case Kind::kRectangle:
            r.lo_ -= cplx(amount, amount);
            r.hi_ += cplx(amount, amount);
            break;
        case Kind::kDisk:
            r.radius_ = std::max(1e-12, r.radius_ + amount);
            break;
        case Kind::kUpperSemicircle:
            r.delta_ = std::max(1e-12, r.delta_ + amount);
            break;
    }
    return r;
}

int index_count(const ShearProfile& p, double g, double sigma, double k, const Region& region,
                const TracerOptions& opt) {
    double unit = (region.kind() == Region::Kind::kUpperSemicircle && region.margin() > 0)
                      ? region.margin()
                      : opt.delta_frac * p.range();
    const double offsets[] = {0.0, 0.5 * unit, -0.5 * unit, 1.0 * unit, 2.0 * unit};
    std::string last_err;
    for (double off : offsets) {
        Region reg = region.adjusted(off);
        std::vector<cplx> pts = reg.polyline();
        auto f = [&](cplx c) -> cplx {
            return eval_F(p, g, sigma, k, c, opt.solver).Fbold_sigma();
        };
        try {
            // edge pre-check: reject contours passing through near-zeros
            double maxv = 0.0, minv = 1e300;
            std::vector<cplx> vals;
            vals.reserve(pts.size());
            for (const cplx& z : pts) {
                cplx v = f(z);
                vals.push_back(v);
                maxv = std::max(maxv, std::abs(v));
                minv = std::min(minv, std::abs(v));
            }
            if (minv < 1e-9 * maxv) {
                last_err = "contour node too close to a zero";
                continue;
            }
            WindingResult wr = winding_number(f, pts);
            if (wr.residual > 0.2) {
                last_err = "winding residual too large";
                continue;
            }
            return wr.winding;
        } catch (const contour_through_zero_error& e) {
            last_err = e.what();
        }
    }
    throw contour_through_zero_error("index_count: retries exhausted: " + last_err);
}

double default_k_seed(const ShearProfile& p, double g) {
    double u1 = p.up(0.0);
    return 50.0 * std::max(1.0, u1 * u1 / g);
}

std::pair<cplx, cplx> seed_large_k(const ShearProfile& p, double g, double k) {
    double ak = std::abs(k);
    double u1 = p.up(0.0);
    double root = std::sqrt(g / ak * (1.0 + u1 * u1 / (4.0 * g * ak)));
    double base = p.u_max() - u1 / (2.0 * ak);
    return {cplx(base + root, 0.0), cplx(base - root, 0.0)};
}

PolishResult polish_mode(const ShearProfile& p, double g, double sigma, double k, cplx c0,
                         const TracerOptions& opt, int max_iter) {
    if (max_iter < 0) max_iter = opt.newton_max;
    auto f = [&](cplx c) { return eval_F(p, g, sigma, k, c, opt.solver).F_sigma(); };
    PolishResult res;
    cplx c = c0;
    double tol = opt.branch_tol * std::max(1.0, g);
    cplx fc = f(c);
    cplx df = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        double dstep = opt.fd_step * std::max(1.0, std::abs(c));
        // keep the finite-difference stencil off the lower half plane when the
        // point sits on or near the segment
        if (std::abs(c.imag()) < 1e-14 && c.real() > p.u_min() && c.real() < p.u_max()) {
            cplx a = f(c + dstep), b = f(c - dstep);
            df = (a - b) / (2.0 * dstep);
        } else {
            df = (f(c + dstep) - f(c - dstep)) / (2.0 * dstep);
        }
        if (std::abs(df) < 1e-300) break;
        cplx step = fc / df;
        cplx cn = c - step;
        cplx fn = f(cn);
        // crude line search
        int half = 0;
        while (std::abs(fn) > std::abs(fc) && half++ < 4) {
            step *= 0.5;
            cn = c - step;
            fn = f(cn);
        }
        c = cn;
        fc = fn;
        if (std::abs(fc) < tol) {
            res.converged = true;
            ++it;
            break;
        }
    }
    res.c = c;
    res.iterations = it;
    res.dFdc = df;
    if (!res.converged && std::abs(fc) < 100 * tol) res.converged = true;
    return res;
}

BifurcationSlope bifurcation_slope(const ShearProfile& p, double g, double sigma, double k0,
                                   double c0, const TracerOptions& opt) {
    const double span = p.range();
    BifurcationSlope out;
    auto Fs = [&](double k, double c) {
        return eval_F(p, g, sigma, k, cplx(c, 0.0), opt.solver).F_sigma();
    };
    double dk = opt.fd_step * std::max(1.0, std::abs(k0));
    out.dkF = (Fs(k0 + dk, c0) - Fs(k0 - dk, c0)) / (2.0 * dk);
    double dc = opt.fd_step * span;
    bool at_bottom = std::abs(c0 - p.u_min()) < 10 * dc;
    bool at_top = std::abs(c0 - p.u_max()) < 10 * dc;
    if (at_bottom) {
        out.dcF = (-3.0 * Fs(k0, c0) + 4.0 * Fs(k0, c0 + dc) - Fs(k0, c0 + 2 * dc)) / (2.0 * dc);
    } else if (at_top) {
        out.dcF = (3.0 * Fs(k0, c0) - 4.0 * Fs(k0, c0 - dc) + Fs(k0, c0 - 2 * dc)) / (2.0 * dc);
    } else {
        out.dcF = (Fs(k0, c0 + dc) - Fs(k0, c0 - dc)) / (2.0 * dc);
    }
    double mod2 = std::norm(out.dcF);
    if (std::sqrt(mod2) < opt.simple_tol)
        throw degenerate_root_error("bifurcation_slope: |dF/dcR| below simple-root tolerance");
    out.slope = -out.dkF / out.dcF;
    out.cI_prime = out.dkF.real() * out.dcF.imag() / mod2;
    return out;
}

namespace {

// Locate where a branch touches the singular segment: snap to U(-h), U(0) or
// an inflection value when close, then solve F(., c_end) = 0 for k_end.
Termination refine_segment_touch(const ShearProfile& p, double g, double sigma, double k_at,
                                 cplx c_at, const TracerOptions& opt) {
    Termination t;
    t.kind = TerminationKind::kReachedSegment;
    double span = p.range();
    double c_end = std::clamp(c_at.real(), p.u_min(), p.u_max());
    double snap = 50.0 * opt.delta_frac * span;
    if (std::abs(c_end - p.u_min()) < snap) c_end = p.u_min();
    else if (std::abs(c_end - p.u_max()) < snap) c_end = p.u_max();
    else {
        for (const auto& ip : p.inflections())
            if (std::abs(c_end - ip.c0) < snap) c_end = ip.c0;
    }
    t.c_end = cplx(c_end, 0.0);
    t.k_end = k_at;
    // polish k_end on the real dispersion relation along the segment
    auto Fr = [&](double k) {
        return eval_F(p, g, sigma, k, cplx(c_end, 0.0), opt.solver).F_sigma().real();
    };
    double w = std::max(0.05 * std::abs(k_at), 1e-3);
    double lo = std::max(k_at - w, 1e-6), hi = k_at + w;
    double flo = Fr(lo), fhi = Fr(hi);
    int guard = 0;
    while ((flo > 0) == (fhi > 0) && guard++ < 6) {
        w *= 2.0;
        lo = std::max(k_at - w, 1e-6);
        hi = k_at + w;
        flo = Fr(lo);
        fhi = Fr(hi);
    }
    if ((flo > 0) != (fhi > 0)) t.k_end = brent(Fr, lo, hi, 1e-12, 1e-10);
    return t;
}

}  // namespace

Branch trace_branch(const ShearProfile& p, double g, double sigma, TraceSeed seed,
                    double k_target, const TracerOptions& opt, bool continue_through_segment,
                    BranchLabel label) {
    Branch br;
    br.label = label;
    const double span = p.range();
    const double delta_seg = opt.delta_frac * span;
    const int dir = (k_target >= seed.k) ? 1 : -1;

    PolishResult pr = polish_mode(p, g, sigma, seed.k, seed.c, opt);
    if (!pr.converged)
        throw precondition_error("trace_branch: seed does not satisfy |F| < branch_tol");
    if (std::abs(pr.dFdc) < opt.simple_tol)
        throw precondition_error("trace_branch: seed root is not simple");
    br.points.push_back({seed.k, pr.c, pr.dFdc});

    double h = opt.step_init;
    int easy = 0;
    bool crossed_once = false;
    while (true) {
        const BranchPoint& last = br.points.back();
        if ((dir > 0 && last.k >= k_target - 1e-12) || (dir < 0 && last.k <= k_target + 1e-12)) {
            br.termination.kind = TerminationKind::kKRangeEnd;
            br.termination.k_end = last.k;
            br.termination.c_end = last.c;
            break;
        }
        double k_next = last.k + dir * h;
        if ((dir > 0 && k_next > k_target) || (dir < 0 && k_next < k_target)) k_next = k_target;
        // secant predictor
        cplx c_pred = last.c;
        if (br.points.size() >= 2) {
            const BranchPoint& prev = br.points[br.points.size() - 2];
            if (std::abs(last.k - prev.k) > 1e-14)
                c_pred = last.c + (last.c - prev.c) * ((k_next - last.k) / (last.k - prev.k));
        }
        // keep the predictor on the safe side of the segment when tracing a
        // genuinely complex branch
        if (last.c.imag() > 0.0 && c_pred.imag() < 0.0) c_pred = cplx(c_pred.real(), 0.0);

        PolishResult cand = polish_mode(p, g, sigma, k_next, c_pred, opt);
        bool ok = cand.converged && std::abs(cand.c - c_pred) < std::max(10 * h, 0.2) * std::max(1.0, span);
        if (ok && std::abs(cand.dFdc) < opt.simple_tol) ok = false;
        if (!ok) {
            h *= 0.5;
            easy = 0;
            if (h < opt.step_min) {
                // distinguish a segment touch from a genuinely lost root
                if (dist_to_segment(last.c, p.u_min(), p.u_max()) < 20 * delta_seg) {
                    br.termination = refine_segment_touch(p, g, sigma, last.k, last.c, opt);
                    if (continue_through_segment && !crossed_once) {
                        // bifurcation local model through the endpoint
                        try {
                            BifurcationSlope bs =
                                bifurcation_slope(p, g, sigma, br.termination.k_end,
                                                  br.termination.c_end.real(), opt);
                            double k_new = br.termination.k_end + dir * std::max(1e-3, 20 * opt.step_min);
                            cplx c_new = br.termination.c_end +
                                         bs.slope * (k_new - br.termination.k_end);
                            if (c_new.imag() < 0.0) c_new = cplx(c_new.real(), -c_new.imag());
                            PolishResult pr2 = polish_mode(p, g, sigma, k_new, c_new, opt);
                            if (pr2.converged && std::abs(pr2.dFdc) > opt.simple_tol) {
                                br.points.push_back({br.termination.k_end, br.termination.c_end,
                                                     bs.dcF});
                                br.points.push_back({k_new, pr2.c, pr2.dFdc});
                                crossed_once = true;
                                h = opt.step_init / 4;
                                easy = 0;
                                continue;
                            }
                        } catch (const std::exception&) {
                        }
                    }
                    break;
                }
                throw lost_root_error("trace_branch: corrector diverged and step underflowed");
            }
            continue;
        }
        // segment-approach check on the accepted point
        if (dist_to_segment(cand.c, p.u_min(), p.u_max()) < delta_seg) {
            br.termination = refine_segment_touch(p, g, sigma, k_next, cand.c, opt);
            br.points.push_back({br.termination.k_end, br.termination.c_end, cand.dFdc});
            if (continue_through_segment && !crossed_once) {
                try {
                    BifurcationSlope bs = bifurcation_slope(p, g, sigma, br.termination.k_end,
                                                            br.termination.c_end.real(), opt);
                    double k_new = br.termination.k_end + dir * std::max(1e-3, 20 * opt.step_min);
                    cplx c_new = br.termination.c_end + bs.slope * (k_new - br.termination.k_end);
                    if (c_new.imag() < 0.0) c_new = cplx(c_new.real(), -c_new.imag());
                    PolishResult pr2 = polish_mode(p, g, sigma, k_new, c_new, opt);
                    if (pr2.converged && std::abs(pr2.dFdc) > opt.simple_tol) {
                        br.points.push_back({k_new, pr2.c, pr2.dFdc});
                        crossed_once = true;
                        h = opt.step_init / 4;
                        easy = 0;
                        continue;
                    }
                } catch (const std::exception&) {
                }
            }
            break;
        }
        br.points.push_back({k_next, cand.c, cand.dFdc});
        if (++easy >= 4) {
            h = std::min(2.0 * h, opt.step_max);
            easy = 0;
        }
    }
    return br;
}

namespace {

// Approximate imaginary part of a near-segment root from the bifurcation
// local model; used only to seed Newton.
double local_model_imag(const ShearProfile& p, double g, double sigma, double k, double cR,
                        const TracerOptions& opt) {
    try {
        double yi = eval_YI_formula(p, k, cR, opt.solver);
        auto Fs = [&](double c) {
            return eval_F(p, g, sigma, k, cplx(c, 0.0), opt.solver).F_sigma();
        };
        double dc = opt.fd_step * p.range();
        double dFr = ((Fs(cR + dc) - Fs(cR - dc)) / (2.0 * dc)).real();
        if (std::abs(dFr) < 1e-12) return 0.0;
        double u0c = p.u_max() - cR;
        return -u0c * u0c * yi / dFr;
    } catch (const std::exception&) {
        return 0.0;
    }
}

}  // namespace

ModeCensus mode_census(const ShearProfile& p, double g, double sigma, double k,
                       const TracerOptions& opt, const NeutralModeReport* neutral) {
    ModeCensus mc;
    mc.k = k;
    const double span = p.range();
    double delta = opt.delta_frac * span;

    // index over the upper semicircle region, shrinking the margin if the
    // contour lands on a root (bifurcation wave numbers)
    int idx = -1;
    for (int att = 0; att < 4 && idx < 0; ++att) {
        try {
            Region reg = Region::upper_semicircle(p, delta, 48);
            idx = index_count(p, g, sigma, k, reg, opt);
        } catch (const contour_through_zero_error&) {
            delta *= 0.5;
        }
    }
    if (idx < 0) idx = 0;  // persistent failure: flagged below
    mc.index_upper = idx;
    mc.delta_used = delta;

    // locate unstable modes
    if (idx > 0) {
        std::vector<cplx> found;
        auto try_seed = [&](cplx seed) {
            PolishResult pr = polish_mode(p, g, sigma, k, seed, opt, 30);
            if (!pr.converged || pr.c.imag() <= 0.0) return;
            if (dist_to_segment(pr.c, p.u_min(), p.u_max()) <= 0.0) return;
            for (const cplx& q : found)
                if (std::abs(q - pr.c) < 1e-7 * std::max(1.0, span)) return;
            // Howard semicircle containment with slack
            double rad = std::abs(pr.c - cplx(0.5 * (p.u_min() + p.u_max()), 0.0));
            if (rad > 0.5 * span + 1e-6) return;
            found.push_back(pr.c);
        };
        // seeds from the segment scan with the local bifurcation model
        {
            int nscan = 41;
            double best = 1e300;
            std::vector<double> dips;
            std::vector<double> vals(static_cast<std::size_t>(nscan));
            auto cs = linspace(p.u_min() + 3 * delta, p.u_max() - 3 * delta, nscan);
            for (int i = 0; i < nscan; ++i) {
                DispersionSample s =
                    eval_F(p, g, sigma, k, cplx(cs[static_cast<std::size_t>(i)], 0.0), opt.solver);
                vals[static_cast<std::size_t>(i)] = std::abs(s.F_sigma());
                best = std::min(best, vals[static_cast<std::size_t>(i)]);
            }
            for (int i = 1; i + 1 < nscan; ++i)
                if (vals[static_cast<std::size_t>(i)] < vals[static_cast<std::size_t>(i - 1)] &&
                    vals[static_cast<std::size_t>(i)] <= vals[static_cast<std::size_t>(i + 1)])
                    dips.push_back(cs[static_cast<std::size_t>(i)]);
            for (double cr : dips) {
                double im = local_model_imag(p, g, sigma, k, cr, opt);
                double im_seed = std::max({im, 2.0 * delta});
                try_seed(cplx(cr, im_seed));
            }
        }
        // coarse grid fallback
        if (static_cast<int>(found.size()) != idx) {
            auto re = linspace(p.u_min() - 0.05 * span, p.u_max() + 0.05 * span, 21);
            auto im = linspace(2 * delta, 0.5 * span, 9);
            for (double rr : re)
                for (double ii : im) try_seed(cplx(rr, ii));
        }
        // quadtree refinement when the count still disagrees
        if (static_cast<int>(found.size()) != idx) {
            struct Cell {
                cplx lo, hi;
                int depth;
            };
            std::vector<Cell> stack{{cplx(p.u_min() - 2 * delta, delta),
                                     cplx(p.u_max() + 2 * delta, 0.5 * span + 2 * delta), 0}};
            while (!stack.empty()) {
                Cell cell = stack.back();
                stack.pop_back();
                int ci = 0;
                try {
                    Region reg = Region::rectangle(cell.lo, cell.hi, 16);
                    ci = index_count(p, g, sigma, k, reg, opt);
                } catch (const contour_through_zero_error&) {
                    mc.multiple_root_flag = true;
                    continue;
                }
                if (ci == 0) continue;
                if (ci == 1 || cell.depth >= 12) {
                    if (ci > 1) mc.multiple_root_flag = true;
                    try_seed(0.5 * (cell.lo + cell.hi));
                    continue;
                }
                cplx mid = 0.5 * (cell.lo + cell.hi);
                stack.push_back({cell.lo, mid, cell.depth + 1});
                stack.push_back({cplx(mid.real(), cell.lo.imag()),
                                 cplx(cell.hi.real(), mid.imag()), cell.depth + 1});
                stack.push_back({cplx(cell.lo.real(), mid.imag()),
                                 cplx(mid.real(), cell.hi.imag()), cell.depth + 1});
                stack.push_back({mid, cell.hi, cell.depth + 1});
            }
        }
        for (const cplx& c : found) {
            CensusMode m;
            m.c = c;
            m.absF = std::abs(eval_F(p, g, sigma, k, c, opt.solver).F_sigma());
            mc.unstable.push_back(m);
        }
        std::sort(mc.unstable.begin(), mc.unstable.end(),
                  [](const CensusMode& a, const CensusMode& b) { return a.c.real() < b.c.real(); });
    }

    // real-axis neutral modes outside the segment, clipped to a window of
    // total width 3(Umax - Umin)
    {
        auto Fr = [&](double c) {
            return eval_F(p, g, sigma, k, cplx(c, 0.0), opt.solver).F_sigma().real();
        };
        auto scan = [&](double lo, double hi) {
            int n = 161;
            auto cs = linspace(lo, hi, n);
            double prev = Fr(cs[0]);
            for (int i = 1; i < n; ++i) {
                double cur = Fr(cs[static_cast<std::size_t>(i)]);
                if ((prev > 0) != (cur > 0)) {
                    double root = brent(Fr, cs[static_cast<std::size_t>(i - 1)],
                                        cs[static_cast<std::size_t>(i)], 1e-12, 1e-10);
                    mc.neutral_nonsingular.push_back(root);
                }
                prev = cur;
            }
        };
        scan(p.u_min() - span, p.u_min() - 1e-9 * span);
        scan(p.u_max() + 1e-9 * span, p.u_max() + span);
    }

    // singular neutral modes at critical wave numbers
    if (neutral) {
        double ktol = 1e-6 * (1.0 + std::abs(k));
        if (std::abs(k - neutral->k_minus) < ktol)
            mc.singular_neutral.push_back(p.u_min());
        for (const auto& e : neutral->entries)
            for (double ks : e.S.ks)
                if (std::abs(k - ks) < ktol) mc.singular_neutral.push_back(e.c0);
    }

    // extremely weak large-k modes: below contour resolution, report with the
    // predicted sign of U''(U^{-1}(c_R))
    if (idx == 0 && k >= default_k_seed(p, g)) {
        auto seeds = seed_large_k(p, g, k);
        cplx cm = seeds.second;
        if (cm.real() > p.u_min() && cm.real() < p.u_max()) {
            PolishResult pr = polish_mode(p, g, sigma, k, cm, opt);
            if (pr.converged && std::abs(pr.c.imag()) < 1e-13 * std::max(1.0, std::abs(pr.c))) {
                CensusMode m;
                m.c = pr.c;
                m.absF = 0.0;
                m.sub_resolution = true;
                double x = p.invert(std::clamp(pr.c.real(), p.u_min(), p.u_max()));
                double u2 = p.upp(x);
                m.predicted_sign = (u2 > 0) - (u2 < 0);
                mc.unstable.push_back(m);
            }
        }
    }
    return mc;
}

std::optional<Branch> closed_low_k_branch(const ShearProfile& p, double g, double c0,
                                          const TracerOptions& opt) {
    // preconditions: interior inflection with U''' < 0 and F0(c0) > 0
    const InflectionPoint* ip = nullptr;
    for (const auto& q : p.inflections())
        if (std::abs(q.c0 - c0) <= 1e-8 * std::max(1.0, p.range())) ip = &q;
    if (!ip) throw not_inflection_error("closed_low_k_branch: c0 is not an inflection value");
    if (ip->uppp_sign >= 0)
        throw precondition_error("closed_low_k_branch: requires U'''(x20) < 0");
    double F0 = eval_F0(p, c0, opt.solver);
    if (F0 <= 0.0) throw precondition_error("closed_low_k_branch: requires F0(c0) > 0");
    if (g <= F0) return std::nullopt;  // k1 absent

    SSet S = find_S(p, g, c0, opt.solver);
    if (S.ks.size() < 2 || S.ks.front() <= 0.0) return std::nullopt;
    double k1 = S.ks.front();

    BifurcationSlope bs = bifurcation_slope(p, g, 0.0, k1, c0, opt);
    double kstep = std::max(1e-3 * k1, 1e-4);
    cplx c_seed = cplx(c0, 0.0) + bs.slope * (-kstep);
    if (c_seed.imag() <= 0.0) c_seed = cplx(c_seed.real(), std::abs(c_seed.imag()) + 1e-12);
    PolishResult pr = polish_mode(p, g, 0.0, k1 - kstep, c_seed, opt, 40);
    if (!pr.converged || pr.c.imag() <= 0.0) return std::nullopt;

    TracerOptions o2 = opt;
    o2.step_max = std::min(opt.step_max, k1 / 8.0);
    Branch half = trace_branch(p, g, 0.0, TraceSeed{k1 - kstep, pr.c}, 0.0, o2, false,
                               BranchLabel::kInflectionBranch);
    // assemble the even closed branch over [-k1, k1]
    Branch full;
    full.label = BranchLabel::kInflectionBranch;
    full.points.push_back({-k1, cplx(c0, 0.0), bs.dcF});
    for (auto it = half.points.rbegin(); it != half.points.rend(); ++it)
        full.points.push_back({-it->k, it->c, it->dFdc});
    for (const auto& bp : half.points)
        if (bp.k > 0.0) full.points.push_back(bp);
    full.points.push_back({k1, cplx(c0, 0.0), bs.dcF});
    full.termination.kind = TerminationKind::kReachedSegment;
    full.termination.k_end = k1;
    full.termination.c_end = cplx(c0, 0.0);
    return full;
}

}  // namespace shearspec
