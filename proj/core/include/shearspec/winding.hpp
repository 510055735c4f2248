#pragma once

#include <cmath>
#include <list>
#include <utility>
#include <vector>

#include "shearspec/errors.hpp"
#include "shearspec/util.hpp"

namespace shearspec {

struct WindingResult {
    int winding = 0;
    double min_abs_scaled = 0.0;  // smallest |f| seen among nodes (scaled values)
    double residual = 0.0;        // |total_arg/2pi - winding|
    int nodes = 0;
};

/// Winding number of f along the closed polyline pts (last->first edge
/// implied). f returns the (possibly rescaled by a positive factor) value;
/// positive rescaling does not change the argument. Adaptive midpoint
/// insertion until consecutive arguments differ by < pi/4.
template <typename F>
WindingResult winding_number(F&& f, const std::vector<cplx>& pts, int max_nodes = 60000) {
    struct Node {
        cplx z;
        cplx v;
    };
    std::list<Node> ring;
    for (const cplx& z : pts) ring.push_back({z, f(z)});
    auto arg_diff = [](const cplx& a, const cplx& b) {
        return std::arg(b / a);  // principal value in (-pi, pi]
    };
    int total = static_cast<int>(ring.size());
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = ring.begin(); it != ring.end(); ++it) {
            auto jt = std::next(it);
            const Node& b = (jt == ring.end()) ? ring.front() : *jt;
            double d = std::abs(arg_diff(it->v, b.v));
            if (d > kPi / 4.0) {
                if (total >= max_nodes)
                    throw contour_through_zero_error(
                        "winding_number: refinement limit reached (contour too close to a zero?)");
                cplx zm = 0.5 * (it->z + b.z);
                ring.insert(jt == ring.end() ? ring.end() : jt, Node{zm, f(zm)});
                ++total;
                changed = true;
            }
        }
    }
    double acc = 0.0;
    double min_abs = std::abs(ring.front().v);
    for (auto it = ring.begin(); it != ring.end(); ++it) {
        auto jt = std::next(it);
        const Node& b = (jt == ring.end()) ? ring.front() : *jt;
        acc += arg_diff(it->v, b.v);
        min_abs = std::min(min_abs, std::abs(it->v));
    }
    WindingResult r;
    double w = acc / (2.0 * kPi);
    r.winding = static_cast<int>(std::lround(w));
    r.residual = std::abs(w - r.winding);
    r.min_abs_scaled = min_abs;
    r.nodes = total;
    return r;
}

}  // namespace shearspec
