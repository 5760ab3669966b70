#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <tuple>

#include "common/errors.hpp"
#include "surface/surface.hpp"

namespace scop::surface {

namespace {

std::vector<double> refine_axis(const std::vector<double>& nodes, int refine) {
    std::vector<double> out;
    out.reserve((nodes.size() - 1) * refine + 1);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        for (int k = 0; k < refine; ++k) {
            out.push_back(nodes[i] + (nodes[i + 1] - nodes[i]) * k / refine);
        }
    }
    out.push_back(nodes.back());
    return out;
}

struct Lattice {
    std::vector<double> y;
    std::vector<double> xi;
    std::vector<double> v;  // y-major

    [[nodiscard]] double at(std::size_t a, std::size_t b) const { return v[a * xi.size() + b]; }
};

Lattice sample(const BicubicInterpolant& interp, int refine) {
    Lattice lat;
    lat.y = refine_axis(interp.y_nodes(), refine);
    lat.xi = refine_axis(interp.xi_nodes(), refine);
    lat.v.resize(lat.y.size() * lat.xi.size());
    for (std::size_t a = 0; a < lat.y.size(); ++a) {
        for (std::size_t b = 0; b < lat.xi.size(); ++b) {
            lat.v[a * lat.xi.size() + b] = interp(lat.y[a], lat.xi[b]);
        }
    }
    return lat;
}

// Root of g on [lo, hi] given g(lo) and g(hi) of opposite sign (or zero).
template <typename G>
double polish(G g, double lo, double hi, double g_lo, double g_hi) {
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        g, lo, hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(50), iters);
    const double mid = 0.5 * (r.first + r.second);
    return std::fabs(g(r.first)) <= std::fabs(g(mid)) ? r.first : mid;
}

// Edge key: (orientation, a, b). Orientation 0 runs along xi from (a, b) to
// (a, b+1); orientation 1 runs along y from (a, b) to (a+1, b).
using EdgeKey = std::tuple<int, std::size_t, std::size_t>;

}  // namespace

FrontierSet extract_frontiers(const BicubicInterpolant& interp, const std::vector<double>& levels,
                              const FrontierSettings& settings) {
    if (settings.refine < 1) throw ValidationError("frontiers: refine must be at least 1");
    const Lattice lat = sample(interp, settings.refine);
    const std::size_t ly = lat.y.size();
    const std::size_t lx = lat.xi.size();
    const auto [vmin_it, vmax_it] = std::minmax_element(lat.v.begin(), lat.v.end());
    const double vmin = *vmin_it;
    const double vmax = *vmax_it;

    FrontierSet set;
    for (double alpha : levels) {
        FrontierLevel level;
        level.alpha = alpha;
        auto inside = [&](std::size_t a, std::size_t b) { return lat.at(a, b) >= alpha; };

        std::map<EdgeKey, FrontierVertex> points;
        auto crossing = [&](const EdgeKey& key) -> const FrontierVertex& {
            auto it = points.find(key);
            if (it != points.end()) return it->second;
            const auto [orient, a, b] = key;
            FrontierVertex vtx;
            if (orient == 0) {
                const double y = lat.y[a];
                auto g = [&](double xi) { return interp(y, xi) - alpha; };
                vtx.y = y;
                vtx.xi = polish(g, lat.xi[b], lat.xi[b + 1], lat.at(a, b) - alpha,
                                lat.at(a, b + 1) - alpha);
            } else {
                const double xi = lat.xi[b];
                auto g = [&](double y) { return interp(y, xi) - alpha; };
                vtx.xi = xi;
                vtx.y = polish(g, lat.y[a], lat.y[a + 1], lat.at(a, b) - alpha,
                               lat.at(a + 1, b) - alpha);
            }
            vtx.residual = std::fabs(interp(vtx.y, vtx.xi) - alpha);
            return points.emplace(key, vtx).first->second;
        };

        std::vector<std::pair<EdgeKey, EdgeKey>> segments;
        for (std::size_t a = 0; a + 1 < ly; ++a) {
            for (std::size_t b = 0; b + 1 < lx; ++b) {
                // Corners counter-clockwise from (a, b); edge k joins corner k and k+1.
                const bool c[4] = {inside(a, b), inside(a, b + 1), inside(a + 1, b + 1),
                                   inside(a + 1, b)};
                const EdgeKey e[4] = {{0, a, b}, {1, a, b + 1}, {0, a + 1, b}, {1, a, b}};
                int crossed[4];
                int n = 0;
                for (int k = 0; k < 4; ++k) {
                    if (c[k] != c[(k + 1) % 4]) crossed[n++] = k;
                }
                if (n == 2) {
                    segments.emplace_back(e[crossed[0]], e[crossed[1]]);
                } else if (n == 4) {
                    const double center =
                        0.25 * (lat.at(a, b) + lat.at(a, b + 1) + lat.at(a + 1, b + 1) +
                                lat.at(a + 1, b));
                    const bool mid = center >= alpha;
                    // Cut off the two corners whose state differs from the center.
                    for (int k = 0; k < 4; ++k) {
                        if (c[k] != mid) segments.emplace_back(e[(k + 3) % 4], e[k]);
                    }
                }
            }
        }

        std::map<EdgeKey, std::vector<std::size_t>> incident;
        for (std::size_t s = 0; s < segments.size(); ++s) {
            incident[segments[s].first].push_back(s);
            incident[segments[s].second].push_back(s);
        }
        std::vector<bool> used(segments.size(), false);

        auto walk = [&](EdgeKey start) {
            Polyline line;
            EdgeKey cur = start;
            line.push_back(crossing(cur));
            for (;;) {
                std::size_t seg = segments.size();
                for (std::size_t s : incident[cur]) {
                    if (!used[s]) {
                        seg = s;
                        break;
                    }
                }
                if (seg == segments.size()) break;
                used[seg] = true;
                cur = segments[seg].first == cur ? segments[seg].second : segments[seg].first;
                const auto& v = crossing(cur);
                const auto& last = line.back();
                if (std::fabs(v.xi - last.xi) > 1e-14 || std::fabs(v.y - last.y) > 1e-14 * v.y) {
                    line.push_back(v);
                }
            }
            if (line.size() >= 2 && line.front().xi > line.back().xi) {
                std::reverse(line.begin(), line.end());
            }
            return line;
        };

        for (const auto& [key, segs] : incident) {
            if (segs.size() == 1 && !used[segs[0]]) level.polylines.push_back(walk(key));
        }
        for (std::size_t s = 0; s < segments.size(); ++s) {
            if (!used[s]) level.polylines.push_back(walk(segments[s].first));
        }
        std::erase_if(level.polylines, [](const Polyline& l) { return l.size() < 2; });

        level.empty = level.polylines.empty();
        if (level.empty) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "level %.6g outside surface range [%.6g, %.6g]", alpha,
                          vmin, vmax);
            level.note = buf;
        } else {
            for (const auto& line : level.polylines) {
                for (const auto& v : line) {
                    if (v.residual > settings.tolerance) {
                        level.note = "vertex residual above tolerance";
                    }
                }
            }
        }
        set.levels.push_back(std::move(level));
    }
    return set;
}

std::optional<double> frontier_y_at(const Polyline& line, double xi) {
    for (std::size_t k = 0; k + 1 < line.size(); ++k) {
        const double x0 = line[k].xi;
        const double x1 = line[k + 1].xi;
        if ((xi >= x0 && xi <= x1) || (xi >= x1 && xi <= x0)) {
            if (x1 == x0) return std::max(line[k].y, line[k + 1].y);
            const double t = (xi - x0) / (x1 - x0);
            return line[k].y + t * (line[k + 1].y - line[k].y);
        }
    }
    return std::nullopt;
}

double nesting_violation(const FrontierSet& set, const std::vector<double>& xi_samples) {
    std::vector<const FrontierLevel*> sorted;
    for (const auto& l : set.levels) {
        if (!l.empty) sorted.push_back(&l);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->alpha < b->alpha; });
    auto y_at = [](const FrontierLevel& level, double xi) -> std::optional<double> {
        for (const auto& line : level.polylines) {
            if (auto y = frontier_y_at(line, xi)) return y;
        }
        return std::nullopt;
    };
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        for (double xi : xi_samples) {
            const auto lower_alpha = y_at(*sorted[k], xi);
            const auto upper_alpha = y_at(*sorted[k + 1], xi);
            if (lower_alpha && upper_alpha) worst = std::max(worst, *upper_alpha - *lower_alpha);
        }
    }
    return worst;
}

double monotonicity_overshoot(const BicubicInterpolant& interp, int refine) {
    const Lattice lat = sample(interp, refine);
    double worst = 0.0;
    for (std::size_t b = 0; b < lat.xi.size(); ++b) {
        double running_min = lat.at(0, b);
        for (std::size_t a = 1; a < lat.y.size(); ++a) {
            const double v = lat.at(a, b);
            worst = std::max(worst, v - running_min);
            running_min = std::min(running_min, v);
        }
    }
    return worst;
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::found: return "found";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::already_satisfied: return "already_satisfied";
    }
    return "unknown";
}

SolveResult solve_u0(const BicubicInterpolant& interp, const model::PlanSpec& plan,
                     const model::DerivedParams& params, double xi, double alpha) {
    if (!(xi >= interp.xi_min() && xi <= interp.xi_max())) {
        throw DomainError("solve_u0: xi outside the surface range");
    }
    const auto ys = refine_axis(interp.y_nodes(), kDefaultRefine);
    std::vector<double> ps(ys.size());
    for (std::size_t a = 0; a < ys.size(); ++a) ps[a] = interp(ys[a], xi);
    const auto [lo_it, hi_it] = std::minmax_element(ps.begin(), ps.end());

    SolveResult out;
    if (alpha < *lo_it) {
        out.status = SolveStatus::infeasible;
        return out;
    }
    if (alpha > *hi_it) {
        out.status = SolveStatus::already_satisfied;
        return out;
    }
    std::size_t a = 0;
    while (a + 1 < ys.size() && !((ps[a] - alpha) * (ps[a + 1] - alpha) <= 0.0)) ++a;
    double lo = ys[a];
    double hi = ys[a + 1];
    double g_lo = ps[a] - alpha;
    if (g_lo == 0.0) {
        hi = lo;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = interp(mid, xi) - alpha;
        if ((g_mid <= 0.0) == (g_lo <= 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    const double y = 0.5 * (lo + hi);
    out.status = SolveStatus::found;
    out.y0 = y;
    out.u0 = model::y0_to_u0(plan, params, y);
    out.p_at_solution = interp(y, xi);
    return out;
}

}  // namespace scop::surface
