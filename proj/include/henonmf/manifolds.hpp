#pragma once

// Invariant manifolds of the fixed saddles, numerical critical points
// ("folds"), the tangency gap and the bisection for the first bifurcation
// parameter a*(b).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "map_core.hpp"

namespace henonmf {

struct ManifoldOptions {
    double h_max = 1e-3;      // vertex spacing bound
    double theta_max = 0.1;   // turning angle bound (rad)
    double h_min = 1e-9;      // segments shorter than this are always accepted
    double seed_max = 1e-5;   // largest admissible linear seed segment
    std::size_t max_points = 4'000'000;
    int initial_pieces = 64;
};

/// A manifold branch is the image f^{+-k}(base + s * dir) for s in [0, seed],
/// which makes every vertex exactly re-evaluable from its seed parameter.
struct CurveGenerator {
    Point2 base;
    Vec2 dir;
    int iterates = 0;
    bool backward = false;
    double seed = 0.0;
};

inline std::optional<Point2> generator_point(const MapParams& params, const CurveGenerator& gen,
                                             double s) {
    Point2 p = gen.base + s * gen.dir;
    for (int i = 0; i < gen.iterates; ++i) {
        auto q = gen.backward ? try_inverse(params, p) : try_apply(params, p);
        if (!q || !is_finite(*q)) return std::nullopt;
        p = *q;
    }
    return p;
}

/// Point together with the (unnormalized) tangent d/ds of the generator.
inline std::optional<std::pair<Point2, Vec2>> generator_point_tangent(const MapParams& params,
                                                                      const CurveGenerator& gen,
                                                                      double s) {
    Point2 p = gen.base + s * gen.dir;
    Vec2 t = gen.dir;
    for (int i = 0; i < gen.iterates; ++i) {
        std::optional<Point2> q;
        if (gen.backward) {
            q = try_inverse(params, p);
            if (!q) return std::nullopt;
            t = inverse_jacobian(params, p) * t;
        } else {
            q = try_apply(params, p);
            if (!q) return std::nullopt;
            t = jacobian(params, p) * t;
        }
        p = *q;
        if (!is_finite(p)) return std::nullopt;
        // keep the tangent representable; only its direction is used
        const double n = norm(t);
        if (n > 1e100 || (n < 1e-100 && n > 0.0)) t = (1.0 / n) * t;
    }
    return std::make_pair(p, t);
}

/// Arclength-parametrized polyline on an invariant manifold.
struct Curve {
    std::vector<Point2> points;
    std::vector<double> arclen;
    std::vector<double> param;  // seed parameter of each vertex
    SaddleLabel anchor = SaddleLabel::P;
    int branch = +1;
    bool stable = false;
    CurveGenerator gen;
    bool escaped_end = false;       // growth stopped where the manifold leaves the domain
    bool budget_exhausted = false;  // warning: refinement budget ran out

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    double length() const { return arclen.empty() ? 0.0 : arclen.back(); }

    /// Index i of the segment [i, i+1] containing arclength s.
    std::size_t segment_at(double s) const {
        if (points.size() < 2) return 0;
        auto it = std::upper_bound(arclen.begin(), arclen.end(), s);
        std::size_t i = it == arclen.begin() ? 0 : static_cast<std::size_t>(it - arclen.begin()) - 1;
        return std::min(i, points.size() - 2);
    }

    Point2 at_arclength(double s) const {
        if (points.size() < 2) return points.empty() ? Point2{} : points.front();
        const std::size_t i = segment_at(s);
        const double len = arclen[i + 1] - arclen[i];
        const double u = len > 0.0 ? std::clamp((s - arclen[i]) / len, 0.0, 1.0) : 0.0;
        return points[i] + u * (points[i + 1] - points[i]);
    }
};

namespace detail {

inline double turning_angle(Vec2 u, Vec2 v) {
    if (norm(u) == 0.0 || norm(v) == 0.0) return 0.0;
    return std::atan2(std::abs(cross(u, v)), dot(u, v));
}

/// Smallest admissible iterate count k and the seed length for a branch.
inline std::pair<int, double> seed_schedule(double factor, double max_arclen, double seed_max) {
    const double g = std::abs(factor);
    if (!(g > 1.0)) throw DegenerateSaddleError("manifold growth factor must exceed 1");
    const bool even = factor < 0.0;
    int k = even ? 2 : 1;
    double eps = 2.0 * max_arclen / std::pow(g, k);
    while (eps > seed_max && k < 400) {
        k += even ? 2 : 1;
        eps = 2.0 * max_arclen / std::pow(g, k);
    }
    return {k, eps};
}

inline Curve grow_branch(const MapParams& params, const FixedSaddle& saddle, double max_arclen,
                         int branch, bool backward, const ManifoldOptions& opt) {
    if (!(max_arclen > 0.0)) throw DomainError("max_arclen must be positive");
    if (branch != 1 && branch != -1) throw DomainError("branch must be +1 or -1");
    double factor;
    Vec2 dir;
    if (backward) {
        if (params.is_henon() && params.b == 0.0)
            throw NonInvertibleError("stable manifold requires b > 0");
        factor = 1.0 / saddle.eig_s;
        dir = saddle.vec_s;
    } else {
        factor = saddle.eig_u;
        dir = saddle.vec_u;
    }
    const auto [k, eps] = seed_schedule(factor, max_arclen, opt.seed_max);

    Curve c;
    c.anchor = saddle.label;
    c.branch = branch;
    c.stable = backward;
    c.gen = {saddle.point, static_cast<double>(branch) * dir, k, backward, eps};
    c.points.push_back(saddle.point);
    c.arclen.push_back(0.0);
    c.param.push_back(0.0);

    struct Pending {
        double s;
        std::optional<Point2> p;
    };
    std::vector<Pending> stack;
    for (int i = opt.initial_pieces; i >= 1; --i) {
        const double s = eps * static_cast<double>(i) / opt.initial_pieces;
        stack.push_back({s, generator_point(params, c.gen, s)});
    }
    const double param_floor = eps * 1e-15;

    while (!stack.empty()) {
        if (c.points.size() >= opt.max_points) {
            c.budget_exhausted = true;
            break;
        }
        const Pending top = stack.back();
        const double sa = c.param.back();
        const Point2 pa = c.points.back();
        const double sm = 0.5 * (sa + top.s);
        const bool at_floor = top.s - sa <= param_floor;
        if (at_floor) {
            if (!top.p) {
                c.escaped_end = true;
                break;
            }
            c.budget_exhausted = true;
        }
        bool ok = at_floor;
        std::optional<Point2> pm;
        if (!ok && top.p) {
            pm = generator_point(params, c.gen, sm);
            if (pm) {
                const Point2 pb = *top.p;
                const double seg = distance(pa, pb);
                ok = seg <= opt.h_max && turning_angle(*pm - pa, pb - *pm) <= opt.theta_max;
                if (ok && c.points.size() >= 2)
                    ok = turning_angle(pa - c.points[c.points.size() - 2], pb - pa) <= opt.theta_max;
                if (!ok && seg < opt.h_min && distance(pa, *pm) < opt.h_min) ok = true;
            }
        } else if (!ok) {
            pm = generator_point(params, c.gen, sm);
        }
        if (ok) {
            stack.pop_back();
            const Point2 pb = *top.p;
            c.arclen.push_back(c.arclen.back() + distance(pa, pb));
            c.points.push_back(pb);
            c.param.push_back(top.s);
            if (c.arclen.back() >= max_arclen) break;
        } else {
            stack.push_back({sm, pm});
        }
    }
    return c;
}

}  // namespace detail

/// Branch of W^u(saddle) leaving along branch * vec_u, grown to max_arclen.
inline Curve grow_unstable(const MapParams& params, const FixedSaddle& saddle, double max_arclen,
                           int branch = +1, const ManifoldOptions& opt = {}) {
    return detail::grow_branch(params, saddle, max_arclen, branch, false, opt);
}

/// Branch of W^s(saddle) leaving along branch * vec_s, grown with the inverse map.
inline Curve grow_stable(const MapParams& params, const FixedSaddle& saddle, double max_arclen,
                         int branch = +1, const ManifoldOptions& opt = {}) {
    return detail::grow_branch(params, saddle, max_arclen, branch, true, opt);
}

struct PolylineHit {
    std::size_t segment = 0;
    double u = 0.0;  // position inside the segment
    double dist = std::numeric_limits<double>::infinity();
    Point2 point;
};

/// Closest point of a polyline to q, optionally restricted to vertex range [lo, hi).
inline PolylineHit nearest_on_polyline(const std::vector<Point2>& pts, Point2 q, std::size_t lo = 0,
                                       std::size_t hi = std::numeric_limits<std::size_t>::max()) {
    PolylineHit best;
    hi = std::min(hi, pts.size());
    if (hi <= lo) return best;
    if (hi - lo == 1) {
        best.segment = lo;
        best.point = pts[lo];
        best.dist = distance(pts[lo], q);
        return best;
    }
    for (std::size_t i = lo; i + 1 < hi; ++i) {
        const Vec2 d = pts[i + 1] - pts[i];
        const double l2 = dot(d, d);
        const double u = l2 > 0.0 ? std::clamp(dot(q - pts[i], d) / l2, 0.0, 1.0) : 0.0;
        const Point2 c = pts[i] + u * d;
        const double dist = distance(c, q);
        if (dist < best.dist) best = {i, u, dist, c};
    }
    return best;
}

/// One-sided Hausdorff distance sup_{p in pts} dist(p, curve).
inline double hausdorff_to_polyline(const std::vector<Point2>& pts, const Curve& curve) {
    double worst = 0.0;
    for (const Point2& p : pts) worst = std::max(worst, nearest_on_polyline(curve.points, p).dist);
    return worst;
}

struct ContractedField {
    Vec2 direction;        // unit, positive second component
    double log_sigma_min;  // log of the contracted singular value of D f^N
    double log_sigma_max;
    int steps;             // iterates actually used
};

/// Most contracted right singular direction of D f^N(p). With
/// allow_truncation the product stops where the orbit leaves the domain
/// (at least one step is required).
inline ContractedField most_contracted_field(const MapParams& params, Point2 p, int N,
                                             bool allow_truncation = false) {
    if (N < 1) throw DomainError("most_contracted_field needs N >= 1");
    Mat2 m = Mat2::identity();
    double log_scale = 0.0;
    double log_det = 0.0;
    Point2 q = p;
    int steps = 0;
    for (int i = 0; i < N; ++i) {
        Mat2 j;
        if (params.is_affine()) {
            const int br = affine_branch(params, q);
            if (br < 0) {
                if (allow_truncation && steps > 0) break;
                throw DomainError("orbit left the domain before N steps");
            }
            j = affine_branch_jacobian(params, br);
        } else {
            j = jacobian(params, q);
        }
        m = j * m;
        log_det += std::log(std::abs(j.det()));
        const double s = m.frobenius();
        m = (1.0 / s) * m;
        log_scale += std::log(s);
        ++steps;
        auto next = try_apply(params, q);
        const bool bounded = next && std::abs(next->x) <= divergence_cutoff &&
                             std::abs(next->y) <= divergence_cutoff;
        if (!bounded) {
            if (i + 1 < N) {
                if (allow_truncation) break;
                throw DomainError("orbit unbounded before N steps");
            }
            break;
        }
        q = *next;
    }
    // top eigenpair of the symmetric matrix M^T M
    const Mat2 s = m.transpose() * m;
    const double half_tr = 0.5 * (s.a + s.d);
    const double rad = std::hypot(0.5 * (s.a - s.d), s.b);
    const double mu1 = half_tr + rad;
    const Vec2 c1{s.b, mu1 - s.a};
    const Vec2 c2{mu1 - s.d, s.b};
    Vec2 v1 = norm(c1) >= norm(c2) ? c1 : c2;
    if (norm(v1) == 0.0) v1 = {1.0, 0.0};
    v1 = normalized(v1);
    const double log_s1 = 0.5 * std::log(mu1) + log_scale;
    const double log_s2 = log_det - log_s1;
    if (log_s1 - log_s2 <= 1e-8) throw IllConditionedError("singular values of D f^N coincide");
    Vec2 e = perp(v1);
    if (e.y < 0.0 || (e.y == 0.0 && e.x < 0.0)) e = -e;
    return {e, log_s2, log_s1, steps};
}

/// Numerical critical point on W^u: the curve tangent is parallel to the
/// most contracted direction.
struct Fold {
    Point2 point;
    double param = 0.0;
    double arclen = 0.0;
};

namespace detail {

inline std::optional<double> fold_angle(const MapParams& params, const Curve& wu, double s, int N) {
    auto pt = generator_point_tangent(params, wu.gen, s);
    if (!pt) return std::nullopt;
    Vec2 e;
    try {
        e = most_contracted_field(params, pt->first, N, true).direction;
    } catch (const Error&) {
        return std::nullopt;
    }
    if (e.x < 0.0) e = -e;
    return cross(normalized(pt->second), e);
}

}  // namespace detail

/// Critical points of wu inside I(delta) = {|x| < delta}.
inline std::vector<Fold> detect_folds(const MapParams& params, const Curve& wu, double delta, int N) {
    std::vector<Fold> out;
    if (params.is_affine() || wu.size() < 2) return out;
    std::optional<double> prev;
    for (std::size_t i = 0; i < wu.size(); ++i) {
        const bool inside = std::abs(wu.points[i].x) < delta;
        std::optional<double> g = inside ? detail::fold_angle(params, wu, wu.param[i], N) : std::nullopt;
        if (g && prev && i > 0 && ((*prev < 0.0) != (*g < 0.0) || *g == 0.0)) {
            double lo = wu.param[i - 1], hi = wu.param[i];
            double glo = *prev;
            if (*g != 0.0) {
                for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    auto gm = detail::fold_angle(params, wu, mid, N);
                    if (!gm) break;
                    if ((*gm < 0.0) == (glo < 0.0)) {
                        lo = mid;
                        glo = *gm;
                    } else {
                        hi = mid;
                    }
                }
            } else {
                lo = hi;
            }
            const double root = 0.5 * (lo + hi);
            if (auto p = generator_point(params, wu.gen, root)) {
                const double seg = wu.param[i] - wu.param[i - 1];
                const double u = seg > 0.0 ? (root - wu.param[i - 1]) / seg : 0.0;
                const double s = wu.arclen[i - 1] + u * (wu.arclen[i] - wu.arclen[i - 1]);
                if (std::abs(p->x) < delta) out.push_back({*p, root, s});
            }
        }
        prev = g;
    }
    return out;
}

struct TangencyOptions {
    double delta = 0.1;
    int field_steps = 30;
    double wu_length = 8.0;   // arclength of each W^u(P) branch searched for folds
    double ws_length = 7.0;   // arclength of each W^s(Q) branch
    double arc_window = 0.2;  // half-width (arclength) of the fold arc
    ManifoldOptions manifold;
};

struct TangencyReport {
    double a = 0.0;
    int crossings = 0;
    double gap = 0.0;         // > 0: fold vertex beyond W^s(Q) (crossing side)
    Point2 fold_point;        // critical point estimate zeta_0
    Point2 fold_vertex;       // turning point of W^u(P) near W^s(Q)
    bool one_dimensional = false;
};

namespace detail {

template <class F>
double golden_max(F&& f, double lo, double hi, int iters = 90) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && hi - lo > 0.0; ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
        if (!(x1 > lo && x2 < hi)) break;
    }
    return f1 >= f2 ? x1 : x2;
}

/// Signed distance to a stable curve, positive on the side facing away from `inner`.
struct SignedDistance {
    const MapParams& params;
    const Curve& ws;
    std::size_t lo, hi;  // vertex window searched
    Point2 inner;

    double operator()(Point2 q) const {
        const PolylineHit hit = nearest_on_polyline(ws.points, q, lo, hi);
        const std::size_t i = hit.segment;
        const double plo = ws.param[i > lo ? i - 1 : i];
        const double phi = ws.param[std::min(i + 2, hi - 1)];
        auto dist_at = [&](double s) {
            auto p = generator_point(params, ws.gen, s);
            return p ? -distance(*p, q) : -std::numeric_limits<double>::infinity();
        };
        const double s = golden_max(dist_at, std::min(plo, phi), std::max(plo, phi), 120);
        auto pt = generator_point_tangent(params, ws.gen, s);
        if (!pt) return -hit.dist;
        Vec2 n = normalized(perp(pt->second));
        if (dot(n, pt->first - inner) < 0.0) n = -n;
        return dot(q - pt->first, n);
    }
};

}  // namespace detail

/// Gap between the innermost fold of W^u(P) and W^s(Q) (orientation-reversing
/// Henon: the first tangency is W^u(P) against W^s(Q)). b = 0 uses the
/// one-dimensional limit: critical value f(0) = 1 against the preimage
/// sqrt((1 - x_Q)/a) of Q.
inline TangencyReport tangency_gap(const MapParams& params, const TangencyOptions& opt = {}) {
    if (!params.is_henon()) throw DomainError("tangency_gap is defined for the Henon family");
    const auto [P, Q] = fixed_points(params);
    TangencyReport rep;
    rep.a = params.a;
    if (params.b == 0.0) {
        rep.one_dimensional = true;
        rep.gap = 1.0 - std::sqrt((1.0 - Q.point.x) / params.a);
        rep.crossings = rep.gap > 0.0 ? 2 : 0;
        rep.fold_point = {0.0, 0.0};
        rep.fold_vertex = {1.0, 0.0};
        return rep;
    }
    const Curve ws_a = grow_stable(params, Q, opt.ws_length, +1, opt.manifold);
    const Curve ws_b = grow_stable(params, Q, opt.ws_length, -1, opt.manifold);

    struct TipGap {
        double gap = -std::numeric_limits<double>::infinity();
        int crossings = 0;
        Point2 vertex;
    };
    // signed gap of the fold arc around vertex `tip` of `wu`
    auto fold_gap = [&](const Curve& wu, std::size_t tip, double reach) -> std::optional<TipGap> {
        const PolylineHit ha = nearest_on_polyline(ws_a.points, wu.points[tip]);
        const PolylineHit hb = nearest_on_polyline(ws_b.points, wu.points[tip]);
        const Curve& ws = ha.dist <= hb.dist ? ws_a : ws_b;
        const PolylineHit h0 = ha.dist <= hb.dist ? ha : hb;
        if (!(h0.dist < reach)) return std::nullopt;
        const std::size_t window = 600;
        const std::size_t lo = h0.segment > window ? h0.segment - window : 0;
        const std::size_t hi = std::min(ws.size(), h0.segment + window + 2);
        const detail::SignedDistance sd{params, ws, lo, hi, P.point};

        const double s_tip = wu.arclen[tip];
        std::size_t a0 = tip, a1 = tip;
        while (a0 > 0 && wu.arclen[a0 - 1] >= s_tip - opt.arc_window) --a0;
        while (a1 + 1 < wu.size() && wu.arclen[a1 + 1] <= s_tip + opt.arc_window) ++a1;
        std::vector<double> d(a1 - a0 + 1);
        std::size_t best = a0;
        for (std::size_t i = a0; i <= a1; ++i) {
            d[i - a0] = sd(wu.points[i]);
            if (d[i - a0] > d[best - a0]) best = i;
        }
        const double plo = wu.param[best > 0 ? best - 1 : best];
        const double phi = wu.param[std::min(best + 1, wu.size() - 1)];
        auto sd_at = [&](double s) {
            auto p = generator_point(params, wu.gen, s);
            return p ? sd(*p) : -std::numeric_limits<double>::infinity();
        };
        const double s_best = detail::golden_max(sd_at, plo, phi, 100);
        const Point2 vertex = *generator_point(params, wu.gen, s_best);
        const double refined = sd(vertex);
        TipGap out;
        out.gap = std::max(refined, d[best - a0]);
        out.vertex = refined >= d[best - a0] ? vertex : wu.points[best];
        // sign changes along the arc with the refined vertex value spliced in
        std::vector<double> seq(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(best - a0 + 1));
        seq.push_back(out.gap);
        seq.insert(seq.end(), d.begin() + static_cast<std::ptrdiff_t>(best - a0 + 1), d.end());
        int changes = 0;
        for (std::size_t i = 1; i < seq.size(); ++i)
            if ((seq[i - 1] > 0.0) != (seq[i] > 0.0)) ++changes;
        out.crossings = std::min(changes, 2);
        if (out.gap > 0.0 && out.crossings == 0) out.crossings = 2;
        if (out.gap <= 0.0) out.crossings = 0;
        return out;
    };

    // Every turning point of W^u(P) right of P is a fold facing W^s(Q); the
    // horseshoe is intact while all of them cross, so the least-crossing
    // fold decides. Far folds (deep horseshoe) are used only when no fold
    // lies near W^s(Q).
    const Curve wu_branch[2] = {grow_unstable(params, P, opt.wu_length, +1, opt.manifold),
                                grow_unstable(params, P, opt.wu_length, -1, opt.manifold)};
    bool any = false;
    for (double reach : {0.5, std::numeric_limits<double>::infinity()}) {
        for (const Curve& wu : wu_branch) {
            for (std::size_t i = 1; i + 1 < wu.size(); ++i) {
                const Point2 v = wu.points[i];
                if (!(v.x > P.point.x && v.x >= wu.points[i - 1].x && v.x > wu.points[i + 1].x)) continue;
                const auto g = fold_gap(wu, i, reach);
                if (!g) continue;
                if (!any || g->gap < rep.gap) {
                    rep.gap = g->gap;
                    rep.crossings = g->crossings;
                    rep.fold_vertex = g->vertex;
                    any = true;
                }
            }
        }
        if (any) break;
    }
    if (!any) throw InconclusiveError("W^u(P) shows no fold near W^s(Q) within the grown length");
    if (auto z = try_inverse(params, rep.fold_vertex)) rep.fold_point = *z;
    return rep;
}

struct AStarResult {
    double value = 0.0;
    double lo = 0.0, hi = 0.0;  // certificate: crossings(lo) = 0, crossings(hi) = 2
    TangencyReport at_lo, at_hi;
    std::vector<TangencyReport> sweep;  // every probe, in evaluation order
};

/// Bisection on the crossing count (gap sign) down to bracket width tol_a.
inline AStarResult find_a_star(double b, double a_lo, double a_hi, double tol_a,
                               const TangencyOptions& opt = {}, double tol_fp = 1e-12) {
    if (!(a_lo < a_hi)) throw BadBracketError("bracket must satisfy a_lo < a_hi");
    if (!(tol_a > 0.0)) throw DomainError("tol_a must be positive");
    AStarResult res;
    auto probe = [&](double a) {
        TangencyReport r = tangency_gap(MapParams::henon(a, b, tol_fp), opt);
        res.sweep.push_back(r);
        return r;
    };
    auto endpoint = [&](double a) {
        try {
            return probe(a);
        } catch (const InconclusiveError& e) {
            throw BadBracketError("bracket endpoint a = " + std::to_string(a) + ": " + e.what());
        } catch (const DegenerateSaddleError& e) {
            throw BadBracketError("bracket endpoint a = " + std::to_string(a) + ": " + e.what());
        }
    };
    res.at_lo = endpoint(a_lo);
    res.at_hi = endpoint(a_hi);
    if (res.at_lo.crossings == res.at_hi.crossings)
        throw BadBracketError("bracket endpoints have equal crossing counts (" +
                              std::to_string(res.at_lo.crossings) + ")");
    if (res.at_lo.crossings != 0) throw BadBracketError("crossings(a_lo) must be 0 and crossings(a_hi) 2");
    double lo = a_lo, hi = a_hi;
    while (hi - lo > tol_a) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const TangencyReport r = probe(mid);
        if (r.gap == 0.0) {
            res.value = mid;
            res.lo = res.hi = mid;
            res.at_lo = res.at_hi = r;
            return res;
        }
        if (r.crossings == 2) {
            hi = mid;
            res.at_hi = r;
        } else {
            lo = mid;
            res.at_lo = r;
        }
    }
    res.lo = lo;
    res.hi = hi;
    res.value = 0.5 * (lo + hi);
    return res;
}

}  // namespace henonmf
