#pragma once

// Map families, derivatives, inverses, fixed saddles and observables.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace henonmf {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
};

// Tangent vectors share the representation of points.
using Vec2 = Point2;

inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline Vec2 normalized(Vec2 a) {
    const double n = norm(a);
    return n > 0.0 ? Vec2{a.x / n, a.y / n} : a;
}
inline constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static constexpr Mat2 identity() { return {}; }
    constexpr double det() const { return a * d - b * c; }
    constexpr double trace() const { return a + d; }
    constexpr Mat2 transpose() const { return {a, c, b, d}; }
    double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }

    friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
        return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
    }
    friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
        return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
    }
    friend constexpr Mat2 operator*(double s, const Mat2& m) {
        return {s * m.a, s * m.b, s * m.c, s * m.d};
    }
};

/// Real eigenpair of a 2x2 matrix; empty when the spectrum is complex.
struct Eigen2 {
    double value[2];
    Vec2 vector[2];
};

inline std::optional<Eigen2> real_eigen(const Mat2& m) {
    const double tr = m.trace();
    const double det = m.det();
    const double disc = tr * tr - 4.0 * det;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    // cancellation-free pair of roots
    const double big = 0.5 * (tr + std::copysign(sq, tr));
    const double small = big != 0.0 ? det / big : 0.0;
    Eigen2 out{{big, small}, {}};
    for (int k = 0; k < 2; ++k) {
        const double lam = out.value[k];
        const Vec2 v1{m.b, lam - m.a};
        const Vec2 v2{lam - m.d, m.c};
        Vec2 v = norm(v1) >= norm(v2) ? v1 : v2;
        if (norm(v) == 0.0) v = k == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
        out.vector[k] = normalized(v);
    }
    return out;
}

enum class Family { henon_classical, affine_horseshoe };

inline std::string to_string(Family f) {
    return f == Family::henon_classical ? "henon_classical" : "affine_horseshoe";
}

inline Family family_from_string(const std::string& s) {
    if (s == "henon_classical" || s == "henon") return Family::henon_classical;
    if (s == "affine_horseshoe" || s == "affine") return Family::affine_horseshoe;
    throw ConfigError("unknown map family '" + s + "'");
}

/// Family selector plus parameters. henon_classical is
/// f(x, y) = (1 - a x^2 + y, b x); affine_horseshoe maps the strip
/// y in [0, 1/lambda_u] by (c_s x, lambda_u y) and the strip
/// y in [1 - 1/lambda_u, 1] by (1 - c_s x, lambda_u (1 - y)).
struct MapParams {
    Family family = Family::henon_classical;
    double a = 1.4;
    double b = 0.3;
    double lambda_u = 3.0;
    double c_s = 1.0 / 3.0;
    double tol_fp = 1e-12;

    static MapParams henon(double a, double b, double tol_fp = 1e-12) {
        MapParams p;
        p.family = Family::henon_classical;
        p.a = a;
        p.b = b;
        p.tol_fp = tol_fp;
        return p;
    }

    static MapParams affine(double lambda_u = 3.0, double c_s = 1.0 / 3.0) {
        MapParams p;
        p.family = Family::affine_horseshoe;
        p.lambda_u = lambda_u;
        p.c_s = c_s;
        p.a = 0.0;
        p.b = 0.0;
        return p;
    }

    bool is_henon() const { return family == Family::henon_classical; }
    bool is_affine() const { return family == Family::affine_horseshoe; }

    void validate() const {
        if (!(tol_fp > 0.0)) throw ConfigError("tol_fp must be positive");
        if (is_henon()) {
            if (!std::isfinite(a)) throw ConfigError("henon parameter a must be finite");
            if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("henon parameter b must be >= 0");
        } else {
            if (!(lambda_u > 2.0)) throw ConfigError("affine lambda_u must exceed 2 (disjoint strips)");
            if (!(c_s > 0.0 && c_s < 0.5)) throw ConfigError("affine c_s must lie in (0, 1/2)");
        }
    }
};

inline constexpr double divergence_cutoff = 1e6;

/// Strip index of an affine-horseshoe point: 0, 1, or -1 when it lies
/// in neither strip of the unit square.
inline int affine_branch(const MapParams& params, Point2 p) {
    if (!(p.x >= 0.0 && p.x <= 1.0)) return -1;
    const double h = 1.0 / params.lambda_u;
    if (p.y >= 0.0 && p.y <= h) return 0;
    if (p.y >= 1.0 - h && p.y <= 1.0) return 1;
    return -1;
}

/// Affine branch map applied regardless of strip membership.
inline Point2 affine_branch_apply(const MapParams& params, int branch, Point2 p) {
    if (branch == 0) return {params.c_s * p.x, params.lambda_u * p.y};
    return {1.0 - params.c_s * p.x, params.lambda_u * (1.0 - p.y)};
}

inline Mat2 affine_branch_jacobian(const MapParams& params, int branch) {
    const double sgn = branch == 0 ? 1.0 : -1.0;
    return {sgn * params.c_s, 0.0, 0.0, sgn * params.lambda_u};
}

/// Image of p, or nothing when an affine point is outside both strips.
inline std::optional<Point2> try_apply(const MapParams& params, Point2 p) {
    if (params.is_henon()) return Point2{1.0 - params.a * p.x * p.x + p.y, params.b * p.x};
    const int br = affine_branch(params, p);
    if (br < 0) return std::nullopt;
    return affine_branch_apply(params, br, p);
}

inline Point2 apply(const MapParams& params, Point2 p) {
    if (auto q = try_apply(params, p)) return *q;
    throw EscapeError("point left the square of the affine horseshoe");
}

inline Mat2 jacobian(const MapParams& params, Point2 p) {
    if (params.is_henon()) return {-2.0 * params.a * p.x, 1.0, params.b, 0.0};
    const int br = affine_branch(params, p);
    if (br < 0) throw EscapeError("jacobian requested outside both affine strips");
    return affine_branch_jacobian(params, br);
}

inline std::optional<Point2> try_inverse(const MapParams& params, Point2 p) {
    if (params.is_henon()) {
        if (params.b == 0.0) return std::nullopt;
        const double x = p.y / params.b;
        return Point2{x, p.x - 1.0 + params.a * x * x};
    }
    if (p.y < 0.0 || p.y > 1.0) return std::nullopt;
    if (p.x >= 0.0 && p.x <= params.c_s)
        return Point2{p.x / params.c_s, p.y / params.lambda_u};
    if (p.x >= 1.0 - params.c_s && p.x <= 1.0)
        return Point2{(1.0 - p.x) / params.c_s, 1.0 - p.y / params.lambda_u};
    return std::nullopt;
}

inline Point2 inverse(const MapParams& params, Point2 p) {
    if (params.is_henon() && params.b == 0.0)
        throw NonInvertibleError("henon map with b = 0 is not invertible");
    if (auto q = try_inverse(params, p)) return *q;
    throw EscapeError("point is not in the image of an affine branch");
}

/// Derivative of the inverse map at p (a point in the image).
inline Mat2 inverse_jacobian(const MapParams& params, Point2 p) {
    if (params.is_henon()) {
        if (params.b == 0.0) throw NonInvertibleError("henon map with b = 0 is not invertible");
        const double x = p.y / params.b;
        return {0.0, 1.0 / params.b, 1.0, 2.0 * params.a * x / params.b};
    }
    const Point2 q = inverse(params, p);
    const Mat2 j = affine_branch_jacobian(params, affine_branch(params, q));
    return {1.0 / j.a, 0.0, 0.0, 1.0 / j.d};
}

enum class SaddleLabel { P, Q };

inline const char* to_string(SaddleLabel l) { return l == SaddleLabel::P ? "P" : "Q"; }

struct FixedSaddle {
    Point2 point;
    SaddleLabel label = SaddleLabel::P;
    double eig_u = 0.0;
    double eig_s = 0.0;
    Vec2 vec_u;  // oriented with positive first component
    Vec2 vec_s;  // oriented with positive second component
};

namespace detail {

inline FixedSaddle make_saddle(const MapParams& params, Point2 p, SaddleLabel label) {
    const Mat2 j = jacobian(params, p);
    const auto eig = real_eigen(j);
    if (!eig) throw DegenerateSaddleError("fixed point has complex spectrum");
    int iu = std::abs(eig->value[0]) >= std::abs(eig->value[1]) ? 0 : 1;
    const double lu = eig->value[iu];
    const double ls = eig->value[1 - iu];
    if (!(std::abs(lu) > 1.0 + 1e-12) || !(std::abs(ls) < 1.0 - 1e-12))
        throw DegenerateSaddleError("fixed point is not a hyperbolic saddle");
    Vec2 vu = eig->vector[iu];
    Vec2 vs = eig->vector[1 - iu];
    if (vu.x < 0.0 || (vu.x == 0.0 && vu.y < 0.0)) vu = -vu;
    if (vs.y < 0.0 || (vs.y == 0.0 && vs.x < 0.0)) vs = -vs;
    return {p, label, lu, ls, vu, vs};
}

}  // namespace detail

/// Both fixed saddles; P is the one with the larger x coordinate.
inline std::pair<FixedSaddle, FixedSaddle> fixed_points(const MapParams& params) {
    params.validate();
    if (params.is_affine()) {
        const Point2 right{1.0 / (1.0 + params.c_s), params.lambda_u / (1.0 + params.lambda_u)};
        const Point2 left{0.0, 0.0};
        return {detail::make_saddle(params, right, SaddleLabel::P),
                detail::make_saddle(params, left, SaddleLabel::Q)};
    }
    // a x^2 + (1 - b) x - 1 = 0
    const double qa = params.a, qb = 1.0 - params.b;
    const double disc = qb * qb + 4.0 * qa;
    if (!(disc > 0.0)) throw DegenerateSaddleError("no real fixed points (discriminant <= 0)");
    double xp, xq;
    if (qa == 0.0) {
        throw DegenerateSaddleError("a = 0 has a single fixed point");
    } else {
        const double sq = std::sqrt(disc);
        const double t = -0.5 * (qb + std::copysign(sq, qb));
        const double r1 = t / qa;
        const double r2 = -1.0 / t;  // product of roots is -1/a
        xp = std::max(r1, r2);
        xq = std::min(r1, r2);
    }
    return {detail::make_saddle(params, {xp, params.b * xp}, SaddleLabel::P),
            detail::make_saddle(params, {xq, params.b * xq}, SaddleLabel::Q)};
}

struct OrbitTrace {
    std::vector<Point2> points;
    bool escaped = false;   // affine point left the square
    bool diverged = false;  // a coordinate exceeded the divergence cutoff
};

/// Forward orbit p, f(p), ..., f^n(p), truncated at escape or divergence.
inline OrbitTrace orbit(const MapParams& params, Point2 p, int n) {
    OrbitTrace out;
    out.points.reserve(static_cast<std::size_t>(std::max(n, 0)) + 1);
    out.points.push_back(p);
    for (int i = 0; i < n; ++i) {
        auto q = try_apply(params, p);
        if (!q) {
            out.escaped = true;
            break;
        }
        p = *q;
        out.points.push_back(p);
        if (!(std::abs(p.x) <= divergence_cutoff && std::abs(p.y) <= divergence_cutoff)) {
            out.diverged = true;
            break;
        }
    }
    return out;
}

/// Named continuous observable on the plane.
struct Observable {
    std::string name;
    std::function<double(Point2)> eval;

    double operator()(Point2 p) const { return eval(p); }
};

inline Observable coord_x() {
    return {"coord_x", [](Point2 p) { return p.x; }};
}

inline Observable coord_y() {
    return {"coord_y", [](Point2 p) { return p.y; }};
}

inline Observable gauss_bump(Point2 center, double width) {
    if (!(width > 0.0)) throw ConfigError("gauss_bump width must be positive");
    return {"gauss_bump", [center, width](Point2 p) {
                const Point2 d = p - center;
                return std::exp(-dot(d, d) / (2.0 * width * width));
            }};
}

inline Observable constant_observable(double c) {
    return {"constant", [c](Point2) { return c; }};
}

/// Affine family only: 1 on the upper (right) branch strip, 0 on the lower.
inline Observable symbol_indicator() {
    return {"symbol_indicator", [](Point2 p) { return p.y > 0.5 ? 1.0 : 0.0; }};
}

}  // namespace henonmf
