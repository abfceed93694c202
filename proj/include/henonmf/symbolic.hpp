#pragma once

// Two-symbol coding, periodic-orbit enumeration, unstable multipliers,
// Birkhoff sums, first-return diagnostics and critical-proximity tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "manifolds.hpp"
#include "map_core.hpp"

namespace henonmf {

/// Word over {0,1}. For the Henon family symbol 1 means x > 0; for the
/// affine horseshoe it is the strip index.
struct SymbolWord {
    std::string bits;

    SymbolWord() = default;
    explicit SymbolWord(std::string b) : bits(std::move(b)) {
        if (bits.empty()) throw DomainError("symbol word must be nonempty");
        for (char c : bits)
            if (c != '0' && c != '1') throw DomainError("symbol word must be binary: " + bits);
    }

    static SymbolWord from_index(std::uint64_t v, int n) {
        std::string s(static_cast<std::size_t>(n), '0');
        for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = ((v >> (n - 1 - i)) & 1U) ? '1' : '0';
        return SymbolWord(std::move(s));
    }

    std::size_t size() const { return bits.size(); }
    int symbol(std::size_t i) const { return bits[i % bits.size()] == '1' ? 1 : 0; }

    SymbolWord rotated(std::size_t k) const {
        k %= bits.size();
        return SymbolWord(bits.substr(k) + bits.substr(0, k));
    }

    SymbolWord repeated(int k) const {
        std::string s;
        for (int i = 0; i < k; ++i) s += bits;
        return SymbolWord(std::move(s));
    }

    /// Lexicographically minimal rotation.
    SymbolWord canonical() const {
        std::string best = bits;
        for (std::size_t k = 1; k < bits.size(); ++k) {
            std::string r = bits.substr(k) + bits.substr(0, k);
            if (r < best) best = std::move(r);
        }
        return SymbolWord(std::move(best));
    }

    /// Smallest d dividing n with the word d-periodic.
    int primitive_period() const {
        const std::size_t n = bits.size();
        for (std::size_t d = 1; d <= n; ++d) {
            if (n % d) continue;
            bool ok = true;
            for (std::size_t i = d; i < n && ok; ++i) ok = bits[i] == bits[i - d];
            if (ok) return static_cast<int>(d);
        }
        return static_cast<int>(n);
    }

    int ones() const { return static_cast<int>(std::count(bits.begin(), bits.end(), '1')); }

    friend bool operator==(const SymbolWord& a, const SymbolWord& b) { return a.bits == b.bits; }
    friend bool operator<(const SymbolWord& a, const SymbolWord& b) { return a.bits < b.bits; }
};

/// Canonical representatives of all binary necklaces of length n, sorted.
inline std::vector<SymbolWord> necklaces(int n) {
    if (n < 1 || n > 30) throw DomainError("necklace length must lie in [1, 30]");
    std::vector<SymbolWord> out;
    const std::uint64_t count = std::uint64_t{1} << n;
    const std::uint64_t mask = count - 1;
    for (std::uint64_t v = 0; v < count; ++v) {
        bool minimal = true;
        std::uint64_t r = v;
        for (int k = 1; k < n && minimal; ++k) {
            r = ((r << 1) | (r >> (n - 1))) & mask;
            if (r < v) minimal = false;
        }
        if (minimal) out.push_back(SymbolWord::from_index(v, n));
    }
    return out;
}

struct MultiplierResult {
    double log_u = 0.0;                // log |dominant eigenvalue of D f^n|
    double log_s = 0.0;                // log |other eigenvalue|, from the inverse cocycle
    std::vector<double> local_log_ju;  // log J^u at each orbit point; sums to log_u
};

namespace detail {

inline Mat2 orbit_jacobian(const MapParams& params, Point2 p, int symbol) {
    if (params.is_affine()) return affine_branch_jacobian(params, symbol);
    return jacobian(params, p);
}

/// Growth of a unit vector under one period of the cocycle once its
/// direction has converged to the dominant one.
inline double cocycle_growth(const std::vector<Mat2>& mats, std::vector<double>* local) {
    Vec2 v = normalized(Vec2{1.0, 0.618});
    Vec2 prev = v;
    for (int period = 0; period < 200; ++period) {
        for (const Mat2& m : mats) {
            v = m * v;
            const double n = norm(v);
            if (!(n > 0.0) || !std::isfinite(n)) throw NeutralOrbitError("degenerate derivative cocycle");
            v = (1.0 / n) * v;
        }
        if (period >= 3 && std::abs(std::abs(dot(v, prev)) - 1.0) < 1e-15) break;
        prev = v;
    }
    double total = 0.0;
    if (local) local->clear();
    for (const Mat2& m : mats) {
        v = m * v;
        const double n = norm(v);
        v = (1.0 / n) * v;
        total += std::log(n);
        if (local) local->push_back(std::log(n));
    }
    return total;
}

}  // namespace detail

/// Dominant eigenvalue modulus of D f^n along a periodic orbit by a
/// renormalized vector cocycle; the second eigenvalue comes from the
/// inverse cocycle run backwards along the orbit.
inline MultiplierResult unstable_multiplier(const MapParams& params, const std::vector<Point2>& points,
                                            const SymbolWord* word = nullptr) {
    if (points.empty()) throw DomainError("empty orbit");
    std::vector<Mat2> fwd;
    fwd.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int sym = word ? word->symbol(i) : (params.is_affine() ? affine_branch(params, points[i]) : 0);
        fwd.push_back(detail::orbit_jacobian(params, points[i], sym));
    }
    MultiplierResult out;
    out.log_u = detail::cocycle_growth(fwd, &out.local_log_ju);
    if (std::abs(out.log_u) <= 1e-8) throw NeutralOrbitError("orbit multiplier is neutral");
    bool invertible = true;
    std::vector<Mat2> bwd;
    for (auto it = fwd.rbegin(); it != fwd.rend(); ++it) {
        const double det = it->det();
        if (det == 0.0) {
            invertible = false;
            break;
        }
        bwd.push_back({it->d / det, -it->b / det, -it->c / det, it->a / det});
    }
    out.log_s = invertible ? -detail::cocycle_growth(bwd, nullptr) : -std::numeric_limits<double>::infinity();
    return out;
}

struct PeriodicOrbit {
    SymbolWord word;
    std::vector<Point2> points;  // n points (repeats when the word is not primitive)
    double multiplier_u = 0.0;
    double log_mult = 0.0;
    double log_mult_s = 0.0;
    std::map<std::string, double> birkhoff;  // observable name -> S_n phi
    double residual = 0.0;

    std::size_t n() const { return word.size(); }
    int period() const { return word.primitive_period(); }
    double lyapunov() const { return log_mult / static_cast<double>(n()); }
};

inline double birkhoff_sum(const PeriodicOrbit& orbit, const Observable& phi) {
    double s = 0.0;
    for (const Point2& p : orbit.points) s += phi(p);
    return s;
}

struct OrbitOptions {
    int n_max = 16;
    int newton_max_iter = 60;
    int sweep_iters = 400;
    int bw_steps = 20000;
    double bw_step = 0.1;
};

struct EnumerationResult {
    MapParams params;
    int n = 0;
    std::vector<PeriodicOrbit> orbits;  // sorted by canonical word
    std::vector<SymbolWord> misses;

    /// Number of distinct fixed points of f^n covered by the orbits.
    std::size_t fixed_point_count() const {
        std::size_t c = 0;
        for (const auto& o : orbits) c += static_cast<std::size_t>(o.period());
        return c;
    }
};

namespace detail {

inline double cyclic_residual(const MapParams& params, const SymbolWord& w, const std::vector<Point2>& pts) {
    double r = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 img = params.is_affine() ? affine_branch_apply(params, w.symbol(i), pts[i])
                                              : apply(params, pts[i]);
        r = std::max(r, distance(img, pts[(i + 1) % n]));
    }
    return r;
}

/// Damped Newton on the 2n-dimensional cyclic system p_{i+1} = f(p_i).
inline bool newton_cycle(const MapParams& params, const SymbolWord& w, std::vector<Point2>& pts,
                         int max_iter, double tol) {
    const std::size_t n = pts.size();
    const Eigen::Index dim = static_cast<Eigen::Index>(2 * n);
    auto residual_vec = [&](const std::vector<Point2>& z, Eigen::VectorXd& F) {
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 img = params.is_affine() ? affine_branch_apply(params, w.symbol(i), z[i])
                                                  : apply(params, z[i]);
            const Point2 d = img - z[(i + 1) % n];
            F[static_cast<Eigen::Index>(2 * i)] = d.x;
            F[static_cast<Eigen::Index>(2 * i + 1)] = d.y;
        }
        return F.lpNorm<Eigen::Infinity>();
    };
    Eigen::VectorXd F(dim), Ft(dim);
    double res = residual_vec(pts, F);
    for (int it = 0; it < max_iter; ++it) {
        if (!std::isfinite(res)) return false;
        if (res <= tol * 0.01) return true;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t i = 0; i < n; ++i) {
            const Mat2 m = orbit_jacobian(params, pts[i], w.symbol(i));
            const auto r = static_cast<Eigen::Index>(2 * i);
            const auto c = static_cast<Eigen::Index>(2 * ((i + 1) % n));
            J(r, r) += m.a;
            J(r, r + 1) += m.b;
            J(r + 1, r) += m.c;
            J(r + 1, r + 1) += m.d;
            J(r, c) -= 1.0;
            J(r + 1, c + 1) -= 1.0;
        }
        const Eigen::VectorXd step = J.partialPivLu().solve(-F);
        if (!step.allFinite()) return false;
        double alpha = 1.0;
        bool improved = false;
        std::vector<Point2> trial(n);
        for (int ls = 0; ls < 30; ++ls) {
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = pts[i] + alpha * Vec2{step[static_cast<Eigen::Index>(2 * i)],
                                                 step[static_cast<Eigen::Index>(2 * i + 1)]};
            const double rt = residual_vec(trial, Ft);
            if (std::isfinite(rt) && rt < res) {
                pts = trial;
                res = rt;
                F = Ft;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) return res <= tol;
    }
    return res <= tol;
}

/// Henon seed: Gauss-Seidel sweeps of the inverse-branch contraction
/// x_i = s_i sqrt((1 + b x_{i-1} - x_{i+1}) / a).
inline std::vector<Point2> henon_seed(const MapParams& params, const SymbolWord& w, int sweeps) {
    const std::size_t n = w.size();
    const double r = (1.0 + std::sqrt(1.0 + 4.0 * params.a)) / (2.0 * params.a);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (w.symbol(i) ? 1.0 : -1.0) * r;
    for (int s = 0; s < sweeps; ++s) {
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double prev = x[(i + n - 1) % n];
            const double next = x[(i + 1) % n];
            const double arg = std::max(0.0, (1.0 + params.b * prev - next) / params.a);
            const double xi = (w.symbol(i) ? 1.0 : -1.0) * std::sqrt(arg);
            change = std::max(change, std::abs(xi - x[i]));
            x[i] = xi;
        }
        if (change < 1e-15) break;
    }
    std::vector<Point2> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {x[i], params.b * x[(i + n - 1) % n]};
    return pts;
}

/// Biham-Wenzel relaxation dx_i/dtau = -s_i (x_{i+1} - 1 + a x_i^2 - b x_{i-1}).
inline std::vector<Point2> biham_wenzel(const MapParams& params, const SymbolWord& w,
                                        std::vector<Point2> start, int steps, double h) {
    const std::size_t n = w.size();
    std::vector<double> x(n), F(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = start[i].x;
    for (int k = 0; k < steps; ++k) {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            F[i] = x[(i + 1) % n] - 1.0 + params.a * x[i] * x[i] - params.b * x[(i + n - 1) % n];
            worst = std::max(worst, std::abs(F[i]));
        }
        if (!std::isfinite(worst)) break;
        if (worst < 1e-12) break;
        for (std::size_t i = 0; i < n; ++i) x[i] -= h * (w.symbol(i) ? 1.0 : -1.0) * F[i];
    }
    std::vector<Point2> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {x[i], params.b * x[(i + n - 1) % n]};
    return pts;
}

inline bool symbols_match(const MapParams& params, const SymbolWord& w, const std::vector<Point2>& pts) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (params.is_affine()) {
            const double slack = 1e-12, h = 1.0 / params.lambda_u;
            const Point2 p = pts[i];
            if (p.x < -slack || p.x > 1.0 + slack) return false;
            const bool in_strip = w.symbol(i) ? (p.y >= 1.0 - h - slack && p.y <= 1.0 + slack)
                                              : (p.y >= -slack && p.y <= h + slack);
            if (!in_strip) return false;
        } else if ((pts[i].x > 0.0) != (w.symbol(i) == 1)) {
            return false;
        }
    }
    return true;
}

}  // namespace detail

/// Periodic orbit with the given itinerary, or nothing when the solver
/// does not converge to a point set realizing the word.
inline std::optional<PeriodicOrbit> solve_orbit(const MapParams& params, const SymbolWord& word,
                                                const std::vector<Observable>& observables = {},
                                                const OrbitOptions& opt = {}) {
    const std::size_t n = word.size();
    const double tol = params.tol_fp;
    std::vector<Point2> pts;
    bool ok = false;
    if (params.is_affine()) {
        pts.resize(n);
        for (std::size_t i = 0; i < n; ++i) pts[i] = {0.5, word.symbol(i) ? 0.9 : 0.1};
        ok = detail::newton_cycle(params, word, pts, opt.newton_max_iter, tol) &&
             detail::symbols_match(params, word, pts);
    } else {
        pts = detail::henon_seed(params, word, opt.sweep_iters);
        ok = detail::newton_cycle(params, word, pts, opt.newton_max_iter, tol) &&
             detail::symbols_match(params, word, pts);
        if (!ok) {
            pts = detail::biham_wenzel(params, word, detail::henon_seed(params, word, opt.sweep_iters),
                                       opt.bw_steps, opt.bw_step);
            ok = detail::newton_cycle(params, word, pts, opt.newton_max_iter, tol) &&
                 detail::symbols_match(params, word, pts);
        }
    }
    if (!ok) return std::nullopt;
    PeriodicOrbit orb;
    orb.word = word;
    orb.points = std::move(pts);
    orb.residual = detail::cyclic_residual(params, word, orb.points);
    if (!(orb.residual <= tol)) return std::nullopt;
    MultiplierResult mr;
    try {
        mr = unstable_multiplier(params, orb.points, &word);
    } catch (const NeutralOrbitError&) {
        return std::nullopt;
    }
    orb.log_mult = mr.log_u;
    orb.log_mult_s = mr.log_s;
    orb.multiplier_u = std::exp(mr.log_u);
    for (const Observable& phi : observables) orb.birkhoff[phi.name] = birkhoff_sum(orb, phi);
    return orb;
}

/// One orbit per binary necklace of length n (fixed points of f^n).
inline EnumerationResult enumerate_orbits(const MapParams& params, int n,
                                          const std::vector<Observable>& observables = {},
                                          const OrbitOptions& opt = {}) {
    params.validate();
    if (n < 1 || n > opt.n_max) throw DomainError("orbit period outside [1, n_max]");
    EnumerationResult res;
    res.params = params;
    res.n = n;
    for (const SymbolWord& w : necklaces(n)) {
        if (auto orb = solve_orbit(params, w, observables, opt))
            res.orbits.push_back(std::move(*orb));
        else
            res.misses.push_back(w);
    }
    return res;
}

/// Strip Theta between the stable curves alpha_1^- and alpha_1^+ of W^s(P)
/// (Henon), or the whole unit square (affine).
struct ThetaRegion {
    bool whole_square = false;
    std::vector<Point2> right;  // alpha_1^+, sorted by y; graph x = g(y)
    double y_half = 0.0;
    double a = 0.0, b = 0.0;

    double right_x(double y) const {
        if (right.empty()) return 0.0;
        if (y <= right.front().y) return right.front().x;
        if (y >= right.back().y) return right.back().x;
        auto it = std::lower_bound(right.begin(), right.end(), y,
                                   [](const Point2& p, double v) { return p.y < v; });
        const Point2 hi = *it, lo = *(it - 1);
        const double u = hi.y > lo.y ? (y - lo.y) / (hi.y - lo.y) : 0.0;
        return lo.x + u * (hi.x - lo.x);
    }

    /// alpha_1^-: the x < 0 solution of 1 - a x^2 + y = g(b x).
    double left_x(double y) const {
        double x = -0.5;
        for (int i = 0; i < 60; ++i) x = -std::sqrt(std::max(0.0, (1.0 + y - right_x(b * x)) / a));
        return x;
    }

    bool contains(Point2 p) const {
        if (whole_square) return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
        if (std::abs(p.y) > y_half) return false;
        return p.x <= right_x(p.y) && p.x >= left_x(p.y);
    }
};

inline ThetaRegion make_theta(const MapParams& params, const ManifoldOptions& mopt = {}) {
    ThetaRegion th;
    if (params.is_affine()) {
        th.whole_square = true;
        return th;
    }
    if (!(params.b > 0.0)) throw NonInvertibleError("Theta needs W^s(P), which requires b > 0");
    const auto [P, Q] = fixed_points(params);
    th.a = params.a;
    th.b = params.b;
    th.y_half = std::sqrt(params.b);
    for (int br : {+1, -1}) {
        const Curve c = grow_stable(params, P, 4.0 * th.y_half + 0.5, br, mopt);
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (std::abs(c.points[i].y) > 1.2 * th.y_half) break;
            th.right.push_back(c.points[i]);
        }
    }
    std::sort(th.right.begin(), th.right.end(), [](Point2 u, Point2 v) { return u.y < v.y; });
    return th;
}

struct ReturnSample {
    Point2 point;
    std::optional<int> r;  // empty: no return within the horizon (infinite)
};

struct ReturnPartition {
    std::vector<ReturnSample> samples;
    std::map<int, std::size_t> histogram;
    std::size_t infinite = 0;

    /// Fraction of samples with r >= k (infinite returns included).
    double tail_mass(int k) const {
        if (samples.empty()) return 0.0;
        std::size_t c = infinite;
        for (const auto& [r, cnt] : histogram)
            if (r >= k) c += cnt;
        return static_cast<double>(c) / static_cast<double>(samples.size());
    }
};

inline ReturnPartition first_return_times(const MapParams& params, const ThetaRegion& theta,
                                          const std::vector<Point2>& samples, int n_max) {
    ReturnPartition out;
    for (const Point2& x0 : samples) {
        ReturnSample rs{x0, std::nullopt};
        Point2 p = x0;
        for (int n = 1; n <= n_max; ++n) {
            auto q = try_apply(params, p);
            if (!q || !(std::abs(q->x) <= divergence_cutoff && std::abs(q->y) <= divergence_cutoff)) break;
            p = *q;
            if (theta.contains(p)) {
                rs.r = n;
                break;
            }
        }
        if (rs.r)
            ++out.histogram[*rs.r];
        else
            ++out.infinite;
        out.samples.push_back(rs);
    }
    return out;
}

/// Distance to the critical set: nearest fold inside I(delta), 1 outside.
/// The affine horseshoe has no critical set.
inline double d_crit(const MapParams& params, Point2 x, const std::vector<Fold>& folds, double delta) {
    if (params.is_affine() || std::abs(x.x) >= delta) return 1.0;
    if (folds.empty()) throw DiagnosticError("point lies in I(delta) but no fold is known");
    double best = std::numeric_limits<double>::infinity();
    for (const Fold& f : folds) best = std::min(best, distance(f.point, x));
    return best;
}

struct GmResult {
    bool pass = true;
    int first_failure = -1;
    bool escaped = false;
    int horizon = 0;
};

/// Finite-horizon membership test for G_m: d_crit(f^n x) > b^{n/9} for m <= n <= N
/// at every visit to I(delta).
inline GmResult g_m_test(const MapParams& params, Point2 x, int m, int N, const std::vector<Fold>& folds,
                         double delta) {
    if (N < m) throw DomainError("g_m_test needs N >= m");
    GmResult res;
    res.horizon = N;
    Point2 p = x;
    for (int n = 0; n <= N; ++n) {
        if (n > 0) {
            auto q = try_apply(params, p);
            if (!q || !(std::abs(q->x) <= divergence_cutoff && std::abs(q->y) <= divergence_cutoff)) {
                res.escaped = true;
                res.pass = false;
                return res;
            }
            p = *q;
        }
        // outside I(delta) d_crit is 1, which passes even at n = 0 where the bound is 1
        if (n < m || params.is_affine() || std::abs(p.x) >= delta) continue;
        const double bound = std::pow(params.b, static_cast<double>(n) / 9.0);
        if (!(d_crit(params, p, folds, delta) > bound)) {
            res.pass = false;
            res.first_failure = n;
            return res;
        }
    }
    return res;
}

}  // namespace henonmf
