#pragma once

// Geometric side of the spectrum: survivor sampling of the unstable slice,
// finite-time Birkhoff averages and box counting on arclength.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "manifolds.hpp"
#include "map_core.hpp"
#include "symbolic.hpp"
#include "thermo.hpp"

namespace henonmf {

/// Forward-survival region: the unit square for the affine horseshoe,
/// {|x| <= 2, |y| <= 2 sqrt(b)} for Henon.
inline bool in_region(const MapParams& params, Point2 p) {
    if (params.is_affine()) return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
    return std::abs(p.x) <= 2.0 && std::abs(p.y) <= 2.0 * std::sqrt(params.b);
}

/// Piece of W^u(P) through P crossing the region: both branches, truncated
/// at their first exit, joined into one arclength-parametrized polyline.
inline Curve unstable_slice(const MapParams& params, double branch_length = 4.0, const ManifoldOptions& opt = {}) {
    const auto [P, Q] = fixed_points(params);
    Curve out;
    out.anchor = SaddleLabel::P;
    if (params.is_affine()) {
        // W^u(P) is the vertical segment through P
        const std::size_t n = 1025;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = static_cast<double>(i) / static_cast<double>(n - 1);
            out.points.push_back({P.point.x, y});
            out.arclen.push_back(y);
            out.param.push_back(y);
        }
        return out;
    }
    auto truncate = [&](const Curve& c) {
        std::vector<Point2> pts;
        for (const Point2& p : c.points) {
            if (!in_region(params, p)) break;
            pts.push_back(p);
        }
        return pts;
    };
    const auto plus = truncate(grow_unstable(params, P, branch_length, +1, opt));
    const auto minus = truncate(grow_unstable(params, P, branch_length, -1, opt));
    for (auto it = minus.rbegin(); it != minus.rend(); ++it) out.points.push_back(*it);
    for (std::size_t i = 1; i < plus.size(); ++i) out.points.push_back(plus[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        if (i > 0) s += distance(out.points[i - 1], out.points[i]);
        out.arclen.push_back(s);
        out.param.push_back(s);
    }
    return out;
}

struct SampleEntry {
    double s = 0.0;
    Point2 point;
    int survival = 0;
    double average = 0.0;  // A_N = S_N phi / N (for non-survivors, over the steps spent inside)
    bool g_m = true;
};

struct SampleSet {
    MapParams params;
    std::string observable;
    int horizon = 0;
    std::size_t grid = 0;
    double length = 0.0;
    std::vector<SampleEntry> entries;          // survivors (all samples when kept)
    std::vector<std::size_t> survival_counts;  // [j] = samples alive after j steps

    double spacing() const { return grid ? length / static_cast<double>(grid) : 0.0; }
    std::size_t survivors() const { return survival_counts.empty() ? 0 : survival_counts.back(); }
    double survivor_fraction(int j) const {
        return grid ? static_cast<double>(survival_counts.at(static_cast<std::size_t>(j))) / static_cast<double>(grid)
                    : 0.0;
    }
};

struct SampleOptions {
    int horizon = 40;
    std::size_t grid = 2'000'000;
    bool keep_all = false;  // keep non-surviving samples too
    int threads = 1;
    // G_m flag: d_crit(f^n x) > b^{n/9} for gm_m <= n <= horizon; skipped without folds
    int gm_m = 0;
    double delta = 0.1;
    std::vector<Fold> folds;
};

/// Equispaced arclength samples on `wu` iterated forward up to the horizon;
/// the anchor P is always included.
inline SampleSet sample_omega_u(const MapParams& params, const Curve& wu, const Observable& phi,
                                const SampleOptions& opt = {}) {
    if (wu.size() < 2) throw DomainError("sample_omega_u needs a grown curve");
    if (opt.horizon < 1 || opt.grid < 1) throw DomainError("horizon and grid must be positive");
    const auto [P, Q] = fixed_points(params);
    SampleSet set;
    set.params = params;
    set.observable = phi.name;
    set.horizon = opt.horizon;
    set.grid = opt.grid;
    set.length = wu.length();
    const int N = opt.horizon;

    // arclength of the anchor
    const PolylineHit hp = nearest_on_polyline(wu.points, P.point);
    const double s_anchor =
        wu.arclen[hp.segment] + hp.u * (wu.arclen[hp.segment + 1] - wu.arclen[hp.segment]);

    struct Chunk {
        std::vector<SampleEntry> entries;
        std::vector<std::size_t> counts;
    };
    const bool use_gm = !opt.folds.empty() || params.is_affine();
    auto run = [&](std::size_t begin, std::size_t end, Chunk& ch, bool with_anchor) {
        ch.counts.assign(static_cast<std::size_t>(N) + 1, 0);
        const double h = set.spacing();
        std::size_t idx = begin;
        bool anchor_done = !with_anchor;
        while (idx < end || !anchor_done) {
            double s;
            bool is_anchor = false;
            if (!anchor_done && (idx >= end || s_anchor < (static_cast<double>(idx) + 0.5) * h)) {
                s = s_anchor;
                is_anchor = true;
                anchor_done = true;
            } else {
                s = (static_cast<double>(idx) + 0.5) * h;
                ++idx;
            }
            const Point2 x0 = is_anchor ? P.point : wu.at_arclength(s);
            Point2 p = x0;
            double sum = 0.0;
            int alive = 0;
            if (is_anchor) {
                // exact orbit of the fixed point; iterating it would drift off the saddle
                sum = N * phi(p);
                alive = N;
            } else if (in_region(params, p)) {
                for (int n = 0; n < N; ++n) {
                    sum += phi(p);
                    auto q = try_apply(params, p);
                    if (!q || !in_region(params, *q)) break;
                    p = *q;
                    ++alive;
                }
            }
            for (int j = 0; j <= alive; ++j) ++ch.counts[static_cast<std::size_t>(j)];
            if (alive < N && !opt.keep_all) continue;
            SampleEntry e{s, x0, alive, sum / std::max(1, std::min(alive + 1, N)), true};
            if (alive == N && use_gm && !params.is_affine())
                e.g_m = g_m_test(params, x0, std::min(opt.gm_m, N), N, opt.folds, opt.delta).pass;
            ch.entries.push_back(e);
        }
    };
    const int threads = std::max(1, opt.threads);
    std::vector<Chunk> chunks(static_cast<std::size_t>(threads));
    // the anchor goes to the chunk whose index range contains its arclength
    const std::size_t anchor_idx = std::min(
        opt.grid - 1, static_cast<std::size_t>(std::max(0.0, s_anchor / set.spacing())));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        const std::size_t b = opt.grid * static_cast<std::size_t>(t) / static_cast<std::size_t>(threads);
        const std::size_t e = opt.grid * static_cast<std::size_t>(t + 1) / static_cast<std::size_t>(threads);
        const bool with_anchor = anchor_idx >= b && anchor_idx < e;
        if (threads == 1)
            run(b, e, chunks[0], true);
        else
            pool.emplace_back(run, b, e, std::ref(chunks[static_cast<std::size_t>(t)]), with_anchor);
    }
    for (auto& th : pool) th.join();
    set.survival_counts.assign(static_cast<std::size_t>(N) + 1, 0);
    for (const Chunk& ch : chunks) {
        for (std::size_t j = 0; j < ch.counts.size(); ++j) set.survival_counts[j] += ch.counts[j];
        set.entries.insert(set.entries.end(), ch.entries.begin(), ch.entries.end());
    }
    if (set.survivors() == 0) throw EmptyEnsembleError("no sample survives the horizon");
    return set;
}

struct DimensionEstimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
    double s_min = 0.0, s_max = 0.0;  // box sizes bounding the fit
    std::vector<double> scales;       // dyadic box sizes, coarse to fine
    std::vector<std::size_t> counts;  // occupied boxes per scale
    std::size_t fit_lo = 0, fit_hi = 0;  // fit uses scales[fit_lo..fit_hi]
    std::size_t samples = 0;
    std::size_t clusters = 0;
    bool insufficient = false;
};

struct BoxOptions {
    std::size_t min_samples = 50;
    double coarse_fraction = 0.25;  // coarsest box: length / 4
};

namespace detail {

inline DimensionEstimate box_dimension(const std::vector<double>& s, double length, double spacing,
                                       const BoxOptions& opt) {
    DimensionEstimate d;
    d.samples = s.size();
    if (s.size() < opt.min_samples) {
        d.insufficient = true;
        return d;
    }
    d.clusters = 1;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] - s[i - 1] > 1.5 * spacing) ++d.clusters;
    for (double delta = length * opt.coarse_fraction; delta >= spacing; delta *= 0.5) {
        std::size_t count = 0;
        long long last = std::numeric_limits<long long>::min();
        for (double v : s) {
            const auto box = static_cast<long long>(std::floor(v / delta));
            if (box != last) {
                ++count;
                last = box;
            }
        }
        d.scales.push_back(delta);
        d.counts.push_back(count);
    }
    // finest usable scale: boxes still well below the cluster count
    std::size_t fine = 0;
    for (std::size_t j = 0; j < d.counts.size(); ++j)
        if (2 * d.counts[j] <= d.clusters) fine = j;
    if (fine < 2) {
        d.insufficient = true;
        return d;
    }
    // the middle decade of the usable range
    const double decade = std::log2(10.0);
    double lo = 0.0, hi = static_cast<double>(fine);
    if (hi - lo > decade) {
        const double c = 0.5 * (lo + hi);
        lo = c - 0.5 * decade;
        hi = c + 0.5 * decade;
    }
    d.fit_lo = static_cast<std::size_t>(std::floor(lo));
    d.fit_hi = static_cast<std::size_t>(std::ceil(hi));
    const std::size_t npts = d.fit_hi - d.fit_lo + 1;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = d.fit_lo; j <= d.fit_hi; ++j) {
        const double x = std::log(1.0 / d.scales[j]), y = std::log(static_cast<double>(d.counts[j]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double np = static_cast<double>(npts);
    const double slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / np;
    double rss = 0.0;
    for (std::size_t j = d.fit_lo; j <= d.fit_hi; ++j) {
        const double x = std::log(1.0 / d.scales[j]), y = std::log(static_cast<double>(d.counts[j]));
        rss += (y - icpt - slope * x) * (y - icpt - slope * x);
    }
    const double sxx_c = sxx - sx * sx / np;
    d.value = slope;
    d.stderr_ = npts > 2 ? std::sqrt(rss / (np - 2.0) / sxx_c) : 0.0;
    d.s_max = d.scales[d.fit_lo];
    d.s_min = d.scales[d.fit_hi];
    return d;
}

}  // namespace detail

/// Box dimension of the survivors with |A_N - beta| <= w (w = infinity: all survivors).
inline DimensionEstimate level_set_dimension(const SampleSet& samples, double beta, double w,
                                             const BoxOptions& opt = {}) {
    std::vector<double> s;
    for (const SampleEntry& e : samples.entries) {
        if (e.survival < samples.horizon) continue;
        if (std::isinf(w) || std::abs(e.average - beta) <= w) s.push_back(e.s);
    }
    std::sort(s.begin(), s.end());
    return detail::box_dimension(s, samples.length, samples.spacing(), opt);
}

/// Default window 2 stddev(A_N) / sqrt(N) over the survivors.
inline double default_window(const SampleSet& samples) {
    double m = 0.0, m2 = 0.0;
    std::size_t c = 0;
    for (const SampleEntry& e : samples.entries) {
        if (e.survival < samples.horizon) continue;
        m += e.average;
        m2 += e.average * e.average;
        ++c;
    }
    if (c < 2) return std::numeric_limits<double>::infinity();
    m /= static_cast<double>(c);
    const double var = std::max(0.0, m2 / static_cast<double>(c) - m * m);
    return 2.0 * std::sqrt(var) / std::sqrt(static_cast<double>(samples.horizon));
}

struct RouteRow {
    double beta = 0.0;
    double legendre = std::numeric_limits<double>::quiet_NaN();
    double direct = std::numeric_limits<double>::quiet_NaN();
    double box = std::numeric_limits<double>::quiet_NaN();
    double box_stderr = std::numeric_limits<double>::quiet_NaN();
    bool below_threshold = false;
    bool interior = false;
};

struct RouteReport {
    std::vector<RouteRow> rows;
    // over interior rows without the below-threshold flag
    double max_direct_gap = 0.0;
    double max_box_gap = 0.0;
    std::size_t compared = 0;
    // over all interior rows regardless of the flag
    double max_direct_gap_all = 0.0;
    double max_box_gap_all = 0.0;
};

/// Interior: the middle 80% of the empirical range of phi.
inline bool interior_beta(const SpectrumCurve& c, double beta) {
    const double pad = 0.1 * (c.phi_max - c.phi_min);
    return beta >= c.phi_min + pad && beta <= c.phi_max - pad;
}

inline RouteReport compare_routes(const SpectrumCurve& spectrum, const std::vector<double>& direct,
                                  const std::vector<DimensionEstimate>& levelsets) {
    RouteReport rep;
    for (std::size_t i = 0; i < spectrum.points.size(); ++i) {
        const SpectrumPoint& p = spectrum.points[i];
        RouteRow r;
        r.beta = p.beta;
        r.legendre = p.B;
        r.below_threshold = p.below_threshold;
        r.interior = !p.out_of_range && interior_beta(spectrum, p.beta);
        if (i < direct.size()) r.direct = direct[i];
        if (i < levelsets.size() && !levelsets[i].insufficient) {
            r.box = levelsets[i].value;
            r.box_stderr = levelsets[i].stderr_;
        }
        if (r.interior) {
            const double gd = std::isnan(r.direct) ? 0.0 : std::abs(r.direct - r.legendre);
            const double gb = std::isnan(r.box) ? 0.0 : std::abs(r.box - r.legendre);
            rep.max_direct_gap_all = std::max(rep.max_direct_gap_all, gd);
            rep.max_box_gap_all = std::max(rep.max_box_gap_all, gb);
            if (!r.below_threshold) {
                rep.max_direct_gap = std::max(rep.max_direct_gap, gd);
                rep.max_box_gap = std::max(rep.max_box_gap, gb);
                ++rep.compared;
            }
        }
        rep.rows.push_back(r);
    }
    return rep;
}

}  // namespace henonmf
