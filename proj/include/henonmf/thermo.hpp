#pragma once

// Periodic-orbit pressure, the dimension root t^u, Gibbs statistics and the
// Legendre route to the Birkhoff spectrum.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "map_core.hpp"
#include "symbolic.hpp"

namespace henonmf {

struct EnsembleEntry {
    SymbolWord word;
    int period = 0;  // primitive period: number of distinct fixed points of f^n on the orbit
    double log_mult = 0.0;
    double residual = 0.0;
    std::map<std::string, double> sums;
};

struct OrbitEnsemble {
    int n = 0;
    MapParams params;
    std::vector<EnsembleEntry> entries;

    static OrbitEnsemble from(const EnumerationResult& res) {
        OrbitEnsemble e;
        e.n = res.n;
        e.params = res.params;
        for (const PeriodicOrbit& o : res.orbits)
            e.entries.push_back({o.word, o.period(), o.log_mult, o.residual, o.birkhoff});
        return e;
    }

    std::size_t fixed_point_count() const {
        std::size_t c = 0;
        for (const auto& e : entries) c += static_cast<std::size_t>(e.period);
        return c;
    }

    bool has_observable(const std::string& name) const {
        return !entries.empty() &&
               std::all_of(entries.begin(), entries.end(), [&](const EnsembleEntry& e) { return e.sums.count(name) > 0; });
    }

    std::vector<double> sums(const std::string& name) const {
        if (!has_observable(name)) throw DomainError("ensemble has no Birkhoff sums for observable " + name);
        std::vector<double> s;
        s.reserve(entries.size());
        for (const auto& e : entries) s.push_back(e.sums.at(name));
        return s;
    }

    void require_nonempty() const {
        if (entries.empty()) throw EmptyEnsembleError("orbit ensemble is empty");
    }
};

/// 2/log(1/b), the ceiling below which the spectrum formula is unproven.
inline double badset_threshold(double b) {
    if (!(b > 0.0 && b < 1.0)) throw DomainError("badset_threshold needs 0 < b < 1");
    return 2.0 / std::log(1.0 / b);
}

/// Threshold attached to a parameter set: 0 when there is no contraction
/// constant to speak of (b = 0 or the affine family).
inline double spectrum_threshold(const MapParams& params) {
    if (params.is_affine() || params.b == 0.0) return 0.0;
    return badset_threshold(params.b);
}

namespace detail {

/// log sum_i exp(x_i), fixed summation order.
inline double log_sum_exp(const std::vector<double>& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

/// Exponents log d_i + q (S_i - n beta) - t L_i.
inline std::vector<double> gibbs_exponents(const OrbitEnsemble& ens, const std::vector<double>* S, double q,
                                           double t, double beta) {
    std::vector<double> x(ens.entries.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& e = ens.entries[i];
        double v = std::log(static_cast<double>(e.period)) - t * e.log_mult;
        if (S && q != 0.0) v += q * ((*S)[i] - ens.n * beta);
        x[i] = v;
    }
    return x;
}

}  // namespace detail

/// P_n(t) = (1/n) log sum_orbits d exp(-t log_mult).
inline double pressure(const OrbitEnsemble& ens, double t) {
    ens.require_nonempty();
    return detail::log_sum_exp(detail::gibbs_exponents(ens, nullptr, 0.0, t, 0.0)) / ens.n;
}

/// P_n(q,t,beta) = (1/n) log sum d exp(q (S_n phi - n beta) - t log_mult).
inline double two_param_pressure(const OrbitEnsemble& ens, const std::string& phi, double q, double t,
                                 double beta) {
    ens.require_nonempty();
    const std::vector<double> S = ens.sums(phi);
    return detail::log_sum_exp(detail::gibbs_exponents(ens, &S, q, t, beta)) / ens.n;
}

struct PressureCurve {
    std::vector<double> t_grid;
    std::vector<double> values;
    int n = 0;
};

inline PressureCurve pressure_curve(const OrbitEnsemble& ens, const std::vector<double>& t_grid) {
    PressureCurve c;
    c.n = ens.n;
    c.t_grid = t_grid;
    for (double t : t_grid) c.values.push_back(pressure(ens, t));
    return c;
}

struct DimensionRoot {
    double t = 0.0;
    double lo = 0.0, hi = 1.0;      // final bracket
    double p_lo = 0.0, p_hi = 0.0;  // P_n at the bracket ends
    int iterations = 0;
};

/// Bisection root of P_n on [0,1] to 1e-10.
inline DimensionRoot dimension_root(const OrbitEnsemble& ens, double tol = 1e-10) {
    ens.require_nonempty();
    DimensionRoot r;
    r.p_lo = pressure(ens, 0.0);
    r.p_hi = pressure(ens, 1.0);
    if (!(r.p_lo > 0.0 && r.p_hi < 0.0))
        throw NoRootError("pressure does not change sign on [0,1]: P(0)=" + std::to_string(r.p_lo) +
                          " P(1)=" + std::to_string(r.p_hi));
    while (r.hi - r.lo > tol && r.iterations < 200) {
        const double mid = 0.5 * (r.lo + r.hi);
        const double pm = pressure(ens, mid);
        if (pm > 0.0) {
            r.lo = mid;
            r.p_lo = pm;
        } else {
            r.hi = mid;
            r.p_hi = pm;
        }
        ++r.iterations;
    }
    r.t = 0.5 * (r.lo + r.hi);
    return r;
}

struct GibbsStats {
    double mean_phi = 0.0;     // weighted mean of S_n phi / n
    double mean_lambda = 0.0;  // weighted mean of log_mult / n
    double entropy = 0.0;      // per unit time
    double pressure = 0.0;     // P_n(q,t,beta)
};

/// Statistics of the weights proportional to d exp(q (S_n phi - n beta) - t log_mult).
/// The entropy satisfies h - t<lambda> + q(<phi> - beta) = P_n(q,t,beta).
inline GibbsStats gibbs_stats(const OrbitEnsemble& ens, double q, double t, const std::string& phi,
                              double beta = 0.0) {
    ens.require_nonempty();
    std::vector<double> S;
    if (!phi.empty()) S = ens.sums(phi);
    const auto x = detail::gibbs_exponents(ens, phi.empty() ? nullptr : &S, q, t, beta);
    const double lse = detail::log_sum_exp(x);
    GibbsStats g;
    g.pressure = lse / ens.n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = std::exp(x[i] - lse);
        g.mean_lambda += w * ens.entries[i].log_mult / ens.n;
        if (!phi.empty()) g.mean_phi += w * S[i] / ens.n;
    }
    g.entropy = g.pressure + t * g.mean_lambda - q * (g.mean_phi - beta);
    return g;
}

namespace detail {

/// Zero of t -> P_n(q,t,beta). Newton from the left is monotone for a
/// convex decreasing function.
inline double pressure_zero(const OrbitEnsemble& ens, const std::vector<double>* S, double q, double beta) {
    double t = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ens.entries.size(); ++i) {
        const auto& e = ens.entries[i];
        double c = std::log(static_cast<double>(e.period));
        if (S && q != 0.0) c += q * ((*S)[i] - ens.n * beta);
        t = std::max(t, c / e.log_mult);
    }
    t -= 1.0;
    for (int it = 0; it < 200; ++it) {
        const auto x = gibbs_exponents(ens, S, q, t, beta);
        const double lse = log_sum_exp(x);
        double dl = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) dl += std::exp(x[i] - lse) * ens.entries[i].log_mult;
        const double step = lse / dl;
        t += step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(t))) break;
    }
    return t;
}

inline double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > tol) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

struct SpectrumPoint {
    double beta = 0.0;
    double B = std::numeric_limits<double>::quiet_NaN();
    double q_star = 0.0;
    double t_star = 0.0;
    GibbsStats witness;
    bool below_threshold = false;
    bool out_of_range = false;
    bool q_at_bound = false;
};

struct SpectrumCurve {
    std::string observable;
    double threshold = 0.0;
    double phi_min = 0.0, phi_max = 0.0;  // empirical I_phi
    std::vector<SpectrumPoint> points;

    std::vector<double> beta_grid() const {
        std::vector<double> b;
        for (const auto& p : points) b.push_back(p.beta);
        return b;
    }
};

struct LegendreOptions {
    double q_min = -50.0;
    double q_max = 50.0;
    int q_scan = 201;
    double q_tol = 1e-9;
};

/// Empirical range [min, max] of S_n phi / n over the ensemble.
inline std::pair<double, double> empirical_range(const OrbitEnsemble& ens, const std::string& phi) {
    const auto S = ens.sums(phi);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double s : S) {
        lo = std::min(lo, s / ens.n);
        hi = std::max(hi, s / ens.n);
    }
    return {lo, hi};
}

/// B(beta) = min_q t(q, beta), t the zero of the two-parameter pressure.
inline SpectrumPoint spectrum_point(const OrbitEnsemble& ens, const std::string& phi, double beta,
                                    const LegendreOptions& opt = {}) {
    ens.require_nonempty();
    const auto S = ens.sums(phi);
    const auto [lo, hi] = empirical_range(ens, phi);
    SpectrumPoint sp;
    sp.beta = beta;
    const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (!(beta >= lo - slack && beta <= hi + slack)) {
        sp.out_of_range = true;
        return sp;
    }
    auto t_of = [&](double q) { return detail::pressure_zero(ens, &S, q, beta); };
    int best = 0;
    double best_t = std::numeric_limits<double>::infinity();
    const double dq = (opt.q_max - opt.q_min) / (opt.q_scan - 1);
    for (int j = 0; j < opt.q_scan; ++j) {
        const double tv = t_of(opt.q_min + j * dq);
        if (tv < best_t) {
            best_t = tv;
            best = j;
        }
    }
    sp.q_at_bound = best == 0 || best == opt.q_scan - 1;
    const double a = opt.q_min + std::max(0, best - 1) * dq;
    const double b = opt.q_min + std::min(opt.q_scan - 1, best + 1) * dq;
    sp.q_star = detail::golden_min(t_of, a, b, opt.q_tol);
    sp.t_star = t_of(sp.q_star);
    if (best_t < sp.t_star) {
        sp.q_star = opt.q_min + best * dq;
        sp.t_star = best_t;
    }
    sp.B = std::clamp(sp.t_star, 0.0, 1.0);
    sp.witness = gibbs_stats(ens, sp.q_star, sp.t_star, phi, beta);
    return sp;
}

inline SpectrumCurve spectrum_legendre(const OrbitEnsemble& ens, const std::string& phi,
                                       const std::vector<double>& beta_grid, const LegendreOptions& opt = {}) {
    SpectrumCurve c;
    c.observable = phi;
    c.threshold = spectrum_threshold(ens.params);
    std::tie(c.phi_min, c.phi_max) = empirical_range(ens, phi);
    for (double beta : beta_grid) {
        SpectrumPoint sp = spectrum_point(ens, phi, beta, opt);
        if (!sp.out_of_range) sp.below_threshold = sp.B <= c.threshold;
        c.points.push_back(sp);
    }
    return c;
}

/// `count` equispaced points on [lo, hi].
inline std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> g;
    if (count == 1) return {lo};
    for (int i = 0; i < count; ++i) g.push_back(lo + (hi - lo) * i / (count - 1));
    return g;
}

}  // namespace henonmf
