#pragma once

// Direct route to the Birkhoff spectrum: maximize h(mu)/lambda(mu) over
// memory-k Markov measures of the two-shift under a window on the mean of phi.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "thermo.hpp"

namespace henonmf {

/// Potentials on (k+1)-blocks whose cyclic sums reproduce the ensemble's
/// S_n phi and log_mult in the least-squares sense. Blocks are indexed with
/// the first symbol as the most significant bit.
struct BlockPotentials {
    int k = 0;
    std::vector<double> phi;
    std::vector<double> lambda;
    double phi_rms = 0.0;     // rms fit residual of S_n phi / n
    double lambda_rms = 0.0;  // rms fit residual of log_mult / n

    std::size_t blocks() const { return std::size_t{1} << (k + 1); }
};

namespace detail {

inline std::vector<double> block_counts(const SymbolWord& w, int k) {
    std::vector<double> c(std::size_t{1} << (k + 1), 0.0);
    const std::size_t n = w.size();
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t idx = 0;
        for (int m = 0; m <= k; ++m) idx = (idx << 1) | static_cast<std::size_t>(w.symbol(j + static_cast<std::size_t>(m)));
        c[idx] += 1.0;
    }
    return c;
}

}  // namespace detail

inline BlockPotentials fit_block_potentials(const OrbitEnsemble& ens, const std::string& phi, int k) {
    ens.require_nonempty();
    if (k < 0 || k > 10) throw DomainError("Markov memory k must lie in [0, 10]");
    if (ens.n <= k) throw DomainError("block statistics need orbit period n > k");
    const auto S = ens.sums(phi);
    BlockPotentials bp;
    bp.k = k;
    const auto rows = static_cast<Eigen::Index>(ens.entries.size());
    const auto cols = static_cast<Eigen::Index>(bp.blocks());
    Eigen::MatrixXd M(rows, cols);
    Eigen::VectorXd ys(rows), yl(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& e = ens.entries[static_cast<std::size_t>(i)];
        const auto c = detail::block_counts(e.word, k);
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = c[static_cast<std::size_t>(j)];
        ys[i] = S[static_cast<std::size_t>(i)];
        yl[i] = e.log_mult;
    }
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
    const Eigen::VectorXd xs = cod.solve(ys);
    const Eigen::VectorXd xl = cod.solve(yl);
    bp.phi.assign(xs.data(), xs.data() + xs.size());
    bp.lambda.assign(xl.data(), xl.data() + xl.size());
    bp.phi_rms = std::sqrt((M * xs - ys).squaredNorm() / static_cast<double>(rows)) / ens.n;
    bp.lambda_rms = std::sqrt((M * xl - yl).squaredNorm() / static_cast<double>(rows)) / ens.n;
    return bp;
}

/// Minimum and maximum cycle mean of block weights on the de Bruijn graph
/// of k-blocks (Karp), i.e. the range of the mean over invariant measures.
inline std::pair<double, double> cycle_mean_range(const std::vector<double>& w, int k) {
    const std::size_t V = std::size_t{1} << k;
    const std::size_t mask = V - 1;
    auto min_mean = [&](const std::vector<double>& wt) {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<std::vector<double>> D(V + 1, std::vector<double>(V, inf));
        D[0][0] = 0.0;
        for (std::size_t step = 1; step <= V; ++step)
            for (std::size_t c = 0; c < wt.size(); ++c) {
                const std::size_t from = c >> 1, to = c & mask;
                if (D[step - 1][from] < inf) D[step][to] = std::min(D[step][to], D[step - 1][from] + wt[c]);
            }
        double best = inf;
        for (std::size_t v = 0; v < V; ++v) {
            if (!(D[V][v] < inf)) continue;
            double worst = -inf;
            for (std::size_t s = 0; s < V; ++s)
                if (D[s][v] < inf) worst = std::max(worst, (D[V][v] - D[s][v]) / static_cast<double>(V - s));
            best = std::min(best, worst);
        }
        return best;
    };
    std::vector<double> neg(w.size());
    std::transform(w.begin(), w.end(), neg.begin(), [](double v) { return -v; });
    return {min_mean(w), -min_mean(neg)};
}

/// Entropy of the shift-invariant Markov measure given by (k+1)-block
/// frequencies: H(k+1 blocks) - H(k-block prefixes).
inline double markov_entropy(const std::vector<double>& mu, int k) {
    std::vector<double> pre(std::size_t{1} << k, 0.0);
    double h = 0.0;
    for (std::size_t c = 0; c < mu.size(); ++c) {
        pre[c >> 1] += mu[c];
        if (mu[c] > 0.0) h -= mu[c] * std::log(mu[c]);
    }
    for (double p : pre)
        if (p > 0.0) h += p * std::log(p);
    return h;
}

struct DirectOptions {
    int k = 4;
    double epsilon = -1.0;  // window half-width; negative selects (d_phi - c_phi)/200
    int max_newton = 200;
    int max_dinkelbach = 60;
};

struct DirectResult {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
    bool window_interior = false;  // unconstrained optimum already inside the window
    double beta = 0.0;
    double epsilon = 0.0;
    double target = 0.0;  // mean of phi at the optimum
    double entropy = 0.0;
    double lambda = 0.0;
    int k = 0;
    int iterations = 0;
    std::vector<double> mu;                      // (k+1)-block frequencies
    std::vector<std::vector<double>> transition;  // k-block to k-block
};

namespace detail {

/// Maximize h(mu) - gamma <Lambda, mu> subject to normalization, shift
/// consistency and optionally <Phi, mu> = target (infeasible-start Newton).
inline std::vector<double> markov_inner(const BlockPotentials& bp, double gamma, std::optional<double> target,
                                        std::vector<double> mu, int max_iter) {
    const int k = bp.k;
    const std::size_t B = bp.blocks(), V = std::size_t{1} << k, mask = V - 1;
    const auto nB = static_cast<Eigen::Index>(B);
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    Eigen::VectorXd one = Eigen::VectorXd::Ones(nB);
    rows.push_back(one);
    rhs.push_back(1.0);
    for (std::size_t u = 0; u + 1 < V; ++u) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(nB);
        for (std::size_t c = 0; c < B; ++c) {
            if ((c & mask) == u) r[static_cast<Eigen::Index>(c)] += 1.0;
            if ((c >> 1) == u) r[static_cast<Eigen::Index>(c)] -= 1.0;
        }
        rows.push_back(r);
        rhs.push_back(0.0);
    }
    if (target) {
        rows.push_back(Eigen::Map<const Eigen::VectorXd>(bp.phi.data(), nB));
        rhs.push_back(*target);
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd A(m, nB);
    for (Eigen::Index i = 0; i < m; ++i) A.row(i) = rows[static_cast<std::size_t>(i)].transpose();
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), m);
    const Eigen::VectorXd L = Eigen::Map<const Eigen::VectorXd>(bp.lambda.data(), nB);

    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(mu.data(), nB);
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);
    // gradient of the convex objective -h + gamma <L, mu>
    auto grad = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd pre = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(V));
        for (Eigen::Index c = 0; c < nB; ++c) pre[c >> 1] += z[c];
        Eigen::VectorXd g(nB);
        for (Eigen::Index c = 0; c < nB; ++c) g[c] = std::log(z[c]) - std::log(pre[c >> 1]) + gamma * L[c];
        return g;
    };
    auto residual = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& v) {
        Eigen::VectorXd r(nB + m);
        r.head(nB) = grad(z) + A.transpose() * v;
        r.tail(m) = A * z - b;
        return r;
    };
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd r = residual(x, nu);
        const double rn = r.norm();
        if (rn < 1e-13) break;
        Eigen::VectorXd pre = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(V));
        for (Eigen::Index c = 0; c < nB; ++c) pre[c >> 1] += x[c];
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nB + m, nB + m);
        for (Eigen::Index c = 0; c < nB; ++c) {
            K(c, c) += 1.0 / x[c];
            for (Eigen::Index d = 0; d < nB; ++d)
                if ((c >> 1) == (d >> 1)) K(c, d) -= 1.0 / pre[c >> 1];
        }
        K.topRightCorner(nB, m) = A.transpose();
        K.bottomLeftCorner(m, nB) = A;
        const Eigen::VectorXd step = K.completeOrthogonalDecomposition().solve(-r);
        const Eigen::VectorXd dx = step.head(nB), dv = step.tail(m);
        double t = 1.0;
        for (Eigen::Index c = 0; c < nB; ++c)
            if (dx[c] < 0.0) t = std::min(t, -0.99 * x[c] / dx[c]);
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::VectorXd xt = x + t * dx, vt = nu + t * dv;
            if ((xt.array() > 0.0).all() && residual(xt, vt).norm() <= (1.0 - 0.01 * t) * rn) {
                x = xt;
                nu = vt;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    return std::vector<double>(x.data(), x.data() + x.size());
}

inline double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace detail

/// Dinkelbach iteration for max h/lambda at fixed constraints.
inline DirectResult markov_ratio_max(const BlockPotentials& bp, std::optional<double> target,
                                     std::vector<double> mu0, const DirectOptions& opt) {
    DirectResult res;
    res.k = bp.k;
    std::vector<double> mu = std::move(mu0);
    double gamma = markov_entropy(mu, bp.k) / detail::dot_vec(mu, bp.lambda);
    for (int it = 0; it < opt.max_dinkelbach; ++it) {
        mu = detail::markov_inner(bp, gamma, target, mu, opt.max_newton);
        const double h = markov_entropy(mu, bp.k), lam = detail::dot_vec(mu, bp.lambda);
        if (!(lam > 0.0)) throw IllConditionedError("fitted Lyapunov potential is not positive on the optimum");
        const double next = h / lam;
        res.iterations = it + 1;
        const bool done = std::abs(next - gamma) <= 1e-13 * std::max(1.0, std::abs(gamma));
        gamma = next;
        if (done) break;
    }
    res.mu = mu;
    res.value = gamma;
    res.entropy = markov_entropy(mu, bp.k);
    res.lambda = detail::dot_vec(mu, bp.lambda);
    res.target = detail::dot_vec(mu, bp.phi);
    const std::size_t V = std::size_t{1} << bp.k, mask = V - 1;
    std::vector<double> pre(V, 0.0);
    for (std::size_t c = 0; c < mu.size(); ++c) pre[c >> 1] += mu[c];
    res.transition.assign(V, std::vector<double>(V, 0.0));
    for (std::size_t c = 0; c < mu.size(); ++c)
        if (pre[c >> 1] > 0.0) res.transition[c >> 1][c & mask] += mu[c] / pre[c >> 1];
    return res;
}

/// Block frequencies of the Gibbs weights at (q, t), mixed with the uniform
/// measure to keep every block positive.
inline std::vector<double> gibbs_block_measure(const OrbitEnsemble& ens, const std::string& phi, int k, double q,
                                               double t, double beta) {
    const auto S = ens.sums(phi);
    const auto x = detail::gibbs_exponents(ens, &S, q, t, beta);
    const double lse = detail::log_sum_exp(x);
    const std::size_t B = std::size_t{1} << (k + 1);
    std::vector<double> mu(B, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = std::exp(x[i] - lse);
        const auto c = detail::block_counts(ens.entries[i].word, k);
        for (std::size_t j = 0; j < B; ++j) mu[j] += w * c[j] / ens.n;
    }
    for (double& v : mu) v = 0.98 * v + 0.02 / static_cast<double>(B);
    return mu;
}

/// Direct estimate of B(beta): sup of h/lambda over memory-k Markov measures
/// with |mean phi - beta| <= epsilon.
inline DirectResult spectrum_direct(const OrbitEnsemble& ens, const std::string& phi, double beta,
                                    const DirectOptions& opt = {}) {
    const BlockPotentials bp = fit_block_potentials(ens, phi, opt.k);
    const auto [c_phi, d_phi] = empirical_range(ens, phi);
    // a rounding-level floor keeps a degenerate range (constant phi) feasible
    const double eps = std::max(opt.epsilon >= 0.0 ? opt.epsilon : (d_phi - c_phi) / 200.0,
                                1e-12 * std::max(1.0, std::abs(beta)));
    const auto [lo, hi] = cycle_mean_range(bp.phi, opt.k);
    DirectResult out;
    out.beta = beta;
    out.epsilon = eps;
    out.k = opt.k;
    if (beta + eps < lo || beta - eps > hi) return out;

    const SpectrumPoint sp = spectrum_point(ens, phi, std::clamp(beta, c_phi, d_phi));
    const std::vector<double> mu0 = gibbs_block_measure(ens, phi, opt.k, sp.q_star, sp.t_star, sp.beta);

    DirectResult free = markov_ratio_max(bp, std::nullopt, mu0, opt);
    if (std::abs(free.target - beta) <= eps) {
        free.feasible = true;
        free.window_interior = true;
        free.beta = beta;
        free.epsilon = eps;
        return free;
    }
    // quasi-concavity puts the windowed optimum on the edge facing the free optimum
    const double inset = 1e-9 * std::max(1.0, hi - lo);
    double target = free.target > beta ? beta + eps : beta - eps;
    target = hi - lo > 2.0 * inset ? std::clamp(target, lo + inset, hi - inset) : 0.5 * (lo + hi);
    DirectResult r = markov_ratio_max(bp, target, mu0, opt);
    r.feasible = true;
    r.beta = beta;
    r.epsilon = eps;
    return r;
}

}  // namespace henonmf
