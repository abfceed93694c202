#include <gtest/gtest.h>

#include <cmath>

#include "henonmf/markov.hpp"

using namespace henonmf;

namespace {

const OrbitEnsemble& affine_ensemble() {
    static const OrbitEnsemble e =
        OrbitEnsemble::from(enumerate_orbits(MapParams::affine(), 10, {symbol_indicator()}));
    return e;
}

const OrbitEnsemble& horseshoe_ensemble() {
    static const OrbitEnsemble e =
        OrbitEnsemble::from(enumerate_orbits(MapParams::henon(5.0, 0.3), 12, {coord_x(), constant_observable(0.7)}));
    return e;
}

double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

// max of H(p)/log 3 over Bernoulli(p) with |p - beta| <= eps, by grid search
double bernoulli_window_max(double beta, double eps) {
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double p = beta - eps + 2.0 * eps * i / 200000.0;
        if (p < 0.0 || p > 1.0) continue;
        best = std::max(best, -(xlogx(p) + xlogx(1.0 - p)) / std::log(3.0));
    }
    return best;
}

}  // namespace

TEST(BlockPotentials, AffineExactFit) {
    const BlockPotentials bp = fit_block_potentials(affine_ensemble(), "symbol_indicator", 0);
    ASSERT_EQ(bp.blocks(), 2u);
    EXPECT_NEAR(bp.phi[0], 0.0, 1e-12);
    EXPECT_NEAR(bp.phi[1], 1.0, 1e-12);
    EXPECT_NEAR(bp.lambda[0], std::log(3.0), 1e-12);
    EXPECT_NEAR(bp.lambda[1], std::log(3.0), 1e-12);
    EXPECT_LT(bp.phi_rms, 1e-12);
}

TEST(BlockPotentials, HorseshoeFitImprovesWithMemory) {
    const auto& e = horseshoe_ensemble();
    const double r1 = fit_block_potentials(e, "coord_x", 1).phi_rms;
    const double r4 = fit_block_potentials(e, "coord_x", 4).phi_rms;
    EXPECT_LT(r4, r1);
    EXPECT_THROW(fit_block_potentials(e, "coord_x", 12), DomainError);
}

TEST(CycleMeans, AgreeWithCycleEnumeration) {
    const int k = 2;
    const std::vector<double> w{0.3, -1.2, 2.0, 0.1, 0.7, -0.4, 1.5, 0.0};
    // every simple cycle of the de Bruijn graph on 2-blocks is a word of length <= 4
    double lo = 1e300, hi = -1e300;
    for (int len = 1; len <= 4; ++len)
        for (int v = 0; v < (1 << len); ++v) {
            const SymbolWord word = SymbolWord::from_index(static_cast<std::uint64_t>(v), len);
            double s = 0.0;
            for (int j = 0; j < len; ++j) {
                int idx = 0;
                for (int m = 0; m <= k; ++m) idx = (idx << 1) | word.symbol(static_cast<std::size_t>(j + m));
                s += w[static_cast<std::size_t>(idx)];
            }
            lo = std::min(lo, s / len);
            hi = std::max(hi, s / len);
        }
    const auto [a, b] = cycle_mean_range(w, k);
    EXPECT_NEAR(a, lo, 1e-12);
    EXPECT_NEAR(b, hi, 1e-12);
}

TEST(MarkovEntropy, BernoulliAndUniform) {
    const double p = 0.3;
    // 2-blocks of a Bernoulli(p) sequence
    const std::vector<double> mu{(1 - p) * (1 - p), (1 - p) * p, p * (1 - p), p * p};
    EXPECT_NEAR(markov_entropy(mu, 1), -(xlogx(p) + xlogx(1 - p)), 1e-14);
    const std::vector<double> uni(8, 0.125);
    EXPECT_NEAR(markov_entropy(uni, 2), std::log(2.0), 1e-14);
}

TEST(Direct, AffineBernoulliHalf) {
    DirectOptions opt;
    opt.k = 0;
    opt.epsilon = 1e-3;
    const DirectResult r = spectrum_direct(affine_ensemble(), "symbol_indicator", 0.5, opt);
    ASSERT_TRUE(r.feasible);
    EXPECT_NEAR(r.value, std::log(2.0) / std::log(3.0), 1e-4);
}

TEST(Direct, AffineWindowedOracle) {
    for (int k : {0, 1, 2}) {
        DirectOptions opt;
        opt.k = k;
        opt.epsilon = 1e-3;
        for (double beta : {0.1, 0.27, 0.62, 0.9}) {
            const DirectResult r = spectrum_direct(affine_ensemble(), "symbol_indicator", beta, opt);
            ASSERT_TRUE(r.feasible);
            EXPECT_NEAR(r.value, bernoulli_window_max(beta, 1e-3), 1e-6) << "k=" << k << " beta=" << beta;
        }
    }
}

TEST(Direct, InfeasibleOutsideRange) {
    DirectOptions opt;
    opt.k = 1;
    opt.epsilon = 1e-3;
    EXPECT_FALSE(spectrum_direct(affine_ensemble(), "symbol_indicator", 1.2, opt).feasible);
}

TEST(Direct, ConstantObservableGivesDimension) {
    const auto& e = horseshoe_ensemble();
    DirectOptions opt;
    opt.k = 4;
    const DirectResult r = spectrum_direct(e, "constant", 0.7, opt);
    ASSERT_TRUE(r.feasible);
    EXPECT_TRUE(r.window_interior);
    EXPECT_NEAR(r.value, dimension_root(e).t, 1e-2);
}

TEST(Direct, HorseshoeMatchesLegendre) {
    const auto& e = horseshoe_ensemble();
    const auto [lo, hi] = empirical_range(e, "coord_x");
    DirectOptions opt;
    opt.k = 4;
    for (double beta : linspace(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), 7)) {
        const DirectResult r = spectrum_direct(e, "coord_x", beta, opt);
        ASSERT_TRUE(r.feasible);
        EXPECT_NEAR(r.value, spectrum_point(e, "coord_x", beta).B, 1e-2) << "beta=" << beta;
        double total = 0.0;
        for (double m : r.mu) {
            EXPECT_GE(m, -1e-12);
            total += m;
        }
        EXPECT_NEAR(total, 1.0, 1e-10);
    }
}
