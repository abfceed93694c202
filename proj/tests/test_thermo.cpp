#include <gtest/gtest.h>

#include <cmath>

#include "henonmf/thermo.hpp"

using namespace henonmf;

namespace {

const OrbitEnsemble& affine_ensemble(int n) {
    static std::map<int, OrbitEnsemble> cache;
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, OrbitEnsemble::from(enumerate_orbits(MapParams::affine(), n, {symbol_indicator()}))).first;
    return it->second;
}

const OrbitEnsemble& horseshoe_ensemble() {
    static const OrbitEnsemble e =
        OrbitEnsemble::from(enumerate_orbits(MapParams::henon(5.0, 0.3), 10, {coord_x(), constant_observable(0.7)}));
    return e;
}

// H(p) / log 3: entropy of the Bernoulli(p) measure over its unstable Lyapunov exponent
double bernoulli_dimension(double p) {
    auto xlogx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
    return -(xlogx(p) + xlogx(1.0 - p)) / std::log(3.0);
}

}  // namespace

TEST(Pressure, AffineClosedForm) {
    for (int n : {1, 4, 9}) {
        const auto& e = affine_ensemble(n);
        for (double t : {0.0, 0.3, 0.9, 1.5}) EXPECT_NEAR(pressure(e, t), std::log(2.0) - t * std::log(3.0), 1e-12);
    }
}

TEST(Pressure, CountingAtZero) {
    EXPECT_NEAR(pressure(horseshoe_ensemble(), 0.0), std::log(2.0), 1e-12);
}

TEST(Pressure, StrictlyDecreasing) {
    const auto& e = horseshoe_ensemble();
    EXPECT_GT(pressure(e, 0.5), pressure(e, 0.6));
    const PressureCurve c = pressure_curve(e, linspace(0.0, 1.0, 21));
    for (std::size_t i = 1; i < c.values.size(); ++i) EXPECT_LT(c.values[i], c.values[i - 1]);
}

TEST(DimensionRoot, AffineLogRatio) {
    for (int n : {1, 6, 12}) {
        const DimensionRoot r = dimension_root(affine_ensemble(n));
        EXPECT_NEAR(r.t, std::log(2.0) / std::log(3.0), 1e-9);
        EXPECT_GE(r.p_lo, 0.0);
        EXPECT_LE(r.p_hi, 0.0);
    }
}

TEST(DimensionRoot, EmptyEnsembleThrows) {
    OrbitEnsemble e;
    e.n = 3;
    EXPECT_THROW(dimension_root(e), EmptyEnsembleError);
}

TEST(TwoParamPressure, ReducesAtQZero) {
    const auto& e = horseshoe_ensemble();
    for (double t : {0.1, 0.5}) EXPECT_NEAR(two_param_pressure(e, "coord_x", 0.0, t, 0.2), pressure(e, t), 1e-14);
}

TEST(TwoParamPressure, AffineSingleStep) {
    const auto& e = affine_ensemble(1);
    for (double q : {-3.0, 0.0, 0.7, 5.0})
        for (double t : {0.0, 0.4})
            EXPECT_NEAR(two_param_pressure(e, "symbol_indicator", q, t, 0.5),
                        std::log(2.0 * std::cosh(q / 2.0)) - t * std::log(3.0), 1e-13);
}

TEST(TwoParamPressure, ZeroInT) {
    const auto& e = horseshoe_ensemble();
    const auto S = e.sums("coord_x");
    const double t = detail::pressure_zero(e, &S, 1.3, 0.1);
    EXPECT_NEAR(two_param_pressure(e, "coord_x", 1.3, t, 0.1), 0.0, 1e-12);
}

TEST(GibbsStats, CountingMeasure) {
    const GibbsStats g = gibbs_stats(horseshoe_ensemble(), 0.0, 0.0, "coord_x");
    EXPECT_NEAR(g.entropy, std::log(2.0), 1e-12);
    EXPECT_NEAR(g.pressure, std::log(2.0), 1e-12);
}

TEST(GibbsStats, AffineLyapunovIsConstant) {
    for (double q : {-2.0, 0.5})
        for (double t : {0.0, 0.8}) {
            const GibbsStats g = gibbs_stats(affine_ensemble(8), q, t, "symbol_indicator", 0.3);
            EXPECT_NEAR(g.mean_lambda, std::log(3.0), 1e-12);
        }
}

TEST(GibbsStats, EstimatorIdentity) {
    const auto& e = horseshoe_ensemble();
    for (double q : {-4.0, 0.0, 2.5})
        for (double t : {0.2, 0.7}) {
            const double beta = 0.05;
            const GibbsStats g = gibbs_stats(e, q, t, "coord_x", beta);
            const double lhs = g.entropy - t * g.mean_lambda + q * (g.mean_phi - beta);
            EXPECT_NEAR(lhs, two_param_pressure(e, "coord_x", q, t, beta), 1e-8);
        }
}

TEST(Legendre, AffineBernoulliOracle) {
    const auto& e = affine_ensemble(12);
    const SpectrumCurve c = spectrum_legendre(e, "symbol_indicator", linspace(0.1, 0.9, 17));
    for (const auto& p : c.points) EXPECT_NEAR(p.B, bernoulli_dimension(p.beta), 1e-3) << "beta=" << p.beta;
    EXPECT_NEAR(spectrum_point(e, "symbol_indicator", 0.5).B, std::log(2.0) / std::log(3.0), 1e-9);
}

TEST(Legendre, EndpointDegenerates) {
    const auto& e = affine_ensemble(12);
    EXPECT_LT(spectrum_point(e, "symbol_indicator", 0.0).B, 0.05);
    EXPECT_LT(spectrum_point(e, "symbol_indicator", 1.0).B, 0.05);
    EXPECT_TRUE(spectrum_point(e, "symbol_indicator", 1.5).out_of_range);
}

TEST(Legendre, MaximumIsDimensionAtGibbsMean) {
    const auto& e = horseshoe_ensemble();
    const double tu = dimension_root(e).t;
    const double beta_star = gibbs_stats(e, 0.0, tu, "coord_x").mean_phi;
    EXPECT_NEAR(spectrum_point(e, "coord_x", beta_star).B, tu, 1e-6);
    const auto [lo, hi] = empirical_range(e, "coord_x");
    const SpectrumCurve c = spectrum_legendre(e, "coord_x", linspace(lo, hi, 41));
    double best = 0.0;
    for (const auto& p : c.points) best = std::max(best, p.B);
    EXPECT_LE(best, tu + 1e-9);
    EXPECT_NEAR(best, tu, 1e-2);
}

TEST(Legendre, ConstantObservableGivesDimension) {
    const auto& e = horseshoe_ensemble();
    EXPECT_NEAR(spectrum_point(e, "constant", 0.7).B, dimension_root(e).t, 1e-8);
}

TEST(Threshold, Values) {
    EXPECT_NEAR(badset_threshold(std::exp(-2.0)), 1.0, 1e-15);
    EXPECT_NEAR(badset_threshold(1e-3), 0.28953, 1e-5);
    EXPECT_THROW(badset_threshold(0.0), DomainError);
    EXPECT_THROW(badset_threshold(1.0), DomainError);
}

TEST(Threshold, FlagsBelowThreshold) {
    const auto& e = horseshoe_ensemble();
    const auto [lo, hi] = empirical_range(e, "coord_x");
    const SpectrumCurve c = spectrum_legendre(e, "coord_x", linspace(lo, hi, 21));
    EXPECT_NEAR(c.threshold, badset_threshold(0.3), 1e-15);
    for (const auto& p : c.points)
        if (!p.out_of_range) EXPECT_EQ(p.below_threshold, p.B <= c.threshold);
}
