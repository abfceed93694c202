#include <gtest/gtest.h>

#include <cmath>

#include "henonmf/levelsets.hpp"

using namespace henonmf;

namespace {

const double log2_log3 = std::log(2.0) / std::log(3.0);

SampleSet affine_samples(int N, std::size_t grid) {
    const auto p = MapParams::affine();
    SampleOptions o;
    o.horizon = N;
    o.grid = grid;
    return sample_omega_u(p, unstable_slice(p), symbol_indicator(), o);
}

}  // namespace

TEST(Slice, AffineIsVerticalThroughP) {
    const auto p = MapParams::affine();
    const Curve c = unstable_slice(p);
    const Point2 P = fixed_points(p).first.point;
    for (const Point2& q : c.points) EXPECT_NEAR(q.x, P.x, 1e-15);
    EXPECT_NEAR(c.length(), 1.0, 1e-12);
}

TEST(Slice, HenonStaysInRegion) {
    const auto p = MapParams::henon(5.0, 0.3);
    const Curve c = unstable_slice(p);
    ASSERT_GE(c.size(), 2u);
    for (const Point2& q : c.points) EXPECT_TRUE(in_region(p, q));
    EXPECT_LT(nearest_on_polyline(c.points, fixed_points(p).first.point).dist, 1e-12);
}

TEST(Sampling, AffineSurvivorFraction) {
    const SampleSet ss = affine_samples(8, 1'000'000);
    for (int j = 0; j <= 8; ++j) EXPECT_NEAR(ss.survivor_fraction(j), std::pow(2.0 / 3.0, j), 1e-5) << "j=" << j;
}

TEST(Sampling, AffineSurvivorsAreCantorPoints) {
    // survivors of N steps lie in the level-N middle-thirds intervals of the slice
    const SampleSet ss = affine_samples(6, 100'000);
    for (const SampleEntry& e : ss.entries) {
        double y = e.point.y;
        for (int k = 0; k < 6; ++k) {
            ASSERT_TRUE(y <= 1.0 / 3.0 || y >= 2.0 / 3.0) << "y=" << e.point.y;
            y = y <= 1.0 / 3.0 ? 3.0 * y : 3.0 * (1.0 - y);
        }
    }
}

TEST(Sampling, HenonSurvivalDecreases) {
    const auto p = MapParams::henon(5.0, 0.3);
    SampleOptions o;
    o.horizon = 8;
    o.grid = 200'000;
    const SampleSet ss = sample_omega_u(p, unstable_slice(p), coord_x(), o);
    for (int j = 1; j <= 8; ++j) EXPECT_LT(ss.survival_counts[static_cast<std::size_t>(j)],
                                           ss.survival_counts[static_cast<std::size_t>(j - 1)]);
}

TEST(Sampling, AnchorAlwaysRetained) {
    const auto p = MapParams::henon(5.0, 0.3);
    const Point2 P = fixed_points(p).first.point;
    SampleOptions o;
    o.horizon = 30;
    o.grid = 1000;  // far too coarse for any other survivor
    const SampleSet ss = sample_omega_u(p, unstable_slice(p), coord_x(), o);
    bool found = false;
    for (const SampleEntry& e : ss.entries) found = found || distance(e.point, P) < 1e-14;
    EXPECT_TRUE(found);
}

TEST(Sampling, ThreadsGiveIdenticalSamples) {
    const auto p = MapParams::henon(5.0, 0.3);
    const Curve wu = unstable_slice(p);
    SampleOptions o;
    o.horizon = 8;
    o.grid = 100'000;
    const SampleSet one = sample_omega_u(p, wu, coord_x(), o);
    o.threads = 3;
    const SampleSet three = sample_omega_u(p, wu, coord_x(), o);
    ASSERT_EQ(one.entries.size(), three.entries.size());
    for (std::size_t i = 0; i < one.entries.size(); ++i) {
        EXPECT_EQ(one.entries[i].s, three.entries[i].s);
        EXPECT_EQ(one.entries[i].average, three.entries[i].average);
    }
    EXPECT_EQ(one.survival_counts, three.survival_counts);
}

TEST(BoxDimension, MiddleThirdsCantorOracle) {
    // left endpoints of the level-12 middle-thirds intervals
    std::vector<double> pts{0.0};
    double scale = 1.0;
    for (int k = 0; k < 12; ++k) {
        scale /= 3.0;
        std::vector<double> next;
        for (double x : pts) {
            next.push_back(x);
            next.push_back(x + 2.0 * scale);
        }
        pts = std::move(next);
    }
    std::sort(pts.begin(), pts.end());
    const DimensionEstimate d = detail::box_dimension(pts, 1.0, 1e-7, BoxOptions{});
    ASSERT_FALSE(d.insufficient);
    EXPECT_NEAR(d.value, log2_log3, 0.03);
}

TEST(LevelSet, AffineHalf) {
    const SampleSet ss = affine_samples(12, 20'000'000);
    EXPECT_GE(ss.survivors(), 100'000u);
    const DimensionEstimate d = level_set_dimension(ss, 0.5, 0.05);
    ASSERT_FALSE(d.insufficient);
    EXPECT_NEAR(d.value, log2_log3, 0.05);
    const DimensionEstimate whole = level_set_dimension(ss, 0.0, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(whole.value, log2_log3, 0.05);
}

TEST(LevelSet, OutsideRangeIsInsufficient) {
    const SampleSet ss = affine_samples(6, 100'000);
    EXPECT_TRUE(level_set_dimension(ss, 2.0, 0.05).insufficient);
}

TEST(Routes, FlaggedPointsExcluded) {
    SpectrumCurve c;
    c.phi_min = 0.0;
    c.phi_max = 1.0;
    c.threshold = 0.3;
    for (double beta : {0.2, 0.5, 0.8}) {
        SpectrumPoint p;
        p.beta = beta;
        p.B = beta == 0.2 ? 0.25 : 0.6;
        p.below_threshold = p.B <= c.threshold;
        c.points.push_back(p);
    }
    std::vector<DimensionEstimate> ls(3);
    ls[0].value = 0.9;  // far off, but flagged
    ls[1].value = 0.62;
    ls[2].value = 0.55;
    const RouteReport rep = compare_routes(c, {0.25, 0.6, 0.6}, ls);
    EXPECT_EQ(rep.compared, 2u);
    EXPECT_NEAR(rep.max_box_gap, 0.05, 1e-12);
    EXPECT_NEAR(rep.max_box_gap_all, 0.65, 1e-12);
    EXPECT_TRUE(rep.rows[0].below_threshold);
}
