#include <gtest/gtest.h>

#include <cmath>

#include "henonmf/manifolds.hpp"

using namespace henonmf;

TEST(GrowUnstable, AffineVerticalSegment) {
    const auto p = MapParams::affine();
    const auto Q = fixed_points(p).second;  // (0, 0)
    const Curve c = grow_unstable(p, Q, 1.0);
    ASSERT_GE(c.size(), 2u);
    double ymax = 0.0;
    for (const Point2& q : c.points) {
        EXPECT_NEAR(q.x, 0.0, 1e-14);
        EXPECT_GE(q.y, -1e-14);
        ymax = std::max(ymax, q.y);
    }
    EXPECT_NEAR(ymax, 1.0, 1e-3);
}

TEST(GrowStable, AffineHorizontalSegment) {
    const auto p = MapParams::affine();
    const auto Q = fixed_points(p).second;
    const Curve c = grow_stable(p, Q, 1.0);
    ASSERT_GE(c.size(), 2u);
    double xmax = 0.0;
    for (const Point2& q : c.points) {
        EXPECT_NEAR(q.y, 0.0, 1e-14);
        xmax = std::max(xmax, q.x);
    }
    EXPECT_NEAR(xmax, 1.0, 1e-3);
}

TEST(GrowUnstable, ShadowsHenonAttractor) {
    // every point of a long attractor orbit lies near the grown W^u(P)
    const auto p = MapParams::henon(1.4, 0.3);
    const auto P = fixed_points(p).first;
    Curve plus = grow_unstable(p, P, 30.0, +1);
    const Curve minus = grow_unstable(p, P, 30.0, -1);
    plus.points.insert(plus.points.end(), minus.points.begin(), minus.points.end());
    Point2 z{0.1, 0.1};
    for (int i = 0; i < 1000; ++i) z = apply(p, z);
    double worst = 0.0;
    for (int i = 0; i < 3000; ++i) {
        z = apply(p, z);
        worst = std::max(worst, nearest_on_polyline(plus.points, z).dist);
    }
    EXPECT_LT(worst, 1e-2);
}

TEST(GrowUnstable, ForwardInvariance) {
    // eig_u < 0 swaps the two branches, so the image is checked against both
    const auto p = MapParams::henon(1.4, 0.3);
    const ManifoldOptions opt;
    const auto P = fixed_points(p).first;
    const Curve plus = grow_unstable(p, P, 4.0, +1, opt);
    const Curve minus = grow_unstable(p, P, 4.0, -1, opt);
    std::vector<Point2> both = plus.points;
    both.insert(both.end(), minus.points.begin(), minus.points.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < plus.size() && plus.arclen[i] < 1.0; ++i)
        worst = std::max(worst, nearest_on_polyline(both, apply(p, plus.points[i])).dist);
    EXPECT_LE(worst, opt.h_max);
}

TEST(GrowStable, TangentAtQ) {
    const auto p = MapParams::henon(5.0, 0.3);
    const auto Q = fixed_points(p).second;
    const Curve c = grow_stable(p, Q, 1.0, +1);
    ASSERT_GE(c.size(), 3u);
    EXPECT_LT(distance(c.points.front(), Q.point), 1e-12);
    // chord direction near the anchor
    std::size_t k = 1;
    while (k + 1 < c.size() && c.arclen[k] < 1e-4) ++k;
    const Vec2 chord = normalized(c.points[k] - c.points[0]);
    const double angle = std::asin(std::min(1.0, std::abs(cross(chord, Q.vec_s))));
    EXPECT_LE(angle, 1e-3);
}

TEST(GrowStable, BackwardInvariance) {
    const auto p = MapParams::henon(5.0, 0.3);
    const ManifoldOptions opt;
    const auto Q = fixed_points(p).second;
    const Curve plus = grow_stable(p, Q, 2.0, +1, opt);
    const Curve minus = grow_stable(p, Q, 2.0, -1, opt);
    std::vector<Point2> both = plus.points;
    both.insert(both.end(), minus.points.begin(), minus.points.end());
    // f^-1 stretches W^s by about 1/|eig_s|, so only a short arc is mapped
    double worst = 0.0;
    for (std::size_t i = 0; i < plus.size() && plus.arclen[i] < 0.1; ++i)
        worst = std::max(worst, nearest_on_polyline(both, inverse(p, plus.points[i])).dist);
    EXPECT_LE(worst, opt.h_max);
}

TEST(ContractedField, AffineHorizontal) {
    const auto p = MapParams::affine();
    const ContractedField f = most_contracted_field(p, {0.1, 0.1}, 1);
    EXPECT_NEAR(std::abs(f.direction.x), 1.0, 1e-14);
    EXPECT_NEAR(f.log_sigma_min, std::log(1.0 / 3.0), 1e-14);
}

TEST(ContractedField, ConvergesToStableEigenvector) {
    const auto p = MapParams::henon(5.0, 0.3);
    const auto Q = fixed_points(p).second;
    // the numerical orbit of Q drifts off the saddle, so the product is truncated
    const ContractedField f = most_contracted_field(p, Q.point, 30, true);
    EXPECT_GE(f.steps, 10);
    EXPECT_LE(std::abs(cross(f.direction, Q.vec_s)), 1e-4);
}

TEST(ContractedField, StableInN) {
    const auto p = MapParams::henon(5.0, 0.3);
    // a point of the horseshoe: the period-2 orbit solved in closed form
    // x1 + x2 = (1 - b) / a, x1 x2 = ((1 - b)^2 / a - 1) / a
    const double s = 0.7 / 5.0, prod = (0.49 / 5.0 - 1.0) / 5.0;
    const double x1 = 0.5 * (s + std::sqrt(s * s - 4.0 * prod));
    const double x2 = s - x1;
    const Point2 z{x1, 0.3 * x2};
    ASSERT_LT(distance(apply(p, apply(p, z)), z), 1e-12);
    const ContractedField f10 = most_contracted_field(p, z, 10);
    const ContractedField f15 = most_contracted_field(p, z, 15);
    EXPECT_LE(std::abs(cross(f10.direction, f15.direction)), 1e-3);
}

TEST(DetectFolds, OneDimensionalLimit) {
    const auto p = MapParams::henon(2.0, 0.0);
    const auto P = fixed_points(p).first;
    const Curve wu = grow_unstable(p, P, 4.0, +1);
    const auto folds = detect_folds(p, wu, 0.1, 10);
    ASSERT_FALSE(folds.empty());
    for (const Fold& f : folds) EXPECT_NEAR(f.point.x, 0.0, 1e-8);
}

TEST(DetectFolds, AffineHasNone) {
    const auto p = MapParams::affine();
    const Curve wu = grow_unstable(p, fixed_points(p).first, 1.0);
    EXPECT_TRUE(detect_folds(p, wu, 0.1, 10).empty());
}

TEST(DetectFolds, NearParabolaFoldForSmallB) {
    const auto p = MapParams::henon(2.0, 1e-3);
    const auto P = fixed_points(p).first;
    std::size_t found = 0;
    for (int br : {+1, -1}) {
        const Curve wu = grow_unstable(p, P, 6.0, br);
        for (const Fold& f : detect_folds(p, wu, 0.1, 20)) {
            EXPECT_LT(std::abs(f.point.x), 0.1);
            // independent check: the x-extremum of the image curve near f(fold)
            const Point2 img = apply(p, f.point);
            double best = -1e300;
            for (const Point2& q : wu.points)
                if (distance(q, f.point) < 0.1) best = std::max(best, apply(p, q).x);
            EXPECT_NEAR(img.x, best, 0.05);
            ++found;
        }
    }
    EXPECT_GT(found, 0u);
}

TEST(TangencyGap, HorseshoeCrosses) {
    const TangencyReport r = tangency_gap(MapParams::henon(5.0, 0.3));
    EXPECT_EQ(r.crossings, 2);
    EXPECT_GT(r.gap, 0.0);
}

TEST(TangencyGap, BelowFirstTangencyDoesNotCross) {
    const TangencyReport r = tangency_gap(MapParams::henon(1.9, 1e-3));
    EXPECT_EQ(r.crossings, 0);
    EXPECT_LT(r.gap, 0.0);
}

TEST(FindAStar, OneDimensionalLimitIsExact) {
    const AStarResult r = find_a_star(0.0, 1.5, 2.5, 1e-12);
    EXPECT_EQ(r.value, 2.0);
}

TEST(FindAStar, SmallBBracketAndCertificate) {
    const double tol = 1e-7;
    const AStarResult r = find_a_star(1e-3, 1.5, 2.5, tol);
    EXPECT_LE(std::abs(r.value - 2.0), 0.2);
    EXPECT_GT(r.value, 1.5);
    EXPECT_LT(r.value, 2.5);
    EXPECT_EQ(r.at_lo.crossings, 0);
    EXPECT_EQ(r.at_hi.crossings, 2);
    EXPECT_LE(r.hi - r.lo, tol);
    EXPECT_LE(r.lo, r.value);
    EXPECT_GE(r.hi, r.value);
    // the gap changes sign across the certified bracket
    EXPECT_LE(std::abs(r.at_hi.gap - r.at_lo.gap), 1e-4);
}

TEST(FindAStar, BadBracket) {
    EXPECT_THROW(find_a_star(1e-3, 1.0, 1.5, 1e-6), BadBracketError);
    EXPECT_THROW(find_a_star(1e-3, 2.1, 2.0, 1e-6), BadBracketError);
}
