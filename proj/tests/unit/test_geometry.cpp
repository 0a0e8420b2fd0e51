#include "nodal_atlas/geometry/cuboid.hpp"
#include "nodal_atlas/geometry/domain.hpp"
#include "nodal_atlas/geometry/flat_spot.hpp"
#include "nodal_atlas/geometry/hull_gap.hpp"
#include "nodal_atlas/geometry/modulus.hpp"
#include "nodal_atlas/geometry/pathological.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nodal_atlas;
using namespace nodal_atlas::geometry;

TEST(Polygon, AreaAndOrientation) {
  EXPECT_DOUBLE_EQ(signed_area(unit_square().boundary), 1.0);
  const auto disk = unit_disk(512);
  EXPECT_NEAR(signed_area(disk.boundary), kPi, 1e-4);
  EXPECT_TRUE(is_simple(disk.boundary));
}

TEST(Polygon, HullDropsInteriorAndCollinear) {
  std::vector<Vec2> pts{{0, 0}, {1, 0}, {0.5, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const auto h = convex_hull(pts);
  EXPECT_EQ(h.size(), 4u);
  EXPECT_GT(signed_area(h), 0.0);
}

TEST(Polygon, ClipSquareByTriangle) {
  const Polyline sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const Polyline tri{{0, 0}, {2, 0}, {0, 2}};
  EXPECT_NEAR(signed_area(clip_convex(sq, tri)), 1.0, 1e-15);
  const Polyline small{{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}};
  EXPECT_NEAR(signed_area(clip_convex(small, sq)), 0.125, 1e-15);
  const auto seg = clip_segment_convex(Vec2(-1, 0.5), Vec2(2, 0.5), sq);
  ASSERT_TRUE(seg.has_value());
  EXPECT_NEAR((seg->second - seg->first).norm(), 1.0, 1e-15);
  EXPECT_FALSE(clip_segment_convex(Vec2(-1, 2), Vec2(2, 2), sq).has_value());
}

TEST(Domain, PresetsValidateAndRoundTrip) {
  for (const std::string name : {"unit-square", "unit-disk", "half-disk", "hexagon", "ngon", "parabola",
                                 "half-plane-box"}) {
    const auto d = make_domain(name);
    const auto back = PlanarDomain::from_json(d.to_json());
    ASSERT_EQ(back.boundary.size(), d.boundary.size()) << name;
    EXPECT_EQ(back.to_json().dump(), d.to_json().dump()) << name;
  }
  EXPECT_THROW(make_domain("foo"), InvalidInput);
}

TEST(Domain, RejectsClockwiseAndSelfIntersecting) {
  nlohmann::json j = unit_square().to_json();
  auto cw = j;
  cw["polyline"] = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  EXPECT_THROW(PlanarDomain::from_json(cw), InvalidInput);
  auto bow = j;
  bow["polyline"] = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  EXPECT_THROW(PlanarDomain::from_json(bow), InvalidInput);
}

TEST(Modulus, ConvexPresetsAreExactlyZero) {
  for (const auto& d : {unit_disk(256), unit_square(), hexagon(), half_disk(64)}) {
    const auto m = estimate_modulus(d, {0.1, 0.2});
    for (double v : m.values) EXPECT_EQ(v, 0.0) << d.name;
  }
}

TEST(Modulus, ParabolaAtOriginIsAboutR) {
  const auto d = parabola_domain(400);
  const double w = local_modulus(d.boundary, Vec2::Zero(), 0.1);
  // oracle: x^2 at the point where x^2 + x^4 = r^2, divided by r
  const double x2 = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * 0.01));
  EXPECT_NEAR(w, x2 / 0.1, 2e-3);
  EXPECT_NEAR(w, 0.1, 2e-3);
}

TEST(Modulus, FlatBoundaryAndRejections) {
  const auto box = make_domain("half-plane-box");
  EXPECT_EQ(local_modulus(box.boundary, Vec2(0.0, 0.0), 0.3), 0.0);
  EXPECT_THROW(estimate_modulus(box, {2.0}), InvalidInput);
  EXPECT_THROW(estimate_modulus(box, {0.2, 0.1}), InvalidInput);
}

TEST(Modulus, NondecreasingAndRigidMotionInvariant) {
  const auto d = parabola_domain(200);
  const std::vector<double> radii{0.05, 0.1, 0.2, 0.4};
  const auto m = estimate_modulus(d, radii);
  for (std::size_t i = 1; i < m.values.size(); ++i) EXPECT_GE(m.values[i], m.values[i - 1]);
  PlanarDomain moved = d;
  const Mat2 R = rotation(0.7);
  for (auto& p : moved.boundary) p = R * p + Vec2(3.0, -2.0);
  moved.patches.clear();
  const auto m2 = estimate_modulus(moved, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) EXPECT_NEAR(m.values[i], m2.values[i], 2e-3);
}

TEST(FlatSpot, AffineSquareAbs) {
  const auto aff = GraphFunction::quadratic(-0.5, 0.5, 0.0, 0.3, 0.0);
  EXPECT_NEAR(find_flat_spot(aff, 0.1).defect, 0.0, 1e-15);
  const auto sq = GraphFunction::quadratic(-0.5, 0.5, 0.0, 0.0, 1.0);
  for (double r : {0.1, 1.0 / 64, 1.0 / 1024}) {
    const auto f = find_flat_spot(sq, r);
    EXPECT_NEAR(f.defect / (r * r), 1.0, 1e-6);
    EXPECT_TRUE(f.plane_valid);
  }
  const auto abs = GraphFunction::polygonal({-0.5, 0.0, 0.5}, {0.5, 0.0, 0.5});
  const auto f = find_flat_spot(abs, 0.1);
  EXPECT_GE(std::abs(f.base), 0.1);
  EXPECT_NEAR(f.defect, 0.0, 1e-15);
  // smallest-base tie break
  EXPECT_DOUBLE_EQ(f.base, -0.25);
}

TEST(FlatSpot, RejectsNonConvexAndLargeRadius) {
  const auto concave = GraphFunction::quadratic(-0.5, 0.5, 0.0, 0.0, -1.0);
  try {
    find_flat_spot(concave, 0.1);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("not convex near"), std::string::npos);
  }
  const auto sq = GraphFunction::quadratic(-0.5, 0.5, 0.0, 0.0, 1.0);
  EXPECT_THROW(find_flat_spot(sq, 0.3), InvalidInput);
}

TEST(HullGap, ConvexPresetsVanish) {
  const auto hex = hexagon();
  EXPECT_NEAR(convex_hull_gap(hex, hex.boundary[0], 0.2).gap, 0.0, 1e-10);
  EXPECT_NEAR(convex_hull_gap(hex, 0.5 * (hex.boundary[0] + hex.boundary[1]), 0.2).gap, 0.0, 1e-10);
  const auto hd = half_disk(128);
  EXPECT_NEAR(convex_hull_gap(hd, Vec2::Zero(), 0.2).gap, 0.0, 1e-10);
}

TEST(HullGap, ParabolaWithinModulusBound) {
  const auto d = parabola_domain(400);
  const double r = 0.25;
  const auto g = convex_hull_gap(d, Vec2::Zero(), r);
  EXPECT_GT(g.gap, 0.0);
  EXPECT_LE(g.gap, 2.0 * r * 0.5 + g.resolution);
  // oracle: the chord over |x| <= a with a^2 + a^4 = r^2 sags by a^2 at the origin
  const double a2 = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * r * r));
  EXPECT_NEAR(g.gap, a2, 2e-3);
}

TEST(HullGap, DisconnectedCapRejected) {
  // thin slot: a U-shaped domain whose two arms both meet a ball centred on the slot floor
  PlanarDomain u;
  u.name = "u";
  u.boundary = {{0, 0}, {1, 0}, {1, 1}, {0.6, 1}, {0.6, 0.1}, {0.4, 0.1}, {0.4, 1}, {0, 1}};
  u.r0 = 2.0;
  EXPECT_THROW(convex_hull_gap(u, Vec2(0.5, 0.1), 0.3), InvalidInput);
}

TEST(Pathological, EnumerationsStartAsExpected) {
  const auto sb = enumerate_rationals(6, Enumeration::stern_brocot);
  const std::vector<std::pair<int, int>> sb_exp{{1, 2}, {1, 3}, {2, 3}, {1, 4}, {2, 5}, {3, 5}};
  for (std::size_t i = 0; i < sb_exp.size(); ++i) {
    EXPECT_EQ(sb[i].p, sb_exp[i].first);
    EXPECT_EQ(sb[i].q, sb_exp[i].second);
  }
  const auto cd = enumerate_rationals(6, Enumeration::cantor_diagonal);
  const std::vector<std::pair<int, int>> cd_exp{{1, 2}, {1, 3}, {2, 3}, {1, 4}, {3, 4}, {1, 5}};
  for (std::size_t i = 0; i < cd_exp.size(); ++i) {
    EXPECT_EQ(cd[i].p, cd_exp[i].first);
    EXPECT_EQ(cd[i].q, cd_exp[i].second);
  }
}

TEST(Pathological, SingleKinkCurve) {
  const auto c = pathological_curve(1);
  const auto& phi = c.phi;
  EXPECT_EQ(phi.value(0.0), 0.0);
  // phi = -x^2 on [0, 1/2], then (x - 1/2)/2 - x^2
  EXPECT_NEAR(phi.value(0.25), -0.0625, 1e-15);
  EXPECT_NEAR(phi.value(0.75), 0.125 - 0.5625, 1e-15);
  EXPECT_NEAR(phi.derivative_right(0.5) - phi.derivative_left(0.5), 0.5, 1e-15);
  const auto m = second_derivative_measure(c, 1);
  EXPECT_NEAR(m.masses[0], -1.0, 1e-15);
  EXPECT_NEAR(m.masses[1], -0.5, 1e-15);  // 1/2 opens the right interval
}

TEST(Pathological, LipschitzAndTotalMass) {
  const auto c = pathological_curve(4096);
  EXPECT_LE(c.phi.lipschitz(), 2.0);
  const auto c20 = pathological_curve(20);
  const auto m = second_derivative_measure(c20, 4);
  double oracle = -2.0;
  for (int k = 1; k <= 20; ++k) oracle += std::ldexp(1.0, -k);
  EXPECT_NEAR(m.total, oracle, 1e-14);
}

TEST(Pathological, AtMostJNonnegativeIntervals) {
  const auto c = pathological_curve(4096);
  for (int j = 1; j <= 12; ++j) EXPECT_LE(second_derivative_measure(c, j).nonnegative_count, static_cast<std::size_t>(j));
  // an interval free of q_1..q_j carries at most -2^-j
  const auto m3 = second_derivative_measure(c, 3);
  const auto q = enumerate_rationals(3, Enumeration::stern_brocot);
  for (std::size_t i = 0; i < m3.masses.size(); ++i) {
    bool has = false;
    for (const auto& r : q) has = has || static_cast<std::size_t>((r.p << 3) / r.q) == i;
    if (!has) {
      EXPECT_LE(m3.masses[i], -std::ldexp(1.0, -3));
    }
  }
}

TEST(Pathological, ExactAgainstDirectIntegral) {
  const auto c = pathological_curve(50, Enumeration::cantor_diagonal);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const double x = U(rng);
    double v = -x * x;
    for (std::size_t k = 0; k < c.rationals.size(); ++k)
      v += std::ldexp(1.0, -static_cast<int>(k + 1)) * std::max(0.0, x - c.rationals[k].value());
    EXPECT_NEAR(c.phi.value(x), v, 1e-14);
  }
}

TEST(Cuboid, DecompositionInvariants) {
  const auto para = parabola_domain(128);
  for (int k : {3, 4, 5}) {
    const auto Q = boundary_cuboid(para.patches[0], 0.1, 0.4, para.lipschitz_L);
    const auto D = decompose_cuboid(para, Q, k);
    EXPECT_EQ(D.boundary_cuboids.size(), std::size_t{1} << k);
    for (int c : D.column_counts) EXPECT_LE(c, (1 << k) + 1);
    EXPECT_GE(D.min_interior_distance_ratio, 0.5);
    EXPECT_TRUE(D.covers);
    EXPECT_NEAR(D.boundary_cuboids[0].diag(), D.boundary_cuboids[0].side * std::sqrt(1.0 + 4.0 * 9.0), 1e-15);
  }
}

TEST(Cuboid, RejectsStraddlingQ) {
  const auto sq = unit_square();
  const auto Q = boundary_cuboid(sq.patches[0], 0.3, 0.6, sq.lipschitz_L);
  EXPECT_THROW(decompose_cuboid(sq, Q, 3), InvalidInput);
}
