#pragma once

#include "nodal_atlas/geometry/domain.hpp"
#include "nodal_atlas/geometry/modulus.hpp"

#include <vector>

namespace nodal_atlas::geometry {

struct HullGap {
  double gap = 0.0;
  Vec2 worst = Vec2::Zero();  // sample of the cap boundary farthest from the hull boundary
  std::size_t samples = 0;
  std::size_t hull_vertices = 0;
  double resolution = 0.0;    // sampling spacing along the cap boundary
};

/// Samples the boundary of Omega cap B_r(x) at spacing r / density.
inline std::vector<Vec2> cap_boundary_samples(const PlanarDomain& domain, const Vec2& x, double r,
                                              int density = 200) {
  const double step = r / density;
  const Polyline& poly = domain.boundary;
  const std::size_t n = poly.size();
  std::vector<Vec2> pts;
  std::vector<Vec2> crossings;
  const auto arcs = detail::arcs_inside(poly, x, r, &crossings);
  if (crossings.size() > 2) {
    // Duplicate hits at a shared vertex are one crossing.
    std::vector<Vec2> uniq;
    for (const auto& c : crossings) {
      bool seen = false;
      for (const auto& u : uniq) seen = seen || (u - c).norm() <= 1e-12 * r;
      if (!seen) uniq.push_back(c);
    }
    if (uniq.size() > 2)
      throw InvalidInput("convex_hull_gap: Omega cap B_r(x) is not a single cap (" +
                         std::to_string(uniq.size()) + " circle crossings)");
  }
  pts.insert(pts.end(), crossings.begin(), crossings.end());
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (point_segment_distance(x, a, b) > r) continue;
    const double len = (b - a).norm();
    const int m = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 0; k <= m; ++k) {
      const Vec2 p = a + (static_cast<double>(k) / m) * (b - a);
      if ((p - x).norm() <= r) pts.push_back(p);
    }
  }
  for (const auto& arc : arcs) {
    const int m = std::max(1, static_cast<int>(std::ceil(r * (arc.a1 - arc.a0) / step)));
    for (int k = 0; k <= m; ++k) {
      const double t = arc.a0 + (arc.a1 - arc.a0) * k / m;
      pts.push_back(x + r * Vec2(std::cos(t), std::sin(t)));
    }
  }
  return pts;
}

/// Largest distance from the sampled boundary of Omega cap B_r(x) to the boundary of its convex hull.
inline HullGap convex_hull_gap(const PlanarDomain& domain, const Vec2& x, double r, int density = 200) {
  if (!(r > 0.0)) throw InvalidInput("convex_hull_gap: r must be positive");
  if (r >= 0.5 * domain.r0 * (1.0 + 1e-12)) throw InvalidInput("convex_hull_gap: need r < r0/2");
  const auto pts = cap_boundary_samples(domain, x, r, density);
  if (pts.size() < 3) throw InvalidInput("convex_hull_gap: empty cap");
  const Polyline hull = convex_hull(pts);
  HullGap out;
  out.samples = pts.size();
  out.hull_vertices = hull.size();
  out.resolution = r / density;
  for (const auto& p : pts) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i)
      d = std::min(d, point_segment_distance(p, hull[i], hull[(i + 1) % hull.size()]));
    if (d > out.gap) {
      out.gap = d;
      out.worst = p;
    }
  }
  return out;
}

}  // namespace nodal_atlas::geometry
