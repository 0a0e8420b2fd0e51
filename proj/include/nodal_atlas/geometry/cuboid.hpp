#pragma once

#include "nodal_atlas/geometry/domain.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace nodal_atlas::geometry {

enum class CuboidKind { boundary, interior };

/// Rectangle of width s and height 2(1+L)s in a patch frame. `local` is the centre in patch
/// coordinates (s, x_d); `center` the same point in the world.
struct Cuboid {
  Vec2 center = Vec2::Zero();
  Vec2 local = Vec2::Zero();
  double side = 1.0;
  double L = 1.0;
  double angle = 0.0;
  CuboidKind kind = CuboidKind::boundary;
  int column = 0;

  double half_height() const { return (1.0 + L) * side; }
  double diag() const { return side * std::sqrt(1.0 + 4.0 * (1.0 + L) * (1.0 + L)); }

  /// Corners in counter-clockwise order, world coordinates.
  Polyline corners() const {
    const Mat2 R = rotation(angle);
    const double hw = 0.5 * side, hh = half_height();
    return {center + R * Vec2(-hw, -hh), center + R * Vec2(hw, -hh), center + R * Vec2(hw, hh),
            center + R * Vec2(-hw, hh)};
  }

  /// Closed containment in patch coordinates, widened by tol.
  bool contains_local(const Vec2& q, double tol = 0.0) const {
    return std::abs(q.x() - local.x()) <= 0.5 * side + tol && std::abs(q.y() - local.y()) <= half_height() + tol;
  }

  nlohmann::json to_json() const {
    return {{"center", {center.x(), center.y()}}, {"side", side}, {"L", L}, {"angle", angle},
            {"kind", kind == CuboidKind::boundary ? "boundary" : "interior"}, {"column", column},
            {"diag", diag()}};
  }
};

/// Boundary cuboid of side s centred at the graph point above abscissa s_center of a patch.
inline Cuboid boundary_cuboid(const GraphPatch& patch, double s_center, double side, double L) {
  if (!(side > 0.0)) throw InvalidInput("boundary_cuboid: side must be positive");
  Cuboid q;
  q.local = Vec2(s_center, patch.phi.value(s_center));
  q.center = patch.to_world(q.local.x(), q.local.y());
  q.side = side;
  q.L = L;
  q.angle = patch.angle;
  q.kind = CuboidKind::boundary;
  return q;
}

struct Decomposition {
  Cuboid parent;
  int level = 3;
  std::vector<Cuboid> boundary_cuboids;
  std::vector<Cuboid> interior_cuboids;
  std::vector<int> column_counts;
  double min_interior_distance_ratio = std::numeric_limits<double>::infinity();  // dist / s(q)
  bool covers = true;  // sampled points of Q cap Omega all lie in some cuboid
};

namespace detail {

inline double point_rect_distance(const Vec2& p, const Vec2& c, double hw, double hh) {
  const double dx = std::max(0.0, std::abs(p.x() - c.x()) - hw);
  const double dy = std::max(0.0, std::abs(p.y() - c.y()) - hh);
  return std::hypot(dx, dy);
}

}  // namespace detail

/// Splits the projection of Q into 2^k columns; each column gets a cuboid centred on the graph and
/// the cuboids stacked above it that meet Q cap Omega. Works in the frame of the patch containing Q.
inline Decomposition decompose_cuboid(const PlanarDomain& domain, const Cuboid& Q, int k) {
  if (k < 3 || k > 20) throw InvalidInput("decompose_cuboid: need 3 <= k <= 20");
  const int pi = domain.patch_at(Q.center, 1e-9 * std::max(1.0, Q.side));
  if (pi < 0) throw InvalidInput("decompose_cuboid: Q is not centred on a graph patch");
  const GraphPatch& patch = domain.patches[static_cast<std::size_t>(pi)];
  if (std::abs(patch.angle - Q.angle) > 1e-12) throw InvalidInput("decompose_cuboid: Q frame differs from patch frame");
  const Vec2 qc = patch.to_local(Q.center);
  const double s = Q.side;
  if (qc.x() - 0.5 * s < patch.phi.lo() - 1e-12 || qc.x() + 0.5 * s > patch.phi.hi() + 1e-12)
    throw InvalidInput("decompose_cuboid: Q straddles more than one patch");
  const double L = Q.L;
  if (patch.phi.lipschitz() > L * (1.0 + 1e-12) + 1e-12)
    throw InvalidInput("decompose_cuboid: patch graph steeper than the cuboid's L");

  Decomposition out;
  out.parent = Q;
  out.parent.local = qc;
  out.level = k;
  const int cols = 1 << k;
  const double sq = s / cols;
  const double hq = (1.0 + L) * sq;
  const double top = qc.y() + (1.0 + L) * s;
  for (int j = 0; j < cols; ++j) {
    const double x = qc.x() - 0.5 * s + (j + 0.5) * sq;
    const double y = patch.phi.value(x);
    Cuboid b;
    b.local = Vec2(x, y);
    b.center = patch.to_world(x, y);
    b.side = sq;
    b.L = L;
    b.angle = patch.angle;
    b.kind = CuboidKind::boundary;
    b.column = j;
    out.boundary_cuboids.push_back(b);
    int count = 1;
    for (int m = 1; y + (2 * m - 1) * hq < top; ++m) {
      Cuboid c = b;
      c.local = Vec2(x, y + 2.0 * m * hq);
      c.center = patch.to_world(c.local.x(), c.local.y());
      c.kind = CuboidKind::interior;
      out.interior_cuboids.push_back(c);
      ++count;
    }
    out.column_counts.push_back(count);
  }

  // Graph samples of Q cap boundary for the interior-distance check.
  const int gs = 64 * cols;
  std::vector<Vec2> graph;
  for (int i = 0; i <= gs; ++i) {
    const double x = qc.x() - 0.5 * s + s * i / gs;
    graph.emplace_back(x, patch.phi.value(x));
  }
  for (double b : patch.phi.breaks())
    if (b >= qc.x() - 0.5 * s && b <= qc.x() + 0.5 * s) graph.emplace_back(b, patch.phi.value(b));
  for (const auto& c : out.interior_cuboids) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& g : graph) d = std::min(d, detail::point_rect_distance(g, c.local, 0.5 * c.side, hq));
    out.min_interior_distance_ratio = std::min(out.min_interior_distance_ratio, d / c.side);
  }

  // Coverage of Q cap Omega on a sample grid.
  const int cs = 8 * cols;
  for (int i = 0; i < cs && out.covers; ++i) {
    const double x = qc.x() - 0.5 * s + s * (i + 0.5) / cs;
    const double g = patch.phi.value(x);
    const int j = std::min(cols - 1, static_cast<int>((x - (qc.x() - 0.5 * s)) / sq));
    for (int m = 0; m < 4 * cs; ++m) {
      const double y = qc.y() - (1.0 + L) * s + 2.0 * (1.0 + L) * s * (m + 0.5) / (4 * cs);
      if (y <= g) continue;
      const Vec2 p(x, y);
      const double tol = 1e-12 * s;
      bool in = out.boundary_cuboids[static_cast<std::size_t>(j)].contains_local(p, tol);
      for (const auto& c : out.interior_cuboids) in = in || (c.column == j && c.contains_local(p, tol));
      if (!in) {
        out.covers = false;
        break;
      }
    }
  }
  return out;
}

}  // namespace nodal_atlas::geometry
