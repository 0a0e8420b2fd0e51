#pragma once

#include "nodal_atlas/fem/field.hpp"
#include "nodal_atlas/fem/quadrature.hpp"
#include "nodal_atlas/geometry/polygon.hpp"

#include <map>
#include <numeric>
#include <optional>
#include <set>

namespace nodal_atlas::nodal {

using fem::Mesh;
using fem::Region;
using fem::ScalarField;

struct Segment {
  Vec2 a, b;
  int triangle = -1;
  double length() const { return (b - a).norm(); }
};

struct NodalSet {
  std::vector<Segment> segments;  // sorted by triangle index
  double length = 0.0;
  std::optional<Region> region;
  int component_count = 0;
};

namespace detail {

/// Sign-perturbed vertex values: exact zeros become sigma * 1e-30 * scale, sigma the sign of the
/// first vertex of largest |u|, so c * u perturbs consistently for any c != 0.
inline Eigen::VectorXd perturbed(const Eigen::VectorXd& u, double& scale) {
  Eigen::Index imax = 0;
  scale = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (std::abs(u[i]) > scale) {
      scale = std::abs(u[i]);
      imax = i;
    }
  Eigen::VectorXd w = u;
  if (scale == 0.0) return w;
  const double eps = (u[imax] > 0.0 ? 1.0 : -1.0) * 1e-30 * scale;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] == 0.0) w[i] = eps;
  return w;
}

inline bool segment_meets_disk(const Vec2& a, const Vec2& b, const Vec2& c, double r) {
  return geometry::point_segment_distance(c, a, b) <= r;
}

inline bool triangle_meets_region(const Mesh& m, std::size_t t, const Region& reg) {
  const auto& T = m.triangles[t];
  const Vec2 v[3] = {m.vertices[T[0]], m.vertices[T[1]], m.vertices[T[2]]};
  if (reg.kind == Region::Kind::polygon) {
    return geometry::clip_convex({v[0], v[1], v[2]}, reg.window).size() >= 3;
  }
  const Mat2 Sinv = reg.kind == Region::Kind::ellipse ? Mat2(reg.shape.inverse()) : Mat2::Identity();
  const Vec2 w[3] = {Sinv * (v[0] - reg.center), Sinv * (v[1] - reg.center), Sinv * (v[2] - reg.center)};
  if (fem::detail::in_triangle(Vec2::Zero(), w, 0.0)) return true;
  for (int i = 0; i < 3; ++i)
    if (segment_meets_disk(w[i], w[(i + 1) % 3], Vec2::Zero(), reg.radius)) return true;
  return false;
}

/// Part of segment ab inside the region, or nullopt.
inline std::optional<std::pair<Vec2, Vec2>> clip_to_region(const Vec2& a, const Vec2& b, const Region& reg) {
  if (reg.kind == Region::Kind::polygon) return geometry::clip_segment_convex(a, b, reg.window);
  const Mat2 Sinv = reg.kind == Region::Kind::ellipse ? Mat2(reg.shape.inverse()) : Mat2::Identity();
  const Vec2 p = Sinv * (a - reg.center), q = Sinv * (b - reg.center);
  const Vec2 d = q - p;
  const double qa = d.squaredNorm();
  const double r2 = reg.radius * reg.radius;
  if (qa == 0.0) return p.squaredNorm() <= r2 ? std::optional(std::pair{a, b}) : std::nullopt;
  const double qb = 2.0 * p.dot(d), qc = p.squaredNorm() - r2;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc <= 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  const double t0 = std::max(0.0, (-qb - s) / (2.0 * qa));
  const double t1 = std::min(1.0, (-qb + s) / (2.0 * qa));
  if (!(t0 < t1)) return std::nullopt;
  return std::pair{t0 == 0.0 ? a : Vec2(a + t0 * (b - a)), t1 == 1.0 ? b : Vec2(a + t1 * (b - a))};
}

inline bool region_contains(const Region& reg, const Vec2& p) {
  if (reg.kind == Region::Kind::polygon) {
    for (std::size_t i = 0; i < reg.window.size(); ++i)
      if (orient(reg.window[i], reg.window[(i + 1) % reg.window.size()], p) < 0.0) return false;
    return true;
  }
  const Mat2 Sinv = reg.kind == Region::Kind::ellipse ? Mat2(reg.shape.inverse()) : Mat2::Identity();
  return (Sinv * (p - reg.center)).norm() <= reg.radius;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

inline int count_components(const std::vector<Segment>& segs) {
  if (segs.empty()) return 0;
  UnionFind uf(segs.size());
  std::map<std::pair<double, double>, int> first;
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (const Vec2* p : {&segs[i].a, &segs[i].b}) {
      const auto key = std::pair{p->x(), p->y()};
      const auto [it, fresh] = first.emplace(key, static_cast<int>(i));
      if (!fresh) uf.unite(it->second, static_cast<int>(i));
    }
  std::set<int> roots;
  for (std::size_t i = 0; i < segs.size(); ++i) roots.insert(uf.find(static_cast<int>(i)));
  return static_cast<int>(roots.size());
}

}  // namespace detail

/// Zero set of the P1 interpolant: one chord per triangle with a sign change. Crossing points are
/// computed from the lower-numbered edge endpoint so neighbours share them bit for bit. Chords joining
/// two boundary zeros (the Dirichlet data itself) and zero-length chords are dropped.
inline NodalSet extract_nodal(const ScalarField& u, const std::optional<Region>& region = std::nullopt) {
  const Mesh& m = u.mesh();
  double scale = 0.0;
  const Eigen::VectorXd w = detail::perturbed(u.values(), scale);
  if (scale == 0.0) throw InvalidInput("extract_nodal: field vanishes identically");
  const auto& orig = u.values();

  if (region) {
    bool any = false;
    for (std::size_t t = 0; t < m.num_triangles() && !any; ++t) {
      if (!detail::triangle_meets_region(m, t, *region)) continue;
      for (int i = 0; i < 3; ++i) any = any || orig[m.triangles[t][i]] != 0.0;
    }
    if (!any) throw InvalidInput("extract_nodal: field vanishes identically on the region");
  }

  const std::size_t nt = m.num_triangles();
  std::vector<std::optional<Segment>> per(nt);
  parallel_for(nt, [&](std::size_t t) {
    const auto& T = m.triangles[t];
    Vec2 pts[2];
    int zero_vertex[2] = {-1, -1};
    int k = 0;
    for (int e = 0; e < 3; ++e) {
      int i = T[e], j = T[(e + 1) % 3];
      if (i > j) std::swap(i, j);
      const double wi = w[i], wj = w[j];
      if ((wi > 0.0) == (wj > 0.0)) continue;
      if (k == 2) return;  // cannot happen for a linear function
      if (orig[i] == 0.0) {
        pts[k] = m.vertices[static_cast<std::size_t>(i)];
        zero_vertex[k] = i;
      } else if (orig[j] == 0.0) {
        pts[k] = m.vertices[static_cast<std::size_t>(j)];
        zero_vertex[k] = j;
      } else {
        const double s = wi / (wi - wj);
        pts[k] = m.vertices[static_cast<std::size_t>(i)] + s * (m.vertices[static_cast<std::size_t>(j)] - m.vertices[static_cast<std::size_t>(i)]);
      }
      ++k;
    }
    if (k != 2) return;
    if (pts[0] == pts[1]) return;
    if (zero_vertex[0] >= 0 && zero_vertex[1] >= 0 && m.on_boundary[static_cast<std::size_t>(zero_vertex[0])] &&
        m.on_boundary[static_cast<std::size_t>(zero_vertex[1])])
      return;
    per[t] = Segment{pts[0], pts[1], static_cast<int>(t)};
  });

  NodalSet Z;
  Z.region = region;
  for (std::size_t t = 0; t < nt; ++t) {
    if (!per[t]) continue;
    if (region) {
      const auto c = detail::clip_to_region(per[t]->a, per[t]->b, *region);
      if (!c) continue;
      Z.segments.push_back({c->first, c->second, per[t]->triangle});
    } else {
      Z.segments.push_back(*per[t]);
    }
  }
  for (const auto& s : Z.segments) Z.length += s.length();
  Z.component_count = detail::count_components(Z.segments);
  return Z;
}

/// Total length, optionally clipped to a region.
inline double nodal_length(const NodalSet& Z, const std::optional<Region>& region = std::nullopt) {
  double L = 0.0;
  for (const auto& s : Z.segments) {
    if (!region) {
      L += s.length();
      continue;
    }
    if (const auto c = detail::clip_to_region(s.a, s.b, *region)) L += (c->second - c->first).norm();
  }
  return L;
}

/// Connected sign components over interior vertices (mesh edges joining equal signs).
inline int count_nodal_domains(const ScalarField& u) {
  const Mesh& m = u.mesh();
  double scale = 0.0;
  const Eigen::VectorXd w = detail::perturbed(u.values(), scale);
  detail::UnionFind uf(m.num_vertices());
  for (const auto& T : m.triangles)
    for (int e = 0; e < 3; ++e) {
      const int i = T[e], j = T[(e + 1) % 3];
      if (m.on_boundary[static_cast<std::size_t>(i)] || m.on_boundary[static_cast<std::size_t>(j)]) continue;
      if ((w[i] > 0.0) == (w[j] > 0.0)) uf.unite(i, j);
    }
  std::set<int> roots;
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (!m.on_boundary[v]) roots.insert(uf.find(static_cast<int>(v)));
  return static_cast<int>(roots.size());
}

// ----------------------------------------------------------------------------------------------

struct ZeroFreeReport {
  bool zero_free = false;
  double min_abs = 0.0;  // over interior vertices of triangles meeting the region
  double nearest_zero_distance = std::numeric_limits<double>::infinity();  // dist(Z ∩ region, boundary)
  std::size_t vertices = 0;
};

inline double distance_to_mesh_boundary(const Mesh& m, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& e : m.boundary)
    d = std::min(d, geometry::point_segment_distance(p, m.vertices[static_cast<std::size_t>(e.a)], m.vertices[static_cast<std::size_t>(e.b)]));
  return d;
}

/// Zero-free iff every interior vertex of the triangles meeting the region has the same strict
/// sign and |u| > tol there. Otherwise reports the distance from the region's nodal set to the boundary.
inline ZeroFreeReport zero_free_audit(const ScalarField& u, const Region& region, double tol = 0.0) {
  const Mesh& m = u.mesh();
  const auto& v = u.values();
  std::set<int> verts;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!detail::triangle_meets_region(m, t, region)) continue;
    for (int i = 0; i < 3; ++i)
      if (!m.on_boundary[static_cast<std::size_t>(m.triangles[t][i])]) verts.insert(m.triangles[t][i]);
  }
  ZeroFreeReport rep;
  rep.vertices = verts.size();
  if (verts.empty()) throw InvalidInput("zero_free_audit: region contains no interior vertices");
  rep.min_abs = std::numeric_limits<double>::infinity();
  int pos = 0, neg = 0;
  for (int i : verts) {
    rep.min_abs = std::min(rep.min_abs, std::abs(v[i]));
    pos += v[i] > 0.0 ? 1 : 0;
    neg += v[i] < 0.0 ? 1 : 0;
  }
  rep.zero_free = (pos == static_cast<int>(verts.size()) || neg == static_cast<int>(verts.size())) && rep.min_abs > tol;
  if (!rep.zero_free) {
    if (u.max_abs() == 0.0) return rep;
    const NodalSet Z = extract_nodal(u, region);
    for (const auto& s : Z.segments)
      for (const Vec2& p : {s.a, s.b, Vec2(0.5 * (s.a + s.b))})
        rep.nearest_zero_distance = std::min(rep.nearest_zero_distance, distance_to_mesh_boundary(m, p));
  }
  return rep;
}

}  // namespace nodal_atlas::nodal
