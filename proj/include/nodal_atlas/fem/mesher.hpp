#pragma once

#include "nodal_atlas/fem/mesh.hpp"
#include "nodal_atlas/geometry/domain.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace nodal_atlas::fem {

namespace detail {

/// Incremental Bowyer-Watson triangulation inside a super-triangle.
class BowyerWatson {
public:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> n;  // n[i] is across the edge opposite v[i]
    bool alive;
  };

  explicit BowyerWatson(const std::vector<Vec2>& pts) : pts_(pts) {
    Vec2 lo = pts_[0], hi = pts_[0];
    for (const auto& p : pts_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec2 c = 0.5 * (lo + hi);
    const double M = 20.0 * std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
    scale_ = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    n_real_ = static_cast<int>(pts_.size());
    pts_.push_back(c + M * Vec2(-1.7320508, -1.0));
    pts_.push_back(c + M * Vec2(1.7320508, -1.0));
    pts_.push_back(c + M * Vec2(0.0, 2.0));
    tris_.push_back({{n_real_, n_real_ + 1, n_real_ + 2}, {-1, -1, -1}, true});
  }

  void insert_all(double cell) {
    // snake order over a coarse grid keeps walks short
    Vec2 lo = pts_[0];
    for (int i = 0; i < n_real_; ++i) lo = lo.cwiseMin(pts_[static_cast<std::size_t>(i)]);
    std::vector<std::tuple<long, long, int>> keys;
    keys.reserve(static_cast<std::size_t>(n_real_));
    for (int i = 0; i < n_real_; ++i) {
      const Vec2& p = pts_[static_cast<std::size_t>(i)];
      const long row = static_cast<long>(std::floor((p.y() - lo.y()) / cell));
      long col = static_cast<long>(std::floor((p.x() - lo.x()) / cell));
      if (row % 2) col = -col;
      keys.emplace_back(row, col, i);
    }
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) insert(std::get<2>(k));
  }

  /// Alive triangles with no super-triangle vertex.
  std::vector<Triangle> triangles() const {
    std::vector<Triangle> out;
    for (const auto& t : tris_)
      if (t.alive && t.v[0] < n_real_ && t.v[1] < n_real_ && t.v[2] < n_real_) out.push_back(t.v);
    return out;
  }

private:
  double incircle(const Tri& t, const Vec2& p) const {
    const Vec2& a = pts_[static_cast<std::size_t>(t.v[0])];
    const Vec2& b = pts_[static_cast<std::size_t>(t.v[1])];
    const Vec2& c = pts_[static_cast<std::size_t>(t.v[2])];
    const long double adx = a.x() - p.x(), ady = a.y() - p.y();
    const long double bdx = b.x() - p.x(), bdy = b.y() - p.y();
    const long double cdx = c.x() - p.x(), cdy = c.y() - p.y();
    const long double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
    return static_cast<double>(adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx));
  }

  int locate(const Vec2& p) {
    int t = last_;
    const std::size_t cap = 4 * tris_.size() + 100;
    for (std::size_t step = 0; step < cap; ++step) {
      const Tri& T = tris_[static_cast<std::size_t>(t)];
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = (k + static_cast<int>(step)) % 3;
        const Vec2& a = pts_[static_cast<std::size_t>(T.v[(i + 1) % 3])];
        const Vec2& b = pts_[static_cast<std::size_t>(T.v[(i + 2) % 3])];
        if (orient(a, b, p) < 0.0 && T.n[i] >= 0) {
          t = T.n[i];
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      const Tri& T = tris_[i];
      if (!T.alive) continue;
      const Vec2& a = pts_[static_cast<std::size_t>(T.v[0])];
      const Vec2& b = pts_[static_cast<std::size_t>(T.v[1])];
      const Vec2& c = pts_[static_cast<std::size_t>(T.v[2])];
      if (orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0) return static_cast<int>(i);
    }
    throw SolverError("mesher: point location failed");
  }

  void insert(int pi) {
    const Vec2& p = pts_[static_cast<std::size_t>(pi)];
    const int t0 = locate(p);
    for (int v : tris_[static_cast<std::size_t>(t0)].v)
      if ((pts_[static_cast<std::size_t>(v)] - p).norm() <= 1e-14 * scale_) throw SolverError("mesher: duplicate point");

    bad_.clear();
    bad_.push_back(t0);
    ++stamp_;
    mark_[static_cast<std::size_t>(t0)] = stamp_;
    struct Edge {
      int a, b, outer;
    };
    std::vector<Edge> rim;
    for (std::size_t k = 0; k < bad_.size(); ++k) {
      const Tri T = tris_[static_cast<std::size_t>(bad_[k])];
      for (int i = 0; i < 3; ++i) {
        const int nb = T.n[i];
        bool nb_bad = false;
        if (nb >= 0) {
          if (mark_[nb] == stamp_) {
            nb_bad = true;
          } else if (mark_[nb] != -stamp_) {
            if (incircle(tris_[static_cast<std::size_t>(nb)], p) > 0.0) {
              mark_[nb] = stamp_;
              bad_.push_back(nb);
              nb_bad = true;
            } else {
              mark_[nb] = -stamp_;
            }
          }
        }
        if (!nb_bad) rim.push_back({T.v[(i + 1) % 3], T.v[(i + 2) % 3], nb});
      }
    }
    for (int b : bad_) tris_[static_cast<std::size_t>(b)].alive = false;

    std::vector<int> made;
    made.reserve(rim.size());
    for (const auto& e : rim) {
      int slot;
      if (!free_.empty()) {
        slot = free_.back();
        free_.pop_back();
      } else {
        slot = static_cast<int>(tris_.size());
        tris_.push_back({});
        mark_.push_back(0);
      }
      tris_[static_cast<std::size_t>(slot)] = {{pi, e.a, e.b}, {e.outer, -1, -1}, true};
      if (e.outer >= 0) {
        Tri& O = tris_[static_cast<std::size_t>(e.outer)];
        for (int j = 0; j < 3; ++j)
          if (O.v[(j + 1) % 3] == e.b && O.v[(j + 2) % 3] == e.a) O.n[j] = slot;
      }
      made.push_back(slot);
    }
    for (int s : made) {
      Tri& T = tris_[static_cast<std::size_t>(s)];
      for (int o : made) {
        const Tri& U = tris_[static_cast<std::size_t>(o)];
        if (U.v[1] == T.v[2]) T.n[1] = o;  // edge (b, p)
        if (U.v[2] == T.v[1]) T.n[2] = o;  // edge (p, a)
      }
    }
    // dead slots not reused by this insertion become free
    for (std::size_t k = 0; k < bad_.size(); ++k) {
      const int b = bad_[k];
      if (!tris_[static_cast<std::size_t>(b)].alive) free_.push_back(b);
    }
    std::sort(free_.begin(), free_.end(), std::greater<int>());
    last_ = made.empty() ? 0 : made.front();
  }

  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::vector<int> mark_ = std::vector<int>(1, 0);
  std::vector<int> bad_;
  std::vector<int> free_;
  int stamp_ = 0;
  int last_ = 0;
  int n_real_ = 0;
  double scale_ = 1.0;
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double hash_unit(std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(mix64(a * 0x100000001b3ULL ^ mix64(b)) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

struct Subsegment {
  int a, b, marker;
};

/// Buckets polyline segments for distance queries.
class SegmentGrid {
public:
  SegmentGrid(const std::vector<Vec2>& pts, const std::vector<Subsegment>& segs, double cell)
      : pts_(pts), segs_(segs), cell_(cell) {
    lo_ = hi_ = pts[0];
    for (const auto& p : pts) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    nx_ = std::max(1, static_cast<int>(std::ceil((hi_.x() - lo_.x()) / cell)) + 1);
    ny_ = std::max(1, static_cast<int>(std::ceil((hi_.y() - lo_.y()) / cell)) + 1);
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const Vec2 a = pts[static_cast<std::size_t>(segs[s].a)].cwiseMin(pts[static_cast<std::size_t>(segs[s].b)]);
      const Vec2 b = pts[static_cast<std::size_t>(segs[s].a)].cwiseMax(pts[static_cast<std::size_t>(segs[s].b)]);
      for (int j = cy(a.y()); j <= cy(b.y()); ++j)
        for (int i = cx(a.x()); i <= cx(b.x()); ++i) cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(s));
    }
  }

  /// Distance to the nearest segment, exact when it is below `reach`; otherwise >= reach.
  double distance(const Vec2& p, double reach) const {
    double d = reach;
    const int r = static_cast<int>(std::ceil(reach / cell_));
    const int i0 = cx(p.x()), j0 = cy(p.y());
    for (int j = std::max(0, j0 - r); j <= std::min(ny_ - 1, j0 + r); ++j)
      for (int i = std::max(0, i0 - r); i <= std::min(nx_ - 1, i0 + r); ++i)
        for (int s : cells_[static_cast<std::size_t>(j) * nx_ + i])
          d = std::min(d, geometry::point_segment_distance(p, pts_[static_cast<std::size_t>(segs_[static_cast<std::size_t>(s)].a)],
                                                         pts_[static_cast<std::size_t>(segs_[static_cast<std::size_t>(s)].b)]));
    return d;
  }

  /// Boundary points strictly inside the diametral circle of segment s.
  bool encroached(std::size_t s) const {
    const Vec2& a = pts_[static_cast<std::size_t>(segs_[s].a)];
    const Vec2& b = pts_[static_cast<std::size_t>(segs_[s].b)];
    const Vec2 m = 0.5 * (a + b);
    const double r2 = 0.25 * (b - a).squaredNorm();
    const double rr = std::sqrt(r2);
    const int R = static_cast<int>(std::ceil(rr / cell_)) + 1;
    const int i0 = cx(m.x()), j0 = cy(m.y());
    for (int j = std::max(0, j0 - R); j <= std::min(ny_ - 1, j0 + R); ++j)
      for (int i = std::max(0, i0 - R); i <= std::min(nx_ - 1, i0 + R); ++i)
        for (int t : cells_[static_cast<std::size_t>(j) * nx_ + i])
          for (int v : {segs_[static_cast<std::size_t>(t)].a, segs_[static_cast<std::size_t>(t)].b}) {
            if (v == segs_[s].a || v == segs_[s].b) continue;
            if ((pts_[static_cast<std::size_t>(v)] - m).squaredNorm() < r2 * (1.0 - 1e-12)) return true;
          }
    return false;
  }

private:
  int cx(double x) const { return std::clamp(static_cast<int>(std::floor((x - lo_.x()) / cell_)), 0, nx_ - 1); }
  int cy(double y) const { return std::clamp(static_cast<int>(std::floor((y - lo_.y()) / cell_)), 0, ny_ - 1); }
  const std::vector<Vec2>& pts_;
  const std::vector<Subsegment>& segs_;
  double cell_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> cells_;
};

inline bool is_axis_rectangle(const geometry::Polyline& p) {
  if (p.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 e = p[(i + 1) % 4] - p[i];
    if (e.x() != 0.0 && e.y() != 0.0) return false;
  }
  return geometry::signed_area(p) > 0.0;
}

inline Mesh structured_rectangle(const geometry::Polyline& p, double h) {
  const double x0 = std::min({p[0].x(), p[1].x(), p[2].x(), p[3].x()});
  const double x1 = std::max({p[0].x(), p[1].x(), p[2].x(), p[3].x()});
  const double y0 = std::min({p[0].y(), p[1].y(), p[2].y(), p[3].y()});
  const double y1 = std::max({p[0].y(), p[1].y(), p[2].y(), p[3].y()});
  const int nx = std::max(1, static_cast<int>(std::lround((x1 - x0) / h)));
  const int ny = std::max(1, static_cast<int>(std::lround((y1 - y0) / h)));
  Mesh m;
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.emplace_back(i == nx ? x1 : x0 + (x1 - x0) * i / nx, j == ny ? y1 : y0 + (y1 - y0) * j / ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  // marker = index of the polyline edge, matched by the edge's midpoint
  auto marker_of = [&](const Vec2& mid) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int e = 0; e < 4; ++e) {
      const double d = geometry::point_segment_distance(mid, p[static_cast<std::size_t>(e)], p[static_cast<std::size_t>((e + 1) % 4)]);
      if (d < bd) {
        bd = d;
        best = e;
      }
    }
    return best;
  };
  auto add = [&](int a, int b) {
    m.boundary.push_back({a, b, marker_of(0.5 * (m.vertices[static_cast<std::size_t>(a)] + m.vertices[static_cast<std::size_t>(b)]))});
  };
  for (int i = 0; i < nx; ++i) add(id(i, 0), id(i + 1, 0));
  for (int j = 0; j < ny; ++j) add(id(nx, j), id(nx, j + 1));
  for (int i = nx; i > 0; --i) add(id(i, ny), id(i - 1, ny));
  for (int j = ny; j > 0; --j) add(id(0, j), id(0, j - 1));
  return m;
}

}  // namespace detail

struct MeshOptions {
  double boundary_clearance = 0.55;  // interior seeds keep this many h from the boundary
  double min_angle = 20.0;           // degrees
  int smoothing_sweeps = 8;
};

/// Boundary-conforming triangulation of the polygon with target edge length h. Axis-aligned
/// rectangles get a structured grid; everything else a Delaunay mesh of boundary points plus a
/// hexagonal lattice. Deterministic for fixed inputs.
inline Mesh mesh_domain(const geometry::PlanarDomain& domain, double h, const MeshOptions& opt = {}) {
  const auto& poly = domain.boundary;
  if (poly.size() < 3 || !(geometry::signed_area(poly) > 0.0)) throw InvalidInput("mesh_domain: degenerate polyline");
  if (!(h > 0.0)) throw InvalidInput("mesh_domain: h must be positive");
  const double shortest = domain.shortest_edge();
  if (!(shortest > 0.0)) throw InvalidInput("mesh_domain: degenerate polyline (zero-length edge)");
  if (h > shortest * (1.0 + 1e-9))
    throw InvalidInput("mesh_domain: h = " + std::to_string(h) + " exceeds the shortest polyline edge " +
                       std::to_string(shortest));

  Mesh mesh;
  if (detail::is_axis_rectangle(poly)) {
    mesh = detail::structured_rectangle(poly, h);
  } else {
    // boundary points; each polyline edge split into pieces of length <= 1.05 h
    std::vector<Vec2> pts;
    std::vector<detail::Subsegment> segs;
    std::vector<int> first;
    for (std::size_t e = 0; e < poly.size(); ++e) {
      first.push_back(static_cast<int>(pts.size()));
      const Vec2& a = poly[e];
      const Vec2& b = poly[(e + 1) % poly.size()];
      const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / (1.05 * h) - 1e-9)));
      for (int k = 0; k < m; ++k) pts.push_back(a + (static_cast<double>(k) / m) * (b - a));
    }
    auto rebuild_segments = [&](const std::vector<int>& markers) {
      segs.clear();
      for (std::size_t i = 0; i < pts.size(); ++i)
        segs.push_back({static_cast<int>(i), static_cast<int>((i + 1) % pts.size()), markers[i]});
    };
    std::vector<int> markers(pts.size());
    for (std::size_t e = 0; e < poly.size(); ++e) {
      const int end = e + 1 < poly.size() ? first[e + 1] : static_cast<int>(pts.size());
      for (int i = first[e]; i < end; ++i) markers[static_cast<std::size_t>(i)] = static_cast<int>(e);
    }
    rebuild_segments(markers);

    // input vertices with an acute interior angle; their two incident subsegments are kept
    // equal in length so the corner cannot trigger an endless split cascade
    std::vector<char> acute(pts.size(), 0);
    for (std::size_t e = 0; e < poly.size(); ++e) {
      const Vec2& v = poly[e];
      const Vec2 u = poly[(e + poly.size() - 1) % poly.size()] - v;
      const Vec2 w = poly[(e + 1) % poly.size()] - v;
      double ang = std::atan2(cross(w, u), w.dot(u));
      if (ang < 0.0) ang += 2.0 * kPi;
      if (ang < 0.5 * kPi * (1.0 - 1e-9)) acute[static_cast<std::size_t>(first[e])] = 1;
    }

    // split boundary subsegments whose diametral circle holds another boundary point
    for (int round = 0;; ++round) {
      if (round == 200) throw SolverError("mesh_domain: boundary recovery did not terminate");
      const std::size_t n = pts.size();
      std::vector<double> split(segs.size(), -1.0);  // split parameter along a -> b
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!acute[i]) continue;
        const std::size_t sp = (i + n - 1) % n, sn = i;  // segments ending / starting at i
        const double lp = (pts[i] - pts[static_cast<std::size_t>(segs[sp].a)]).norm();
        const double ln = (pts[static_cast<std::size_t>(segs[sn].b)] - pts[i]).norm();
        if (std::abs(lp - ln) <= 1e-9 * std::max(lp, ln)) continue;
        if (lp > ln) {
          split[sp] = 1.0 - ln / lp;
        } else {
          split[sn] = lp / ln;
        }
        any = true;
      }
      if (!any) {
        detail::SegmentGrid grid(pts, segs, h);
        for (std::size_t s = 0; s < segs.size(); ++s)
          if (grid.encroached(s)) {
            // a halved corner segment is matched by its partner on the next round
            split[s] = 0.5;
            any = true;
          }
      }
      if (!any) break;
      std::vector<Vec2> np;
      std::vector<int> nm;
      std::vector<char> na;
      for (std::size_t s = 0; s < segs.size(); ++s) {
        const Vec2& a = pts[static_cast<std::size_t>(segs[s].a)];
        const Vec2& b = pts[static_cast<std::size_t>(segs[s].b)];
        np.push_back(a);
        nm.push_back(segs[s].marker);
        na.push_back(acute[static_cast<std::size_t>(segs[s].a)]);
        if (split[s] > 0.0) {
          np.push_back(a + split[s] * (b - a));
          nm.push_back(segs[s].marker);
          na.push_back(0);
        }
      }
      pts = std::move(np);
      markers = std::move(nm);
      acute = std::move(na);
      rebuild_segments(markers);
    }
    const std::size_t nb = pts.size();

    // hexagonal lattice seeds, inside and clear of the boundary
    detail::SegmentGrid grid(pts, segs, h);
    const auto bb = domain.bbox();
    const double dy = h * std::sqrt(3.0) / 2.0;
    const int rows = static_cast<int>(std::ceil((bb[3] - bb[1]) / dy)) + 1;
    const double clear = opt.boundary_clearance * h;
    for (int j = 0; j <= rows; ++j) {
      const double y = bb[1] + j * dy;
      std::vector<double> xs;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        if ((a.y() > y) != (b.y() > y)) xs.push_back(a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        const double off = (j % 2) ? 0.5 * h : 0.0;
        const long i0 = static_cast<long>(std::ceil((xs[k] - bb[0] - off) / h));
        const long i1 = static_cast<long>(std::floor((xs[k + 1] - bb[0] - off) / h));
        for (long i = i0; i <= i1; ++i) {
          Vec2 p(bb[0] + off + i * h, y);
          if (grid.distance(p, clear) < clear) continue;
          const double jx = detail::hash_unit(static_cast<std::uint64_t>(i + (1L << 30)), static_cast<std::uint64_t>(j));
          const double jy = detail::hash_unit(static_cast<std::uint64_t>(j + (1L << 30)), static_cast<std::uint64_t>(i + 7));
          p += 1e-4 * h * Vec2(jx, jy);
          pts.push_back(p);
        }
      }
    }

    auto triangulate = [&](const std::vector<Vec2>& P) {
      detail::BowyerWatson bw(P);
      bw.insert_all(4.0 * h);
      std::vector<Triangle> kept;
      for (const auto& T : bw.triangles()) {
        const Vec2 c = (P[static_cast<std::size_t>(T[0])] + P[static_cast<std::size_t>(T[1])] + P[static_cast<std::size_t>(T[2])]) / 3.0;
        // triangles spanning only boundary vertices may lie outside; test the centroid
        if (geometry::point_in_polygon(c, poly)) kept.push_back(T);
      }
      return kept;
    };

    mesh.vertices = pts;
    mesh.triangles = triangulate(pts);
    for (const auto& s : segs) mesh.boundary.push_back({s.a, s.b, s.marker});
    mesh.finalize();

    // optional smoothing of interior vertices if the angle bound fails
    for (int sweep = 0; sweep < opt.smoothing_sweeps && mesh.min_angle_degrees() < opt.min_angle; ++sweep) {
      std::vector<Vec2> sum(mesh.vertices.size(), Vec2::Zero());
      std::vector<int> cnt(mesh.vertices.size(), 0);
      for (const auto& T : mesh.triangles)
        for (int i = 0; i < 3; ++i) {
          sum[static_cast<std::size_t>(T[i])] += mesh.vertices[static_cast<std::size_t>(T[(i + 1) % 3])] +
                                                 mesh.vertices[static_cast<std::size_t>(T[(i + 2) % 3])];
          cnt[static_cast<std::size_t>(T[i])] += 2;
        }
      for (std::size_t v = nb; v < mesh.vertices.size(); ++v) {
        if (cnt[v] == 0) continue;
        const Vec2 q = sum[v] / cnt[v];
        if (grid.distance(q, 0.5 * clear) >= 0.5 * clear) mesh.vertices[v] = q;
      }
      mesh.triangles = triangulate(mesh.vertices);
      mesh.finalize();
    }

    // every boundary subsegment must be a mesh edge
    std::set<std::pair<int, int>> edges;
    for (const auto& T : mesh.triangles)
      for (int i = 0; i < 3; ++i) edges.insert({std::min(T[i], T[(i + 1) % 3]), std::max(T[i], T[(i + 1) % 3])});
    for (const auto& s : segs)
      if (!edges.count({std::min(s.a, s.b), std::max(s.a, s.b)}))
        throw SolverError("mesh_domain: boundary segment lost in triangulation");
  }
  mesh.target_h = h;
  mesh.domain_name = domain.name;
  mesh.finalize();
  mesh.check_conforming();
  return mesh;
}

}  // namespace nodal_atlas::fem
