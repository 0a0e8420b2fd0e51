#pragma once

#include "nodal_atlas/core.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace nodal_atlas::geometry {

using Polyline = std::vector<Vec2>;

inline double signed_area(const Polyline& poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

inline double perimeter(const Polyline& poly) {
  double p = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) p += (poly[(i + 1) % poly.size()] - poly[i]).norm();
  return p;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

/// Distance from p to the closed polyline (boundary only).
inline double distance_to_boundary(const Vec2& p, const Polyline& poly) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  return d;
}

/// Even-odd rule; points on the boundary may go either way.
inline bool point_in_polygon(const Vec2& p, const Polyline& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0)))
    return true;
  auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x(), q.x()) <= r.x() && r.x() <= std::max(p.x(), q.x()) &&
           std::min(p.y(), q.y()) <= r.y() && r.y() <= std::max(p.y(), q.y());
  };
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

/// O(n^2) check that non-adjacent edges do not meet.
inline bool is_simple(const Polyline& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if ((b - a).norm() == 0.0) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

/// True when every turn is a left turn (up to tol times the edge-length scale).
inline bool is_convex_position(const Polyline& poly, double tol = 1e-12) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2& c = poly[(i + 2) % n];
    const double scale = (b - a).norm() * (c - b).norm();
    if (orient(a, b, c) < -tol * scale) return false;
  }
  return true;
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
inline Polyline convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polyline hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const Vec2& p = pts[i];
    while (k >= t && orient(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

/// Sutherland-Hodgman clip of an arbitrary polygon by a convex counter-clockwise window.
inline Polyline clip_convex(const Polyline& subject, const Polyline& window) {
  Polyline out = subject;
  const std::size_t m = window.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Vec2& a = window[e];
    const Vec2& b = window[(e + 1) % m];
    Polyline in = std::move(out);
    out.clear();
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = in[i];
      const Vec2& q = in[(i + 1) % n];
      const double sp = orient(a, b, p);
      const double sq = orient(a, b, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

/// Clips segment [p, q] against a convex counter-clockwise polygon (Cyrus-Beck).
inline std::optional<std::pair<Vec2, Vec2>> clip_segment_convex(const Vec2& p, const Vec2& q,
                                                                const Polyline& window) {
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = q - p;
  const std::size_t m = window.size();
  for (std::size_t e = 0; e < m; ++e) {
    const Vec2& a = window[e];
    const Vec2& b = window[(e + 1) % m];
    const double num = orient(a, b, p);
    const double den = cross(b - a, d);
    if (den == 0.0) {
      if (num < 0) return std::nullopt;
      continue;
    }
    const double t = -num / den;
    if (den > 0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(Vec2(p + t0 * d), Vec2(p + t1 * d));
}

/// Parameters t in [0, 1] where segment a + t(b - a) meets the circle |x - c| = r.
inline std::vector<double> segment_circle_params(const Vec2& a, const Vec2& b, const Vec2& c,
                                                 double r) {
  const Vec2 d = b - a;
  const Vec2 f = a - c;
  const double qa = d.squaredNorm();
  const double qb = 2.0 * f.dot(d);
  const double qc = f.squaredNorm() - r * r;
  std::vector<double> ts;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (qa == 0.0 || disc <= 0.0) return ts;
  const double s = std::sqrt(disc);
  for (double t : {(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)})
    if (t >= 0.0 && t <= 1.0) ts.push_back(t);
  return ts;
}

/// Hausdorff distance between two point samples (symmetric, brute force).
inline double hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  auto one_sided = [](const std::vector<Vec2>& x, const std::vector<Vec2>& y) {
    double h = 0.0;
    for (const auto& p : x) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& q : y) d = std::min(d, (p - q).norm());
      h = std::max(h, d);
    }
    return h;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace nodal_atlas::geometry
