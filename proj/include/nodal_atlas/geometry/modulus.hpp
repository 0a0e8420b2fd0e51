#pragma once

#include "nodal_atlas/geometry/domain.hpp"

#include <vector>

namespace nodal_atlas::geometry {

struct QuasiconvexityModulus {
  std::vector<double> radii;
  std::vector<double> values;      // after the isotonic (running max) pass
  std::vector<double> raw;         // per-radius maxima before the pass
  std::vector<Vec2> worst_center;  // boundary point attaining raw[i]
};

struct ModulusOptions {
  int direction_samples = 720;
  int center_samples = 512;  // used when the polyline has more vertices than this
  double zero_tol = 1e-12;   // relative to r
};

namespace detail {

struct CircleArc {
  double a0, a1;  // counter-clockwise from a0 to a1, a1 > a0
};

// Arcs of the circle |y - c| = r lying inside the polygon, and the crossing points.
inline std::vector<CircleArc> arcs_inside(const Polyline& poly, const Vec2& c, double r,
                                          std::vector<Vec2>* crossings) {
  std::vector<double> angles;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (point_segment_distance(c, a, b) > r) continue;
    for (double t : segment_circle_params(a, b, c, r)) {
      const Vec2 p = a + t * (b - a);
      if (crossings) crossings->push_back(p);
      angles.push_back(std::atan2(p.y() - c.y(), p.x() - c.x()));
    }
  }
  std::vector<CircleArc> arcs;
  if (angles.empty()) {
    if (poly.size() >= 3 && point_in_polygon(c + Vec2(r, 0.0), poly)) arcs.push_back({-kPi, kPi});
    return arcs;
  }
  std::sort(angles.begin(), angles.end());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double a0 = angles[i];
    const double a1 = i + 1 < angles.size() ? angles[i + 1] : angles[0] + 2.0 * kPi;
    if (a1 - a0 <= 0.0) continue;
    const double m = 0.5 * (a0 + a1);
    if (point_in_polygon(c + r * Vec2(std::cos(m), std::sin(m)), poly)) arcs.push_back({a0, a1});
  }
  return arcs;
}

inline bool angle_in_arc(double t, const CircleArc& arc) {
  double s = t;
  while (s < arc.a0) s += 2.0 * kPi;
  while (s >= arc.a0 + 2.0 * kPi) s -= 2.0 * kPi;
  return s <= arc.a1;
}

// Boundary sample points x0 for the modulus sup.
inline std::vector<Vec2> boundary_centers(const Polyline& poly, int count) {
  if (static_cast<int>(poly.size()) <= count) return poly;
  std::vector<Vec2> out;
  const double total = perimeter(poly);
  const double step = total / count;
  double acc = 0.0;
  double next = 0.0;
  for (std::size_t i = 0; i < poly.size() && static_cast<int>(out.size()) < count; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const double len = (b - a).norm();
    while (next <= acc + len && static_cast<int>(out.size()) < count) {
      out.push_back(a + ((next - acc) / len) * (b - a));
      next += step;
    }
    acc += len;
  }
  return out;
}

}  // namespace detail

/// Flatness defect at a single boundary point: the least t >= 0 with
/// Omega cap B_r(x0) inside {(y - x0).n <= r t} for some sampled unit n.
inline double local_modulus(const Polyline& poly, const Vec2& x0, double r, const ModulusOptions& opt = {}) {
  std::vector<Vec2> cands{x0};
  for (const auto& v : poly)
    if ((v - x0).norm() <= r) cands.push_back(v);
  const auto arcs = detail::arcs_inside(poly, x0, r, &cands);
  const Polyline hull = cands.size() >= 3 ? convex_hull(cands) : Polyline(cands);

  std::vector<Vec2> dirs;
  dirs.reserve(static_cast<std::size_t>(opt.direction_samples) + 4);
  for (int i = 0; i < opt.direction_samples; ++i) {
    const double t = 2.0 * kPi * i / opt.direction_samples;
    dirs.emplace_back(std::cos(t), std::sin(t));
  }
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    dmin = std::min(dmin, point_segment_distance(x0, poly[i], poly[(i + 1) % poly.size()]));
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    if (point_segment_distance(x0, a, b) <= dmin + 1e-12 * r) {
      const Vec2 e = b - a;
      dirs.push_back(Vec2(e.y(), -e.x()).normalized());
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& n : dirs) {
    double h = 0.0;
    for (const auto& p : hull) h = std::max(h, (p - x0).dot(n));
    const double t = std::atan2(n.y(), n.x());
    for (const auto& arc : arcs)
      if (detail::angle_in_arc(t, arc)) h = std::max(h, r);
    best = std::min(best, h);
  }
  const double w = std::max(0.0, best) / r;
  return w <= opt.zero_tol ? 0.0 : w;
}

inline QuasiconvexityModulus estimate_modulus(const PlanarDomain& domain, const std::vector<double>& radii,
                                              const ModulusOptions& opt = {}) {
  if (domain.boundary.size() < 3) throw InvalidInput("estimate_modulus: empty boundary sampling");
  if (radii.empty()) throw InvalidInput("estimate_modulus: empty radius grid");
  if (opt.direction_samples < 4) throw InvalidInput("estimate_modulus: need >= 4 directions");
  const double diam = domain.diameter();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw InvalidInput("estimate_modulus: radii must be positive");
    if (radii[i] > domain.r0 * (1.0 + 1e-12))
      throw InvalidInput("estimate_modulus: radius " + std::to_string(radii[i]) + " exceeds r0 = " +
                         std::to_string(domain.r0));
    if (radii[i] > diam) throw InvalidInput("estimate_modulus: radius exceeds the domain diameter");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw InvalidInput("estimate_modulus: radii must increase");
  }
  const auto centers = detail::boundary_centers(domain.boundary, opt.center_samples);
  if (centers.empty()) throw InvalidInput("estimate_modulus: empty boundary sampling");

  QuasiconvexityModulus out;
  out.radii = radii;
  out.raw.assign(radii.size(), 0.0);
  out.worst_center.assign(radii.size(), centers.front());
  std::vector<double> table(radii.size() * centers.size(), 0.0);
  parallel_for(centers.size(), [&](std::size_t c) {
    for (std::size_t i = 0; i < radii.size(); ++i)
      table[c * radii.size() + i] = local_modulus(domain.boundary, centers[c], radii[i], opt);
  });
  for (std::size_t i = 0; i < radii.size(); ++i)
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (table[c * radii.size() + i] > out.raw[i]) {
        out.raw[i] = table[c * radii.size() + i];
        out.worst_center[i] = centers[c];
      }
  out.values = out.raw;
  for (std::size_t i = 1; i < out.values.size(); ++i) out.values[i] = std::max(out.values[i], out.values[i - 1]);
  return out;
}

/// Upper bound for omega(r) from a nondecreasing grid: the value at the first grid radius >= r
/// (the last value beyond the grid).
inline double modulus_at(const QuasiconvexityModulus& m, double r) {
  for (std::size_t i = 0; i < m.radii.size(); ++i)
    if (r <= m.radii[i] * (1.0 + 1e-12)) return m.values[i];
  return m.values.empty() ? 0.0 : m.values.back();
}

}  // namespace nodal_atlas::geometry
