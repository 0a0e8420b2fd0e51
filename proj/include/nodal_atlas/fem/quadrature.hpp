#pragma once

#include "nodal_atlas/fem/coefficients.hpp"
#include "nodal_atlas/fem/field.hpp"
#include "nodal_atlas/geometry/polygon.hpp"

#include <vector>

namespace nodal_atlas::fem {

/// Affine frame x~ = S^{-1}(y - x0). Balls of radius r in x~ are the ellipses x0 + S B_r.
struct Frame {
  Vec2 x0 = Vec2::Zero();
  Mat2 S = Mat2::Identity();
  Mat2 Sinv = Mat2::Identity();
  double detS = 1.0;

  static Frame at(const Vec2& x0) { return Frame{x0, Mat2::Identity(), Mat2::Identity(), 1.0}; }
  static Frame with_shape(const Vec2& x0, const Mat2& S) {
    const double d = S.determinant();
    if (!(d > 0.0)) throw InvalidInput("Frame: shape matrix must have positive determinant");
    return Frame{x0, S, S.inverse(), d};
  }
  Vec2 to_world(const Vec2& xt) const { return x0 + S * xt; }
  Vec2 to_local(const Vec2& y) const { return Sinv * (y - x0); }
  /// Bounding box half extents of x0 + S B_r.
  Vec2 half_extent(double r) const { return r * Vec2(S.row(0).norm(), S.row(1).norm()); }
};

struct QuadOptions {
  int tri_order = 6;                     // Gauss points per direction of the collapsed triangle rule
  int radial = 6;                        // Gauss points in the radius of sectors
  int angular = 8;                       // Gauss points per angular piece of sectors
  double sector_piece = kPi / 4.0;       // longest angular piece of a sector
  double theta_tol = 2.0 * kPi / 512.0;  // longest angular piece on circles
  int arc_nodes = 3;                     // Gauss points per circle piece

  QuadOptions refined() const {
    QuadOptions q = *this;
    q.tri_order += 3;
    q.radial += 3;
    q.angular += 6;
    q.arc_nodes += 2;
    return q;
  }
};

namespace detail {

struct ClipEvent {
  Vec2 p;
  int kind;  // 0 vertex inside, 1 entry into the disk, 2 exit
};

enum class ClipStatus { empty, triangle, disk, partial };

inline bool in_triangle(const Vec2& p, const Vec2 v[3], double tol) {
  const double A = orient(v[0], v[1], v[2]);
  return orient(v[0], v[1], p) >= -tol * A && orient(v[1], v[2], p) >= -tol * A && orient(v[2], v[0], p) >= -tol * A;
}

/// Walks the triangle boundary and records the pieces inside the disk |x| <= r.
inline ClipStatus clip_triangle_disk(const Vec2 v[3], double r, std::vector<ClipEvent>& ev) {
  ev.clear();
  const double r2 = r * r;
  double f[3];
  int inside = 0;
  for (int i = 0; i < 3; ++i) {
    f[i] = v[i].squaredNorm() - r2;
    inside += f[i] <= 0.0 ? 1 : 0;
  }
  if (inside == 3) return ClipStatus::triangle;
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % 3];
    const double fa = f[i], fb = f[(i + 1) % 3];
    if (fa <= 0.0) ev.push_back({a, 0});
    if (fa <= 0.0 && fb <= 0.0) continue;
    const Vec2 d = b - a;
    const double qa = d.squaredNorm();
    const double qb = 2.0 * a.dot(d);
    if (qa <= 0.0) continue;
    const double disc = qb * qb - 4.0 * qa * fa;
    // one endpoint inside: exactly one crossing, even when rounding makes disc <= 0
    if (disc <= 0.0 && fa > 0.0 && fb > 0.0) continue;
    const double sq = std::sqrt(std::max(disc, 0.0));
    // stable roots of qa t^2 + qb t + fa
    const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
    double t1 = q / qa, t2 = q != 0.0 ? fa / q : t1;
    if (t1 > t2) std::swap(t1, t2);
    if (fa <= 0.0) {
      ev.push_back({a + std::clamp(t2, 0.0, 1.0) * d, 2});
    } else if (fb <= 0.0) {
      ev.push_back({a + std::clamp(t1, 0.0, 1.0) * d, 1});
    } else {
      const double tm = -qb / (2.0 * qa);
      if (tm > 0.0 && tm < 1.0 && t1 < t2) {
        ev.push_back({a + t1 * d, 1});
        ev.push_back({a + t2 * d, 2});
      }
    }
  }
  if (ev.empty()) return in_triangle(Vec2::Zero(), v, 0.0) ? ClipStatus::disk : ClipStatus::empty;
  return ClipStatus::partial;
}

/// Signed integral over triangle (a, b, c); the collapsed corner of the rule sits at b.
template <class F>
double triangle_integral(const Vec2& a, const Vec2& b, const Vec2& c, const F& f, int order) {
  const double J = orient(a, b, c);
  if (J == 0.0) return 0.0;
  const TriangleRule& tr = triangle_rule(order);
  // reference (1,0) is the collapsed vertex; map it to b
  double s = 0.0;
  for (std::size_t k = 0; k < tr.weights.size(); ++k) {
    const double xi = tr.points[k][0], eta = tr.points[k][1];
    s += tr.weights[k] * f(a + xi * (b - a) + eta * (c - a));
  }
  return s * J;
}

/// Integral over the sector {rho <= r, alpha <= angle <= alpha + span}.
template <class F>
double sector_integral(double alpha, double span, double r, const F& f, const QuadOptions& q) {
  if (span <= 0.0) return 0.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil(span / q.sector_piece - 1e-12)));
  const GaussRule& gr = gauss_legendre(q.radial);
  const GaussRule& ga = gauss_legendre(q.angular);
  const double dt = span / pieces;
  double s = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double t0 = alpha + p * dt;
    for (std::size_t i = 0; i < ga.nodes.size(); ++i) {
      const double t = t0 + 0.5 * dt * (ga.nodes[i] + 1.0);
      const Vec2 dir(std::cos(t), std::sin(t));
      double inner = 0.0;
      for (std::size_t j = 0; j < gr.nodes.size(); ++j) {
        const double rho = 0.5 * r * (gr.nodes[j] + 1.0);
        inner += gr.weights[j] * rho * f(rho * dir);
      }
      s += ga.weights[i] * inner * 0.5 * r;
    }
  }
  return s * 0.5 * dt;
}

/// Line integral over the arc of radius r from alpha through alpha + span (arc-length measure).
template <class F>
double arc_integral(double alpha, double span, double r, const F& f, const QuadOptions& q) {
  if (span <= 0.0) return 0.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil(span / q.theta_tol - 1e-12)));
  const GaussRule& g = gauss_legendre(q.arc_nodes);
  const double dt = span / pieces;
  double s = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double t0 = alpha + p * dt;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double t = t0 + 0.5 * dt * (g.nodes[i] + 1.0);
      s += g.weights[i] * f(Vec2(r * std::cos(t), r * std::sin(t)));
    }
  }
  return s * 0.5 * dt * r;
}

/// CCW arc from the exit point E to the entry point N, validated by its midpoint lying in the triangle.
inline double arc_span(const Vec2& E, const Vec2& N, double r, const Vec2 v[3]) {
  const double a = std::atan2(E.y(), E.x());
  double span = std::atan2(N.y(), N.x()) - a;
  while (span < 0.0) span += 2.0 * kPi;
  while (span >= 2.0 * kPi) span -= 2.0 * kPi;
  if (span < 1e-9 || span > 2.0 * kPi - 1e-9) {
    const double m = a + 0.5 * span;
    return in_triangle(Vec2(r * std::cos(m), r * std::sin(m)), v, 1e-12) ? span : 0.0;
  }
  return span;
}

/// Integral of f over the polygon, fanned from the origin when it lies inside (f may be
/// discontinuous there), otherwise from the first vertex.
template <class F>
double polygon_integral(const std::vector<Vec2>& poly, const F& f, int order) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  bool origin_inside = true;
  for (std::size_t i = 0; i < n; ++i)
    if (orient(poly[i], poly[(i + 1) % n], Vec2::Zero()) < 0.0) {
      origin_inside = false;
      break;
    }
  double s = 0.0;
  if (origin_inside) {
    for (std::size_t i = 0; i < n; ++i) s += triangle_integral(poly[(i + 1) % n], Vec2::Zero(), poly[i], f, order);
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) s += triangle_integral(poly[0], poly[i], poly[i + 1], f, order);
  }
  return s;
}

/// Integral of f(x) over T ∩ {|x| <= r} for a CCW triangle in local coordinates.
template <class F>
double triangle_disk_integral(const Vec2 v[3], double r, const F& f, const QuadOptions& q,
                              std::vector<ClipEvent>& ev, std::vector<Vec2>& poly, bool& met) {
  const ClipStatus status = clip_triangle_disk(v, r, ev);
  met = status != ClipStatus::empty;
  switch (status) {
    case ClipStatus::empty: return 0.0;
    case ClipStatus::disk: return sector_integral(0.0, 2.0 * kPi, r, f, q);
    case ClipStatus::triangle: poly.assign(v, v + 3); return polygon_integral(poly, f, q.tri_order);
    case ClipStatus::partial: break;
  }
  poly.clear();
  for (const auto& e : ev) poly.push_back(e.p);
  double s = polygon_integral(poly, f, q.tri_order);
  const std::size_t n = ev.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (ev[i].kind != 2) continue;
    const Vec2& E = ev[i].p;
    const Vec2& N = ev[(i + 1) % n].p;
    const double span = arc_span(E, N, r, v);
    if (span <= 0.0) continue;
    // circular segment = sector minus the signed triangle (0, E, N), written as (N, 0, E)
    s += sector_integral(std::atan2(E.y(), E.x()), span, r, f, q) - triangle_integral(N, Vec2::Zero(), E, f, q.tri_order);
  }
  return s;
}

/// Line integral of f over the part of {|x| = r} inside the triangle.
template <class F>
double triangle_circle_integral(const Vec2 v[3], double r, const F& f, const QuadOptions& q, std::vector<ClipEvent>& ev,
                                bool& met) {
  const ClipStatus status = clip_triangle_disk(v, r, ev);
  met = status == ClipStatus::disk || status == ClipStatus::partial;
  switch (status) {
    case ClipStatus::empty:
    case ClipStatus::triangle: return 0.0;
    case ClipStatus::disk: return arc_integral(0.0, 2.0 * kPi, r, f, q);
    case ClipStatus::partial: break;
  }
  double s = 0.0;
  const std::size_t n = ev.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (ev[i].kind != 2) continue;
    const Vec2& E = ev[i].p;
    const double span = arc_span(E, ev[(i + 1) % n].p, r, v);
    s += arc_integral(std::atan2(E.y(), E.x()), span, r, f, q);
  }
  return s;
}

}  // namespace detail

/// Integral over (x0 + S B_r) ∩ mesh of fn(t, y, x~) with respect to dx~ (multiply by detS for dy).
/// fn receives the triangle id, the world point y and the local point x~. Triangles are visited in
/// ascending order; `hit` reports whether any triangle met the region.
template <class Fn>
double ball_integral(const TriangleIndex& index, const Frame& fr, double r, const Fn& fn, const QuadOptions& q = {},
                     bool* hit = nullptr) {
  const Mesh& mesh = index.mesh();
  const Vec2 ext = fr.half_extent(r);
  const auto cand = index.query(fr.x0 - ext, fr.x0 + ext);
  std::vector<detail::ClipEvent> ev;
  std::vector<Vec2> poly;
  double s = 0.0;
  bool any = false;
  for (int t : cand) {
    const auto& T = mesh.triangles[static_cast<std::size_t>(t)];
    const Vec2 v[3] = {fr.to_local(mesh.vertices[T[0]]), fr.to_local(mesh.vertices[T[1]]), fr.to_local(mesh.vertices[T[2]])};
    const auto tt = static_cast<std::size_t>(t);
    auto f = [&](const Vec2& xt) { return fn(tt, fr.to_world(xt), xt); };
    bool met = false;
    s += detail::triangle_disk_integral(v, r, f, q, ev, poly, met);
    any = any || met;
  }
  if (hit) *hit = any;
  return s;
}

/// Line integral over {|x~| = r} ∩ mesh in the local frame (arc length measured in x~).
template <class Fn>
double circle_integral(const TriangleIndex& index, const Frame& fr, double r, const Fn& fn, const QuadOptions& q = {},
                       bool* hit = nullptr) {
  const Mesh& mesh = index.mesh();
  const Vec2 ext = fr.half_extent(r);
  const auto cand = index.query(fr.x0 - ext, fr.x0 + ext);
  std::vector<detail::ClipEvent> ev;
  double s = 0.0;
  bool any = false;
  for (int t : cand) {
    const auto& T = mesh.triangles[static_cast<std::size_t>(t)];
    const Vec2 v[3] = {fr.to_local(mesh.vertices[T[0]]), fr.to_local(mesh.vertices[T[1]]), fr.to_local(mesh.vertices[T[2]])};
    const auto tt = static_cast<std::size_t>(t);
    auto f = [&](const Vec2& xt) { return fn(tt, fr.to_world(xt), xt); };
    bool met = false;
    s += detail::triangle_circle_integral(v, r, f, q, ev, met);
    any = any || met;
  }
  if (hit) *hit = any;
  return s;
}

/// Integral over convex polygon ∩ mesh of fn(t, y) dy. Used for cuboids.
template <class Fn>
double polygon_region_integral(const TriangleIndex& index, const geometry::Polyline& window, const Fn& fn,
                               const QuadOptions& q = {}, bool* hit = nullptr) {
  const Mesh& mesh = index.mesh();
  Vec2 lo = window.front(), hi = window.front();
  for (const auto& p : window) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double s = 0.0;
  bool any = false;
  for (int t : index.query(lo, hi)) {
    const auto& T = mesh.triangles[static_cast<std::size_t>(t)];
    const geometry::Polyline tri = {mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]]};
    const auto piece = geometry::clip_convex(tri, window);
    if (piece.size() < 3) continue;
    const auto tt = static_cast<std::size_t>(t);
    auto f = [&](const Vec2& y) { return fn(tt, y); };
    double part = 0.0;
    for (std::size_t i = 1; i + 1 < piece.size(); ++i)
      part += detail::triangle_integral(piece[0], piece[i], piece[i + 1], f, q.tri_order);
    if (part != 0.0) any = true;
    s += part;
  }
  if (hit) *hit = any;
  return s;
}

// ----------------------------------------------------------------------------------------------
// Tagged integrands

enum class Integrand { one, u, u2, mu_u2, energy };

inline std::string to_string(Integrand e) {
  switch (e) {
    case Integrand::one: return "1";
    case Integrand::u: return "u";
    case Integrand::u2: return "u^2";
    case Integrand::mu_u2: return "mu*u^2";
    default: return "A grad u . grad u";
  }
}

struct Region {
  enum class Kind { disk, ellipse, polygon };
  Kind kind = Kind::disk;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  Mat2 shape = Mat2::Identity();  // ellipse: center + shape * B_radius
  geometry::Polyline window;      // polygon: convex, CCW

  static Region disk(const Vec2& c, double r) { return Region{Kind::disk, c, r, Mat2::Identity(), {}}; }
  static Region ellipse(const Vec2& c, const Mat2& S, double r) { return Region{Kind::ellipse, c, r, S, {}}; }
  static Region polygon(geometry::Polyline w) { return Region{Kind::polygon, Vec2::Zero(), 0.0, Mat2::Identity(), std::move(w)}; }
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // difference against a refined rule
  bool empty = false;
};

/// mu(x0, y) = (y-x0).A0^{-1}A(y)A0^{-1}(y-x0) / (y-x0).A0^{-1}(y-x0), written in the local frame
/// where A0^{-1} = S^{-2}: mu = x~.(S^{-1}A(y)S^{-1})x~ / |x~|^2. Equals 1 at x~ = 0.
inline double mu_weight(const CoefficientField& A, const Frame& fr, const Vec2& y, const Vec2& xt) {
  const double n2 = xt.squaredNorm();
  if (n2 == 0.0) return 1.0;
  const Vec2 w = fr.Sinv * xt;
  return w.dot(A(y) * w) / n2;
}

namespace detail {

template <TriangleField Field>
auto integrand_fn(Integrand e, const Field& u, const CoefficientField& A, const Frame& fr) {
  return [e, &u, &A, &fr](std::size_t t, const Vec2& y, const Vec2& xt) -> double {
    switch (e) {
      case Integrand::one: return 1.0;
      case Integrand::u: return u.value_in(t, y);
      case Integrand::u2: {
        const double v = u.value_in(t, y);
        return v * v;
      }
      case Integrand::mu_u2: {
        const double v = u.value_in(t, y);
        return mu_weight(A, fr, y, xt) * v * v;
      }
      case Integrand::energy: {
        const Vec2 g = u.gradient_in(t, y);
        return g.dot(A(y) * g);
      }
    }
    return 0.0;
  };
}

}  // namespace detail

/// Integral of the tagged expression over region ∩ mesh with respect to dy. The mu weight uses the
/// region center as x0 (and the ellipse shape as S) for disks and ellipses, and the identity frame
/// about the polygon centroid for polygons.
template <TriangleField Field>
QuadResult integrate_region(Integrand e, const Region& region, const Field& u, const CoefficientField& A,
                            const TriangleIndex& index, const QuadOptions& q = {}) {
  QuadResult res;
  bool hit = false;
  if (region.kind == Region::Kind::polygon) {
    if (region.window.size() < 3) throw InvalidInput("integrate_region: polygon needs >= 3 vertices");
    Vec2 c = Vec2::Zero();
    for (const auto& p : region.window) c += p;
    const Frame fr = Frame::at(c / static_cast<double>(region.window.size()));
    const auto fn = detail::integrand_fn(e, u, A, fr);
    auto f = [&](std::size_t t, const Vec2& y) { return fn(t, y, y - fr.x0); };
    const double lo = polygon_region_integral(index, region.window, f, q, &hit);
    const double hi = polygon_region_integral(index, region.window, f, q.refined());
    res.value = hi;
    res.error = std::abs(hi - lo);
  } else {
    if (!(region.radius > 0.0)) throw InvalidInput("integrate_region: radius must be positive");
    const Frame fr = region.kind == Region::Kind::disk ? Frame::at(region.center) : Frame::with_shape(region.center, region.shape);
    const auto fn = detail::integrand_fn(e, u, A, fr);
    const double lo = ball_integral(index, fr, region.radius, fn, q, &hit) * fr.detS;
    const double hi = ball_integral(index, fr, region.radius, fn, q.refined()) * fr.detS;
    res.value = hi;
    res.error = std::abs(hi - lo);
  }
  res.empty = !hit;
  if (res.empty) res.value = res.error = 0.0;
  return res;
}

/// Line integral of the tagged expression over {|y - x0| = r} ∩ mesh (arc length).
template <TriangleField Field>
QuadResult integrate_circle(Integrand e, const Vec2& x0, double r, const Field& u, const CoefficientField& A,
                            const TriangleIndex& index, const QuadOptions& q = {}) {
  if (!(r > 0.0)) throw InvalidInput("integrate_circle: radius must be positive");
  const Frame fr = Frame::at(x0);
  const auto fn = detail::integrand_fn(e, u, A, fr);
  QuadResult res;
  bool hit = false;
  const double lo = circle_integral(index, fr, r, fn, q, &hit);
  const double hi = circle_integral(index, fr, r, fn, q.refined());
  res.value = hi;
  res.error = std::abs(hi - lo);
  res.empty = !hit;
  return res;
}

}  // namespace nodal_atlas::fem
