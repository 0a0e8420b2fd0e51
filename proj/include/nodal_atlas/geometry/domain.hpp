#pragma once

#include "nodal_atlas/geometry/graph.hpp"
#include "nodal_atlas/geometry/pathological.hpp"
#include "nodal_atlas/geometry/polygon.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace nodal_atlas::geometry {

enum class DomainKind { convex, quasiconvex, generic_lipschitz };

inline std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::convex: return "convex";
    case DomainKind::quasiconvex: return "quasiconvex";
    default: return "generic-lipschitz";
  }
}

inline DomainKind parse_domain_kind(const std::string& s) {
  if (s == "convex") return DomainKind::convex;
  if (s == "quasiconvex") return DomainKind::quasiconvex;
  if (s == "generic-lipschitz") return DomainKind::generic_lipschitz;
  throw InvalidInput("unknown domain kind '" + s + "'");
}

/// Closed counter-clockwise boundary polyline with optional exact graph patches.
struct PlanarDomain {
  std::string name;
  Polyline boundary;
  std::vector<GraphPatch> patches;
  double lipschitz_L = 1.0;
  double r0 = 0.5;
  DomainKind kind = DomainKind::generic_lipschitz;
  double polygonalization_error = 0.0;  // Hausdorff distance of the polyline to the true boundary

  /// Throws InvalidInput when the stored data break the type's invariants.
  void validate() const {
    if (boundary.size() < 3) throw InvalidInput("domain '" + name + "': polyline needs >= 3 points");
    if (!is_simple(boundary)) throw InvalidInput("domain '" + name + "': polyline is not simple");
    if (signed_area(boundary) <= 0.0)
      throw InvalidInput("domain '" + name + "': polyline must be counter-clockwise");
    if (lipschitz_L < 0.0 || !(r0 > 0.0)) throw InvalidInput("domain '" + name + "': need L >= 0, r0 > 0");
    for (const auto& p : patches)
      if (p.phi.lipschitz() > lipschitz_L * (1.0 + 1e-12) + 1e-12)
        throw InvalidInput("domain '" + name + "': patch '" + p.phi.label() + "' exceeds L");
    if (kind == DomainKind::convex && !is_convex_position(boundary, 1e-9))
      throw InvalidInput("domain '" + name + "': convex tag on a non-convex polyline");
  }

  bool contains(const Vec2& p) const { return point_in_polygon(p, boundary); }

  double diameter() const {
    double d = 0.0;
    const Polyline hull = convex_hull(boundary);
    for (std::size_t i = 0; i < hull.size(); ++i)
      for (std::size_t j = i + 1; j < hull.size(); ++j) d = std::max(d, (hull[i] - hull[j]).norm());
    return d;
  }

  double shortest_edge() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < boundary.size(); ++i)
      m = std::min(m, (boundary[(i + 1) % boundary.size()] - boundary[i]).norm());
    return m;
  }

  std::array<double, 4> bbox() const {
    std::array<double, 4> b{boundary[0].x(), boundary[0].y(), boundary[0].x(), boundary[0].y()};
    for (const auto& p : boundary) {
      b[0] = std::min(b[0], p.x());
      b[1] = std::min(b[1], p.y());
      b[2] = std::max(b[2], p.x());
      b[3] = std::max(b[3], p.y());
    }
    return b;
  }

  /// Index of the first patch whose graph interval covers p's projection and whose graph
  /// passes within tol of p; -1 when none.
  int patch_at(const Vec2& p, double tol = 1e-9) const {
    for (std::size_t i = 0; i < patches.size(); ++i) {
      const Vec2 q = patches[i].to_local(p);
      if (q.x() < patches[i].phi.lo() || q.x() > patches[i].phi.hi()) continue;
      if (std::abs(q.y() - patches[i].phi.value(q.x())) <= tol) return static_cast<int>(i);
    }
    return -1;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name;
    auto& poly = j["polyline"] = nlohmann::json::array();
    for (const auto& p : boundary) poly.push_back({p.x(), p.y()});
    auto& pj = j["patches"] = nlohmann::json::array();
    for (const auto& p : patches) pj.push_back(p.to_json());
    j["L"] = lipschitz_L;
    j["r0"] = r0;
    j["kind"] = to_string(kind);
    j["polygonalization_error"] = polygonalization_error;
    return j;
  }

  static PlanarDomain from_json(const nlohmann::json& j) {
    PlanarDomain d;
    d.name = j.value("name", std::string{"custom"});
    for (const auto& p : j.at("polyline")) {
      const auto xy = p.get<std::array<double, 2>>();
      d.boundary.emplace_back(xy[0], xy[1]);
    }
    if (j.contains("patches"))
      for (const auto& p : j.at("patches")) d.patches.push_back(GraphPatch::from_json(p));
    d.lipschitz_L = j.value("L", 1.0);
    d.r0 = j.value("r0", 0.5);
    d.kind = parse_domain_kind(j.value("kind", std::string{"generic-lipschitz"}));
    d.polygonalization_error = j.value("polygonalization_error", 0.0);
    d.validate();
    return d;
  }
};

// ---- presets ---------------------------------------------------------------

inline PlanarDomain rectangle_domain(double x0, double y0, double x1, double y1,
                                     std::string name = "rectangle") {
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidInput("rectangle: need x0 < x1 and y0 < y1");
  PlanarDomain d;
  d.name = std::move(name);
  d.boundary = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  const double w = x1 - x0;
  d.patches.push_back({Vec2(0.5 * (x0 + x1), y0), 0.0,
                       GraphFunction::quadratic(-0.5 * w, 0.5 * w, 0.0, 0.0, 0.0, "bottom-edge")});
  d.lipschitz_L = 1.0;
  d.r0 = 0.5 * std::min(w, y1 - y0);
  d.kind = DomainKind::convex;
  return d;
}

inline PlanarDomain unit_square() { return rectangle_domain(0.0, 0.0, 1.0, 1.0, "unit-square"); }

/// Patch for the polyline vertices whose local abscissa lies within half_width of the anchor.
inline GraphPatch polygonal_patch(const Polyline& poly, const Vec2& anchor, double angle,
                                  double half_width, const std::string& label) {
  GraphPatch p;
  p.anchor = anchor;
  p.angle = angle;
  std::vector<std::pair<double, double>> pts;
  for (const auto& v : poly) {
    const Vec2 q = p.to_local(v);
    if (std::abs(q.x()) <= half_width && (v - anchor).norm() <= 2.0 * half_width) pts.emplace_back(q.x(), q.y());
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> xs, ys;
  for (const auto& [x, y] : pts) {
    xs.push_back(x);
    ys.push_back(y);
  }
  p.phi = GraphFunction::polygonal(xs, ys, label);
  return p;
}

/// Regular n-gon inscribed in the circle of given radius; vertex 0 at angle phase.
inline Polyline regular_polygon(int n, double radius, double phase, const Vec2& c = Vec2::Zero()) {
  Polyline poly;
  for (int i = 0; i < n; ++i) {
    const double t = phase + 2.0 * kPi * i / n;
    poly.emplace_back(c.x() + radius * std::cos(t), c.y() + radius * std::sin(t));
  }
  return poly;
}

/// Unit disk as a regular polygon with `segments` edges. The bottom patch is the polyline itself,
/// which is the exact boundary of the meshed domain.
inline PlanarDomain unit_disk(int segments = 256) {
  if (segments < 8) throw InvalidInput("unit_disk: need at least 8 segments");
  PlanarDomain d;
  d.name = "unit-disk";
  d.boundary = regular_polygon(segments, 1.0, -0.5 * kPi);
  d.patches.push_back(polygonal_patch(d.boundary, Vec2(0.0, -1.0), 0.0, 0.5, "disk-bottom"));
  d.lipschitz_L = 1.0;
  d.r0 = 0.5;
  d.kind = DomainKind::convex;
  d.polygonalization_error = 1.0 - std::cos(kPi / segments);
  return d;
}

/// Upper half of the unit disk, flat side on y = 0; `segments` edges on the arc.
inline PlanarDomain half_disk(int segments = 128) {
  if (segments < 4) throw InvalidInput("half_disk: need at least 4 arc segments");
  PlanarDomain d;
  d.name = "half-disk";
  for (int i = 0; i <= segments; ++i) {
    const double t = kPi * i / segments;
    d.boundary.emplace_back(std::cos(t), std::sin(t));
  }
  d.boundary.front() = Vec2(1.0, 0.0);
  d.boundary.back() = Vec2(-1.0, 0.0);
  d.patches.push_back({Vec2::Zero(), 0.0, GraphFunction::quadratic(-1.0, 1.0, 0.0, 0.0, 0.0, "flat-side")});
  d.lipschitz_L = 1.0;
  d.r0 = 0.5;
  d.kind = DomainKind::convex;
  d.polygonalization_error = 1.0 - std::cos(0.5 * kPi / segments);
  return d;
}

/// Regular polygon with circumradius 1 centred at the origin and a flat bottom edge.
inline PlanarDomain regular_ngon(int n, std::string name = {}) {
  if (n < 3) throw InvalidInput("regular_ngon: need n >= 3");
  PlanarDomain d;
  d.name = name.empty() ? "ngon-" + std::to_string(n) : std::move(name);
  d.boundary = regular_polygon(n, 1.0, -0.5 * kPi - kPi / n);
  const Vec2 a = d.boundary[0], b = d.boundary[1];
  const double hw = 0.5 * (b - a).norm();
  d.patches.push_back({0.5 * (a + b), 0.0, GraphFunction::quadratic(-hw, hw, 0.0, 0.0, 0.0, "bottom-edge")});
  d.lipschitz_L = 1.0 / std::tan(kPi / n) > 1.0 ? 1.0 / std::tan(kPi / n) : 1.0;
  d.r0 = std::min(0.5, hw);
  d.kind = DomainKind::convex;
  return d;
}

inline PlanarDomain hexagon() { return regular_ngon(6, "hexagon"); }

/// {|x| < 1, -x^2 < y < 1}; the bottom curve is sampled with `segments` chords.
inline PlanarDomain parabola_domain(int segments = 128) {
  if (segments < 4) throw InvalidInput("parabola_domain: need at least 4 segments");
  PlanarDomain d;
  d.name = "parabola";
  for (int i = 0; i <= segments; ++i) {
    const double x = -1.0 + 2.0 * i / segments;
    d.boundary.emplace_back(x, -x * x);
  }
  d.boundary.emplace_back(1.0, 1.0);
  d.boundary.emplace_back(-1.0, 1.0);
  d.patches.push_back({Vec2::Zero(), 0.0, GraphFunction::quadratic(-1.0, 1.0, 0.0, 0.0, -1.0, "parabola")});
  d.lipschitz_L = 2.0;
  d.r0 = 0.6;
  d.kind = DomainKind::quasiconvex;
  // chord sag of y = -x^2 over spacing 2/segments
  const double dx = 2.0 / segments;
  d.polygonalization_error = 0.25 * dx * dx;
  return d;
}

/// {0 < x < 1, phi_K(x) < y < 1}. samples = 0 keeps every breakpoint of phi_K plus 2048
/// uniform points; samples > 0 uses that many uniform chords (for meshing).
inline PlanarDomain pathological_domain(int K = 4096, Enumeration order = Enumeration::stern_brocot,
                                        int samples = 0) {
  const PathologicalCurve c = pathological_curve(K, order);
  PlanarDomain d;
  d.name = "pathological";
  std::vector<double> xs;
  if (samples > 0) {
    for (int i = 0; i <= samples; ++i) xs.push_back(static_cast<double>(i) / samples);
  } else {
    xs = c.phi.breaks();
    for (int i = 0; i <= 2048; ++i) xs.push_back(i / 2048.0);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return b - a < 1e-13; }), xs.end());
  }
  for (double x : xs) d.boundary.emplace_back(x, c.phi.value(x));
  d.boundary.emplace_back(1.0, 1.0);
  d.boundary.emplace_back(0.0, 1.0);
  const double xa = 0.5;
  d.patches.push_back({Vec2(xa, c.phi.value(xa)), 0.0, c.phi.recentred(xa)});
  d.lipschitz_L = 2.0;
  d.r0 = 0.25;
  d.kind = DomainKind::quasiconvex;
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double m = 0.5 * (xs[i] + xs[i + 1]);
    const double chord = 0.5 * (c.phi.value(xs[i]) + c.phi.value(xs[i + 1]));
    err = std::max(err, std::abs(c.phi.value(m) - chord));
  }
  d.polygonalization_error = err;
  return d;
}

/// Builds a named preset. Recognised names: unit-square, rectangle, unit-disk, half-disk,
/// hexagon, ngon, parabola, pathological, half-plane-box. `params` holds optional overrides.
inline PlanarDomain make_domain(const std::string& name, const nlohmann::json& params = nlohmann::json::object()) {
  PlanarDomain d;
  if (name == "unit-square") {
    d = unit_square();
  } else if (name == "rectangle") {
    d = rectangle_domain(params.value("x0", 0.0), params.value("y0", 0.0), params.value("x1", 1.0),
                         params.value("y1", 1.0));
  } else if (name == "half-plane-box") {
    d = rectangle_domain(-1.0, 0.0, 1.0, 1.0, "half-plane-box");
  } else if (name == "unit-disk") {
    d = unit_disk(params.value("segments", 256));
  } else if (name == "half-disk") {
    d = half_disk(params.value("segments", 128));
  } else if (name == "hexagon") {
    d = hexagon();
  } else if (name == "ngon") {
    d = regular_ngon(params.value("n", 8));
  } else if (name == "parabola") {
    d = parabola_domain(params.value("segments", 128));
  } else if (name == "pathological") {
    d = pathological_domain(params.value("K", 4096),
                            parse_enumeration(params.value("enumeration", std::string{"stern-brocot"})),
                            params.value("samples", 0));
  } else {
    throw InvalidInput("unknown domain preset '" + name +
                       "' (known: unit-square, rectangle, half-plane-box, unit-disk, half-disk, hexagon, "
                       "ngon, parabola, pathological)");
  }
  d.validate();
  return d;
}

/// Preset whose curved parts are polygonalized with chords no shorter than h, so it can be
/// meshed at spacing h. Explicit "segments"/"samples" entries in params take precedence.
inline PlanarDomain make_domain_for_mesh(const std::string& name, double h,
                                         nlohmann::json params = nlohmann::json::object()) {
  if (!(h > 0.0)) throw InvalidInput("make_domain_for_mesh: h must be positive");
  auto count = [h](double length) { return static_cast<int>(std::floor(length / (1.01 * h))); };
  if (name == "unit-disk" && !params.contains("segments")) params["segments"] = std::max(8, count(2.0 * kPi));
  if (name == "half-disk" && !params.contains("segments")) params["segments"] = std::max(4, count(kPi));
  if (name == "parabola" && !params.contains("segments")) params["segments"] = std::max(4, count(2.0));
  if (name == "pathological" && !params.contains("samples")) params["samples"] = std::max(8, count(1.0));
  return make_domain(name, params);
}

inline PlanarDomain load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open domain file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("domain file '" + path + "': " + e.what());
  }
  return PlanarDomain::from_json(j);
}

}  // namespace nodal_atlas::geometry
