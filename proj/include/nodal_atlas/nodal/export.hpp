#pragma once

#include "nodal_atlas/geometry/cuboid.hpp"
#include "nodal_atlas/nodal/nodal_set.hpp"

#include <fmt/format.h>

#include <fstream>

namespace nodal_atlas::nodal {

inline void write_nodal_csv(const NodalSet& Z, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << "x1,y1,x2,y2,triangle_id\n";
  for (const auto& s : Z.segments)
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{}\n", s.a.x(), s.a.y(), s.b.x(), s.b.y(), s.triangle);
}

struct SvgStyle {
  double width = 600.0;
  double margin = 10.0;
  std::string outline = "#333";
  std::string segment = "#c0392b";
  std::string cuboid = "#2e86c1";
};

/// Domain outline, nodal segments and an optional cuboid grid; y points up.
inline std::string nodal_svg(const geometry::Polyline& outline, const NodalSet& Z,
                             const std::vector<geometry::Cuboid>& cuboids = {}, const SvgStyle& st = {}) {
  if (outline.size() < 2) throw InvalidInput("nodal_svg: outline needs at least two points");
  Vec2 lo = outline.front(), hi = outline.front();
  for (const auto& p : outline) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const double k = (st.width - 2.0 * st.margin) / span;
  const double height = (hi.y() - lo.y()) * k + 2.0 * st.margin;
  auto X = [&](const Vec2& p) { return st.margin + (p.x() - lo.x()) * k; };
  auto Y = [&](const Vec2& p) { return height - st.margin - (p.y() - lo.y()) * k; };
  auto path = [&](const geometry::Polyline& poly) {
    std::string d;
    for (std::size_t i = 0; i < poly.size(); ++i) d += fmt::format("{}{:.3f},{:.3f} ", i ? "L" : "M", X(poly[i]), Y(poly[i]));
    return d + "Z";
  };

  std::string s = fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\">\n", st.width, height);
  s += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", path(outline), st.outline);
  for (const auto& q : cuboids)
    s += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"0.5\"/>\n", path(q.corners()), st.cuboid);
  s += fmt::format("<g stroke=\"{}\" stroke-width=\"1\">\n", st.segment);
  for (const auto& seg : Z.segments)
    s += fmt::format("<line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\"/>\n", X(seg.a), Y(seg.a), X(seg.b), Y(seg.b));
  s += "</g>\n</svg>\n";
  return s;
}

inline void write_nodal_svg(const std::string& path, const geometry::Polyline& outline, const NodalSet& Z,
                            const std::vector<geometry::Cuboid>& cuboids = {}) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << nodal_svg(outline, Z, cuboids);
}

}  // namespace nodal_atlas::nodal
