#pragma once

#include "nodal_atlas/core.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace nodal_atlas::fem {

using Triangle = std::array<int, 3>;

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int marker = 0;  // index of the polyline edge it lies on
};

/// Conforming triangulation with counter-clockwise triangles. Dirichlet vertices are the
/// endpoints of boundary edges.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary;
  std::vector<char> on_boundary;  // per vertex
  double h = 0.0;                 // longest edge
  double target_h = 0.0;
  std::string domain_name;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double area(std::size_t t) const {
    const auto& T = triangles[t];
    return 0.5 * orient(vertices[T[0]], vertices[T[1]], vertices[T[2]]);
  }

  Vec2 centroid(std::size_t t) const {
    const auto& T = triangles[t];
    return (vertices[T[0]] + vertices[T[1]] + vertices[T[2]]) / 3.0;
  }

  /// Recomputes h and the boundary flags from the triangle and edge lists.
  void finalize() {
    h = 0.0;
    for (const auto& T : triangles)
      for (int i = 0; i < 3; ++i) h = std::max(h, (vertices[T[(i + 1) % 3]] - vertices[T[i]]).norm());
    on_boundary.assign(vertices.size(), 0);
    for (const auto& e : boundary) on_boundary[e.a] = on_boundary[e.b] = 1;
  }

  double min_angle_degrees() const {
    double m = 180.0;
    for (const auto& T : triangles)
      for (int i = 0; i < 3; ++i) {
        const Vec2 u = vertices[T[(i + 1) % 3]] - vertices[T[i]];
        const Vec2 v = vertices[T[(i + 2) % 3]] - vertices[T[i]];
        m = std::min(m, std::atan2(std::abs(cross(u, v)), u.dot(v)) * 180.0 / kPi);
      }
    return m;
  }

  double total_area() const {
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += area(t);
    return a;
  }

  /// Interior vertex numbering: index into the interior unknowns or -1 for Dirichlet vertices.
  std::vector<int> interior_map() const {
    std::vector<int> map(vertices.size(), -1);
    int k = 0;
    for (std::size_t i = 0; i < vertices.size(); ++i)
      if (!on_boundary[i]) map[i] = k++;
    return map;
  }

  std::size_t num_interior() const {
    std::size_t k = 0;
    for (char b : on_boundary) k += b ? 0 : 1;
    return k;
  }

  /// Throws InvalidInput on non-positive areas, out-of-range indices or non-manifold edges.
  void check_conforming() const {
    std::map<std::pair<int, int>, int> edge_count;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      const auto& T = triangles[t];
      for (int i = 0; i < 3; ++i)
        if (T[i] < 0 || static_cast<std::size_t>(T[i]) >= vertices.size()) throw InvalidInput("mesh: bad vertex index");
      if (!(area(t) > 0.0)) throw InvalidInput("mesh: triangle " + std::to_string(t) + " has non-positive area");
      for (int i = 0; i < 3; ++i) {
        const int a = T[i], b = T[(i + 1) % 3];
        ++edge_count[{std::min(a, b), std::max(a, b)}];
      }
    }
    std::size_t boundary_edges = 0;
    for (const auto& [e, c] : edge_count) {
      if (c > 2) throw InvalidInput("mesh: edge shared by more than two triangles");
      if (c == 1) ++boundary_edges;
    }
    if (boundary_edges != boundary.size()) throw InvalidInput("mesh: boundary edge list does not match the triangulation");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    auto& v = j["vertices"] = nlohmann::json::array();
    for (const auto& p : vertices) v.push_back({p.x(), p.y()});
    j["triangles"] = triangles;
    auto& b = j["boundary"] = nlohmann::json::array();
    for (const auto& e : boundary) b.push_back({e.a, e.b, e.marker});
    j["h"] = h;
    j["target_h"] = target_h;
    j["domain"] = domain_name;
    return j;
  }

  static Mesh from_json(const nlohmann::json& j) {
    Mesh m;
    for (const auto& p : j.at("vertices")) {
      const auto xy = p.get<std::array<double, 2>>();
      m.vertices.emplace_back(xy[0], xy[1]);
    }
    m.triangles = j.at("triangles").get<std::vector<Triangle>>();
    for (const auto& e : j.at("boundary")) {
      const auto abm = e.get<std::vector<int>>();
      if (abm.size() < 2) throw InvalidInput("mesh: boundary entries need two vertex ids");
      m.boundary.push_back({abm[0], abm[1], abm.size() > 2 ? abm[2] : 0});
    }
    m.target_h = j.value("target_h", 0.0);
    m.domain_name = j.value("domain", std::string{});
    m.finalize();
    m.check_conforming();
    return m;
  }
};

inline void save_mesh(const Mesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write mesh file '" + path + "'");
  out << m.to_json().dump() << "\n";
}

inline Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open mesh file '" + path + "'");
  nlohmann::json j;
  in >> j;
  return Mesh::from_json(j);
}

/// Uniform bucket grid over triangle bounding boxes.
class TriangleIndex {
public:
  explicit TriangleIndex(const Mesh& mesh) : mesh_(&mesh) {
    lo_ = hi_ = mesh.vertices.empty() ? Vec2::Zero() : mesh.vertices[0];
    for (const auto& p : mesh.vertices) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    const double span = std::max(hi_.x() - lo_.x(), hi_.y() - lo_.y());
    const double cell = std::max(mesh.h, 1e-12 * std::max(1.0, span));
    nx_ = std::max(1, std::min(4096, static_cast<int>(std::ceil((hi_.x() - lo_.x()) / cell))));
    ny_ = std::max(1, std::min(4096, static_cast<int>(std::ceil((hi_.y() - lo_.y()) / cell))));
    cw_ = std::max((hi_.x() - lo_.x()) / nx_, 1e-300);
    ch_ = std::max((hi_.y() - lo_.y()) / ny_, 1e-300);
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      Vec2 a = mesh.vertices[mesh.triangles[t][0]], b = a;
      for (int i = 1; i < 3; ++i) {
        a = a.cwiseMin(mesh.vertices[mesh.triangles[t][i]]);
        b = b.cwiseMax(mesh.vertices[mesh.triangles[t][i]]);
      }
      const auto [i0, j0] = cell_of(a);
      const auto [i1, j1] = cell_of(b);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(t));
    }
  }

  /// Triangles whose bounding boxes may meet the box [a, b]; ascending, unique.
  std::vector<int> query(const Vec2& a, const Vec2& b) const {
    std::vector<int> out;
    if (b.x() < lo_.x() || b.y() < lo_.y() || a.x() > hi_.x() || a.y() > hi_.y()) return out;
    const auto [i0, j0] = cell_of(a);
    const auto [i1, j1] = cell_of(b);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const auto& c = cells_[static_cast<std::size_t>(j) * nx_ + i];
        out.insert(out.end(), c.begin(), c.end());
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Triangle containing p (barycentric tolerance tol), or -1.
  int locate(const Vec2& p, double tol = 1e-12) const {
    for (int t : query(p, p)) {
      const auto& T = mesh_->triangles[static_cast<std::size_t>(t)];
      const Vec2& a = mesh_->vertices[T[0]];
      const Vec2& b = mesh_->vertices[T[1]];
      const Vec2& c = mesh_->vertices[T[2]];
      const double A = orient(a, b, c);
      if (orient(a, b, p) >= -tol * A && orient(b, c, p) >= -tol * A && orient(c, a, p) >= -tol * A) return t;
    }
    return -1;
  }

  const Mesh& mesh() const { return *mesh_; }

private:
  std::pair<int, int> cell_of(const Vec2& p) const {
    const int i = std::clamp(static_cast<int>(std::floor((p.x() - lo_.x()) / cw_)), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y() - lo_.y()) / ch_)), 0, ny_ - 1);
    return {i, j};
  }

  const Mesh* mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  double cw_ = 1.0, ch_ = 1.0;
  std::vector<std::vector<int>> cells_;
};

}  // namespace nodal_atlas::fem
