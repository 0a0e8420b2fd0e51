#pragma once

#include "nodal_atlas/fem/coefficients.hpp"
#include "nodal_atlas/fem/mesh.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace nodal_atlas::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Operators {
  SparseMatrix K;  // stiffness of -div(A grad)
  SparseMatrix M;  // consistent mass
};

/// Linear-element stiffness of one triangle with a constant matrix A.
inline Eigen::Matrix3d element_stiffness(const Vec2& a, const Vec2& b, const Vec2& c, const Mat2& A) {
  const double A2 = orient(a, b, c);
  if (!(A2 > 0.0)) throw InvalidInput("element_stiffness: triangle must be positively oriented");
  Eigen::Matrix<double, 2, 3> G;
  G.col(0) = Vec2(b.y() - c.y(), c.x() - b.x()) / A2;
  G.col(1) = Vec2(c.y() - a.y(), a.x() - c.x()) / A2;
  G.col(2) = Vec2(a.y() - b.y(), b.x() - a.x()) / A2;
  return 0.5 * A2 * G.transpose() * A * G;
}

inline Eigen::Matrix3d element_mass(const Vec2& a, const Vec2& b, const Vec2& c) {
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return (0.5 * orient(a, b, c) / 12.0) * m;
}

/// Global K and M over all vertices. A is sampled once per triangle, at the centroid.
inline Operators assemble(const Mesh& mesh, const CoefficientField& A) {
  const std::size_t nt = mesh.num_triangles();
  std::vector<Eigen::Matrix3d> ke(nt), me(nt);
  // element matrices in parallel, scattered serially below so sums are order-fixed
  std::vector<std::string> errors(nt);
  parallel_for(nt, [&](std::size_t t) {
    const auto& T = mesh.triangles[t];
    const Vec2& a = mesh.vertices[T[0]];
    const Vec2& b = mesh.vertices[T[1]];
    const Vec2& c = mesh.vertices[T[2]];
    try {
      ke[t] = element_stiffness(a, b, c, A.checked(mesh.centroid(t)));
    } catch (const InvalidInput& e) {
      errors[t] = e.what();
      return;
    }
    me[t] = element_mass(a, b, c);
  });
  for (const auto& e : errors)
    if (!e.empty()) throw InvalidInput("assemble: " + e);

  std::vector<Eigen::Triplet<double>> tk, tm;
  tk.reserve(9 * nt);
  tm.reserve(9 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& T = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        tk.emplace_back(T[i], T[j], ke[t](i, j));
        tm.emplace_back(T[i], T[j], me[t](i, j));
      }
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  Operators ops;
  ops.K.resize(n, n);
  ops.M.resize(n, n);
  ops.K.setFromTriplets(tk.begin(), tk.end());
  ops.M.setFromTriplets(tm.begin(), tm.end());
  return ops;
}

/// Rows/columns of a global matrix restricted to the index sets given by map (-1 = dropped).
inline SparseMatrix restrict_matrix(const SparseMatrix& G, const std::vector<int>& row_map, int rows,
                                    const std::vector<int>& col_map, int cols) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < G.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(G, k); it; ++it) {
      const int r = row_map[static_cast<std::size_t>(it.row())];
      const int c = col_map[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  SparseMatrix out(rows, cols);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

/// Interior/boundary partition of the assembled operators.
struct Partition {
  std::vector<int> interior;  // vertex -> interior index or -1
  std::vector<int> boundary;  // vertex -> boundary index or -1
  std::vector<int> interior_vertices;
  std::vector<int> boundary_vertices;
  SparseMatrix K_II, K_IB, M_II;
};

inline Partition partition(const Mesh& mesh, const Operators& ops) {
  Partition p;
  p.interior.assign(mesh.num_vertices(), -1);
  p.boundary.assign(mesh.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.on_boundary[v]) {
      p.boundary[v] = static_cast<int>(p.boundary_vertices.size());
      p.boundary_vertices.push_back(static_cast<int>(v));
    } else {
      p.interior[v] = static_cast<int>(p.interior_vertices.size());
      p.interior_vertices.push_back(static_cast<int>(v));
    }
  }
  const int ni = static_cast<int>(p.interior_vertices.size());
  const int nb = static_cast<int>(p.boundary_vertices.size());
  p.K_II = restrict_matrix(ops.K, p.interior, ni, p.interior, ni);
  p.K_IB = restrict_matrix(ops.K, p.interior, ni, p.boundary, nb);
  p.M_II = restrict_matrix(ops.M, p.interior, ni, p.interior, ni);
  return p;
}

}  // namespace nodal_atlas::fem
