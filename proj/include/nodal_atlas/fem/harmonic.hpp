#pragma once

#include "nodal_atlas/fem/assembly.hpp"
#include "nodal_atlas/fem/field.hpp"

#include <Eigen/SparseCholesky>

namespace nodal_atlas::fem {

/// Discrete A-harmonic extension of boundary data g (one entry per vertex; interior entries ignored).
inline ScalarField solve_aharmonic(std::shared_ptr<const Mesh> mesh, const CoefficientField& A,
                                   const Eigen::VectorXd& g) {
  if (!mesh) throw InvalidInput("solve_aharmonic: null mesh");
  if (static_cast<std::size_t>(g.size()) != mesh->num_vertices())
    throw InvalidInput("solve_aharmonic: boundary data must have one entry per vertex");
  for (std::size_t v = 0; v < mesh->num_vertices(); ++v)
    if (mesh->on_boundary[v] && !std::isfinite(g[static_cast<Eigen::Index>(v)]))
      throw InvalidInput("solve_aharmonic: non-finite data at boundary vertex " + std::to_string(v));
  if (mesh->num_interior() == 0) throw InvalidInput("solve_aharmonic: mesh has no interior vertices");

  const auto ops = assemble(*mesh, A);
  const auto P = partition(*mesh, ops);
  Eigen::VectorXd gB(static_cast<Eigen::Index>(P.boundary_vertices.size()));
  for (std::size_t i = 0; i < P.boundary_vertices.size(); ++i) gB[static_cast<Eigen::Index>(i)] = g[P.boundary_vertices[i]];
  const Eigen::VectorXd rhs = -(P.K_IB * gB);

  Eigen::SimplicialLDLT<SparseMatrix> solver(P.K_II);
  if (solver.info() != Eigen::Success) throw SolverError("solve_aharmonic: factorization failed");
  const Eigen::VectorXd uI = solver.solve(rhs);
  const double scale = std::max({rhs.norm(), (P.K_II * uI).norm(), 1e-300});
  const double res = (P.K_II * uI - rhs).norm() / scale;
  if (!(res <= 1e-10)) throw SolverError("solve_aharmonic: relative residual " + std::to_string(res));

  Eigen::VectorXd u = Eigen::VectorXd::Zero(g.size());
  for (std::size_t i = 0; i < P.interior_vertices.size(); ++i) u[P.interior_vertices[i]] = uI[static_cast<Eigen::Index>(i)];
  for (std::size_t i = 0; i < P.boundary_vertices.size(); ++i) u[P.boundary_vertices[i]] = gB[static_cast<Eigen::Index>(i)];
  return ScalarField(std::move(mesh), std::move(u), "A-harmonic");
}

/// Boundary data sampled from a function of position.
template <class F>
ScalarField solve_aharmonic_from(std::shared_ptr<const Mesh> mesh, const CoefficientField& A, F&& g) {
  Eigen::VectorXd data = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->num_vertices()));
  for (std::size_t v = 0; v < mesh->num_vertices(); ++v)
    if (mesh->on_boundary[v]) data[static_cast<Eigen::Index>(v)] = g(mesh->vertices[v]);
  return solve_aharmonic(std::move(mesh), A, data);
}

}  // namespace nodal_atlas::fem
