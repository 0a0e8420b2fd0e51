#pragma once

#include "nodal_atlas/fem/assembly.hpp"
#include "nodal_atlas/fem/field.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

namespace nodal_atlas::fem {

struct EigenOptions {
  double tol = 1e-9;          // relative residual |K x - l M x| / (l |M x|)
  int max_iterations = 500;
  int dense_limit = 600;      // interior DOF count up to which a dense solve is used
  std::uint64_t seed = 1234;  // start block of the subspace iteration
};

struct EigenSolution {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> lambdas;
  std::vector<ScalarField> fields;
  std::vector<double> residuals;
  int iterations = 0;
  std::string method;
  nlohmann::json metadata;

  std::size_t size() const { return lambdas.size(); }
};

namespace detail {

struct RitzPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

inline RitzPairs dense_pairs(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolve failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Eigen::VectorXd relative_residuals(const SparseMatrix& K, const SparseMatrix& M, const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& lam, int count) {
  Eigen::VectorXd r(count);
  for (int i = 0; i < count; ++i) {
    const Eigen::VectorXd Mx = M * X.col(i);
    r[i] = (K * X.col(i) - lam[i] * Mx).norm() / (std::abs(lam[i]) * Mx.norm());
  }
  return r;
}

}  // namespace detail

/// Lowest `count` Dirichlet eigenpairs of -div(A grad). Fields are M-normalized (integral of
/// phi^2 equals 1), zero on Dirichlet vertices, and signed so the first interior value above
/// 1e-6 of the maximum is positive. Each lambda is the Rayleigh quotient of its returned field.
inline EigenSolution solve_eigs(std::shared_ptr<const Mesh> mesh, const CoefficientField& A, int count,
                                const EigenOptions& opt = {}) {
  if (!mesh) throw InvalidInput("solve_eigs: null mesh");
  if (count < 1) throw InvalidInput("solve_eigs: count must be >= 1");
  const auto ops = assemble(*mesh, A);
  const auto P = partition(*mesh, ops);
  const int n = static_cast<int>(P.interior_vertices.size());
  if (count > n)
    throw InvalidInput("solve_eigs: requested " + std::to_string(count) + " modes but only " + std::to_string(n) +
                       " interior degrees of freedom");

  EigenSolution sol;
  sol.mesh = mesh;
  Eigen::MatrixXd X;
  Eigen::VectorXd theta;
  Eigen::VectorXd res;

  if (n <= opt.dense_limit) {
    sol.method = "dense";
    auto rp = detail::dense_pairs(Eigen::MatrixXd(P.K_II), Eigen::MatrixXd(P.M_II));
    X = rp.vectors.leftCols(count);
    theta = rp.values.head(count);
    res = detail::relative_residuals(P.K_II, P.M_II, X, theta, count);
  } else {
    sol.method = "subspace";
    const int p = std::min(n, std::max(2 * count, count + 8));
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(P.K_II);
    if (ldlt.info() != Eigen::Success) throw SolverError("solve_eigs: stiffness factorization failed");
    std::mt19937_64 gen(opt.seed);
    X.resize(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) X(i, j) = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    bool converged = false;
    for (int it = 1; it <= opt.max_iterations; ++it) {
      const Eigen::MatrixXd MX = P.M_II * X;
      Eigen::MatrixXd Y(n, p);
      for (int j = 0; j < p; ++j) Y.col(j) = ldlt.solve(MX.col(j));
      const Eigen::MatrixXd KY = P.K_II * Y;
      const Eigen::MatrixXd MY = P.M_II * Y;
      Eigen::MatrixXd Kr = Y.transpose() * KY;
      Eigen::MatrixXd Mr = Y.transpose() * MY;
      Kr = 0.5 * (Kr + Kr.transpose()).eval();
      Mr = 0.5 * (Mr + Mr.transpose()).eval();
      const auto rp = detail::dense_pairs(Kr, Mr);
      X = Y * rp.vectors;
      theta = rp.values.head(count);
      res = detail::relative_residuals(P.K_II, P.M_II, X, rp.values, count);
      sol.iterations = it;
      if (res.maxCoeff() <= opt.tol) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw SolverError(fmt::format("solve_eigs: no convergence after {} iterations (max residual {:.3e}, worst mode {})",
                                    opt.max_iterations, res.maxCoeff(),
                                    static_cast<int>(std::max_element(res.data(), res.data() + res.size()) - res.data()) + 1));
    X.conservativeResize(n, count);
  }

  // normalize, fix signs, recompute lambda as the Rayleigh quotient
  std::vector<std::pair<double, int>> order;
  std::vector<Eigen::VectorXd> vecs(static_cast<std::size_t>(count));
  std::vector<double> rq(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd x = X.col(i);
    const double mn = std::sqrt(x.dot(P.M_II * x));
    x /= mn;
    const double big = x.cwiseAbs().maxCoeff();
    for (int k = 0; k < n; ++k)
      if (std::abs(x[k]) > 1e-6 * big) {
        if (x[k] < 0) x = -x;
        break;
      }
    rq[static_cast<std::size_t>(i)] = x.dot(P.K_II * x) / x.dot(P.M_II * x);
    vecs[static_cast<std::size_t>(i)] = std::move(x);
    order.emplace_back(rq[static_cast<std::size_t>(i)], i);
  }
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [lam, i] : order) {
    if (!(lam > 0.0)) throw SolverError("solve_eigs: non-positive eigenvalue " + std::to_string(lam));
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->num_vertices()));
    const auto& x = vecs[static_cast<std::size_t>(i)];
    for (int k = 0; k < n; ++k) full[P.interior_vertices[static_cast<std::size_t>(k)]] = x[k];
    sol.lambdas.push_back(lam);
    sol.residuals.push_back(res[i]);
    sol.fields.emplace_back(mesh, std::move(full), "mode " + std::to_string(sol.lambdas.size()));
  }

  sol.metadata = {{"domain", mesh->domain_name},
                  {"h", mesh->h},
                  {"target_h", mesh->target_h},
                  {"vertices", mesh->num_vertices()},
                  {"interior_dofs", n},
                  {"coefficients", A.to_json()},
                  {"solver", {{"method", sol.method}, {"tol", opt.tol}, {"max_iterations", opt.max_iterations},
                              {"iterations", sol.iterations}, {"seed", opt.seed}}}};
  return sol;
}

/// Writes <stem>.json (metadata + eigenvalues) and <stem>.csv (vertex, x, y, one column per mode).
inline nlohmann::json eigen_solution_json(const EigenSolution& sol) {
  nlohmann::json j;
  j["metadata"] = sol.metadata;
  j["lambdas"] = sol.lambdas;
  j["residuals"] = sol.residuals;
  j["normalization"] = "L2 (mass matrix) = 1";
  return j;
}

/// Nodal values, one column per mode.
inline std::string eigen_solution_csv(const EigenSolution& sol) {
  std::string csv = "vertex,x,y";
  for (std::size_t m = 0; m < sol.size(); ++m) csv += fmt::format(",mode_{}", m + 1);
  csv += "\n";
  const Mesh& mesh = *sol.mesh;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    csv += fmt::format("{},{:.17g},{:.17g}", v, mesh.vertices[v].x(), mesh.vertices[v].y());
    for (const auto& f : sol.fields) csv += fmt::format(",{:.17g}", f.values()[static_cast<Eigen::Index>(v)]);
    csv += "\n";
  }
  return csv;
}

inline void save_eigen_solution(const EigenSolution& sol, const std::filesystem::path& stem) {
  std::ofstream js(stem.string() + ".json");
  if (!js) throw InvalidInput("cannot write " + stem.string() + ".json");
  js << eigen_solution_json(sol).dump(2) << "\n";
  std::ofstream csv(stem.string() + ".csv");
  if (!csv) throw InvalidInput("cannot write " + stem.string() + ".csv");
  csv << eigen_solution_csv(sol);
}

}  // namespace nodal_atlas::fem
