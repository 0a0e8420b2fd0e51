#pragma once

#include "nodal_atlas/fem/assembly.hpp"
#include "nodal_atlas/fem/harmonic.hpp"
#include "nodal_atlas/geometry/domain.hpp"
#include "nodal_atlas/nodal/scaling.hpp"

#include <Eigen/Eigenvalues>

namespace nodal_atlas::experiments {

struct CauchyOptions {
  std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  int basis_degree = 10;        // harmonic polynomials 1, Re z^n, Im z^n for n <= degree
  double ball = 1.0;            // Gamma_1 = patch points within this distance of the anchor
  double inner = 0.5;           // sup measured over B_inner(anchor) cap Omega
  double null_tol = 1e-13;      // relative eigenvalue threshold for the eps = 0 rung
};

struct CauchyResult {
  std::vector<double> eps;
  std::vector<double> sup_l2;       // sqrt of the largest admissible interior L2 mass
  std::vector<double> sup_pointwise;
  double sup_zero = 0.0;            // eps = 0 rung
  std::size_t null_dim = 0;
  double tau = 0.0, C = 0.0, residual = 0.0;
  bool monotone = true;
  std::size_t gamma1_vertices = 0, inner_vertices = 0, basis_size = 0;
};

/// Quantitative Cauchy smallness, discrete analogue. Over the span of A-harmonic extensions of
/// harmonic polynomials (in the patch frame), maximise the interior L2 mass subject to
/// |trace|_{L2(boundary)}^2 + eps^{-2} (|u|^2 + |flux|^2)_{L2(Gamma_1)} <= 1.
inline CauchyResult cauchy_smallness(std::shared_ptr<const fem::Mesh> mesh, const geometry::PlanarDomain& domain,
                                     const fem::CoefficientField& A, const CauchyOptions& opt = {}) {
  if (opt.eps.size() < 5) throw InvalidInput("cauchy: need at least 5 eps rungs");
  for (std::size_t i = 1; i < opt.eps.size(); ++i)
    if (!(opt.eps[i] < opt.eps[i - 1]) || std::abs(opt.eps[i] / opt.eps[i - 1] - opt.eps[1] / opt.eps[0]) > 1e-9)
      throw InvalidInput("cauchy: eps ladder must be geometric and decreasing");
  if (domain.patches.empty()) throw InvalidInput("cauchy: domain has no graph patch");
  const auto& patch = domain.patches[0];
  if (patch.half_width() < opt.ball * (1.0 - 1e-9)) throw InvalidInput("cauchy: boundary ball leaves the patch");
  const fem::Mesh& m = *mesh;
  const std::size_t nv = m.num_vertices();

  // boundary weights (half the adjacent edge lengths); Gamma_1 membership
  Eigen::VectorXd wb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
  Eigen::VectorXd w1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
  auto on_gamma1 = [&](const Vec2& p) {
    const Vec2 q = patch.to_local(p);
    return (p - patch.anchor).norm() <= opt.ball * (1.0 + 1e-9) && std::abs(q.x()) <= patch.phi.hi() &&
           std::abs(q.y() - patch.phi.value(std::clamp(q.x(), patch.phi.lo(), patch.phi.hi()))) <= 1e-9;
  };
  for (const auto& e : m.boundary) {
    const Vec2 a = m.vertices[static_cast<std::size_t>(e.a)], b = m.vertices[static_cast<std::size_t>(e.b)];
    const double len = (b - a).norm();
    wb[e.a] += 0.5 * len;
    wb[e.b] += 0.5 * len;
    if (on_gamma1(a) && on_gamma1(b)) {
      w1[e.a] += 0.5 * len;
      w1[e.b] += 0.5 * len;
    }
  }
  const auto ops = fem::assemble(m, A);
  Eigen::VectorXd lumped = ops.M * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(nv));

  CauchyResult res;
  res.eps = opt.eps;
  std::vector<std::size_t> inner;
  for (std::size_t i = 0; i < nv; ++i) {
    if (w1[static_cast<Eigen::Index>(i)] > 0.0) ++res.gamma1_vertices;
    if (!m.on_boundary[i] && (m.vertices[i] - patch.anchor).norm() <= opt.inner) inner.push_back(i);
  }
  res.inner_vertices = inner.size();
  if (res.gamma1_vertices < 3 || inner.empty()) throw InvalidInput("cauchy: mesh too coarse for the boundary ball");

  // basis: A-harmonic extensions of harmonic polynomial traces
  std::vector<Eigen::VectorXd> U;
  auto add = [&](int n, bool im) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(nv));
    for (std::size_t i = 0; i < nv; ++i) {
      const Vec2 q = patch.to_local(m.vertices[i]);
      const std::complex<double> w = std::pow(std::complex<double>(q.x(), q.y()), n);
      g[static_cast<Eigen::Index>(i)] = im ? w.imag() : w.real();
    }
    U.push_back(fem::solve_aharmonic(mesh, A, g).values());
  };
  add(0, false);
  for (int n = 1; n <= opt.basis_degree; ++n) {
    add(n, false);
    add(n, true);
  }
  const Eigen::Index nb = static_cast<Eigen::Index>(U.size());
  res.basis_size = U.size();
  Eigen::MatrixXd Ub(static_cast<Eigen::Index>(nv), nb);
  for (Eigen::Index k = 0; k < nb; ++k) Ub.col(k) = U[static_cast<std::size_t>(k)];
  const Eigen::MatrixXd F = ops.K * Ub;  // discrete conormal flux at boundary vertices

  Eigen::MatrixXd Gu = Eigen::MatrixXd::Zero(nb, nb), Gc = Gu, Gi = Gu;
  for (std::size_t i = 0; i < nv; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (wb[ii] > 0.0) Gu += wb[ii] * Ub.row(ii).transpose() * Ub.row(ii);
    if (w1[ii] > 0.0) {
      const Eigen::RowVectorXd f = F.row(ii) / w1[ii];
      Gc += w1[ii] * (Ub.row(ii).transpose() * Ub.row(ii) + f.transpose() * f);
    }
  }
  for (std::size_t i : inner) {
    const auto ii = static_cast<Eigen::Index>(i);
    Gi += lumped[ii] * Ub.row(ii).transpose() * Ub.row(ii);
  }
  Gu = 0.5 * (Gu + Gu.transpose()).eval();
  Gc = 0.5 * (Gc + Gc.transpose()).eval();
  Gi = 0.5 * (Gi + Gi.transpose()).eval();

  auto sup_at = [&](const Eigen::MatrixXd& B, double& pointwise) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Gi, B);
    if (es.info() != Eigen::Success) throw SolverError("cauchy: generalized eigenproblem failed");
    const Eigen::VectorXd c = es.eigenvectors().col(nb - 1);  // B-normalised
    const Eigen::VectorXd u = Ub * c;
    pointwise = 0.0;
    for (std::size_t i : inner) pointwise = std::max(pointwise, std::abs(u[static_cast<Eigen::Index>(i)]));
    return std::sqrt(std::max(0.0, es.eigenvalues()(nb - 1)));
  };
  for (double e : opt.eps) {
    double pw = 0.0;
    res.sup_l2.push_back(sup_at(Gu + Gc / (e * e), pw));
    res.sup_pointwise.push_back(pw);
  }
  for (std::size_t i = 1; i < res.sup_l2.size(); ++i)
    if (res.sup_l2[i] > res.sup_l2[i - 1] * (1.0 + 1e-12)) res.monotone = false;

  // eps = 0: restrict to the numerical null space of Gc
  {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Gc, Gu);
    const double top = es.eigenvalues().maxCoeff();
    std::vector<Eigen::Index> null;
    for (Eigen::Index k = 0; k < nb; ++k)
      if (es.eigenvalues()(k) <= opt.null_tol * top) null.push_back(k);
    res.null_dim = null.size();
    if (!null.empty()) {
      Eigen::MatrixXd Z(nb, static_cast<Eigen::Index>(null.size()));
      for (std::size_t k = 0; k < null.size(); ++k) Z.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(null[k]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ez(Z.transpose() * Gi * Z);  // Z is Gu-orthonormal
      res.sup_zero = std::sqrt(std::max(0.0, ez.eigenvalues().maxCoeff()));
    }
  }

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < res.eps.size(); ++i)
    if (res.sup_l2[i] > 0.0) pts.emplace_back(res.eps[i], res.sup_l2[i]);
  const auto fit = nodal::scaling_fit(pts);
  res.tau = fit.alpha;
  res.C = fit.C;
  res.residual = fit.residual;
  return res;
}

}  // namespace nodal_atlas::experiments
