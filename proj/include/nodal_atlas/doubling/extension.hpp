#pragma once

#include "nodal_atlas/doubling/profiles.hpp"

namespace nodal_atlas::doubling {

struct ExtensionOptions {
  int t_nodes = 64;
  QuadOptions quad;
};

struct ExtensionResult {
  Vec2 x0 = Vec2::Zero();
  double t0 = 0.0;
  double r = 0.0;
  double lambda = 0.0;
  double J = 0.0;             // J(r) in the cylinder
  double J2 = 0.0;            // J(2r)
  double N = 0.0;             // log(J2 / J)
  double truncation = 0.0;    // |N with t_nodes - N with t_nodes / 2|
  int t_nodes = 0;
};

namespace detail {

/// Cylinder J at radius rho: slices tau = rho sin(theta) of the 3D ball are disks of radius
/// rho cos(theta) in the x frame, weighted by (x.S^{-1}A S^{-1}x + tau^2) / (|x|^2 + tau^2) and e^{2(t0+tau) sqrt(lambda)}.
template <TriangleField F>
double cylinder_J(const F& phi, const CoefficientField& A, const TriangleIndex& index, const Frame& fr, double t0,
                  double lambda, double rho, int nodes, const QuadOptions& q) {
  const GaussRule g = gauss_legendre(nodes);
  const double k = std::sqrt(lambda);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double th = 0.5 * kPi * g.nodes[i];
    const double tau = rho * std::sin(th);
    const double slice = rho * std::cos(th);
    if (!(slice > 0.0)) continue;
    auto fn = [&](std::size_t t, const Vec2& y, const Vec2& xt) {
      const Vec2 w = fr.Sinv * xt;
      const double den = xt.squaredNorm() + tau * tau;
      const double mu = den > 0.0 ? (w.dot(A(y) * w) + tau * tau) / den : 1.0;
      const double v = phi.value_in(t, y);
      return mu * v * v;
    };
    const double I = fem::ball_integral(index, fr, slice, fn, q);
    sum += g.weights[i] * 0.5 * kPi * rho * std::cos(th) * std::exp(2.0 * (t0 + tau) * k) * I;
  }
  return sum;
}

}  // namespace detail

/// Doubling index of u(x, t) = e^{t sqrt(lambda)} phi(x) at (x0, t0) for the block coefficients diag(A, 1).
template <TriangleField F>
ExtensionResult extension_doubling(const F& phi, double lambda, const CoefficientField& A, const Vec2& x0, double t0,
                                   double r, const ExtensionOptions& opt = {}) {
  if (!(lambda > 0.0)) throw InvalidInput("extension_doubling: lambda must be positive");
  if (!(r > 0.0)) throw InvalidInput("extension_doubling: r must be positive");
  if (opt.t_nodes < 64 || opt.t_nodes % 2) throw InvalidInput("extension_doubling: need an even t_nodes >= 64");
  const TriangleIndex index(phi.mesh());
  const double tol = 1e-9 * std::max(1.0, r);
  if (index.locate(x0, tol) < 0) throw InvalidInput("extension_doubling: center lies off the mesh");
  const Frame fr = frame_at(A, x0);

  ExtensionResult res;
  res.x0 = x0;
  res.t0 = t0;
  res.r = r;
  res.lambda = lambda;
  res.t_nodes = opt.t_nodes;
  double J[2][2];
  for (int level = 0; level < 2; ++level) {
    const int n = level == 0 ? opt.t_nodes : opt.t_nodes / 2;
    J[level][0] = detail::cylinder_J(phi, A, index, fr, t0, lambda, r, n, opt.quad);
    J[level][1] = detail::cylinder_J(phi, A, index, fr, t0, lambda, 2.0 * r, n, opt.quad);
  }
  res.J = J[0][0];
  res.J2 = J[0][1];
  if (!(res.J > 0.0) || !(res.J2 > 0.0)) throw InvalidInput("extension_doubling: phi vanishes on the ball");
  res.N = std::log(res.J2 / res.J);
  const double coarse = J[1][0] > 0.0 && J[1][1] > 0.0 ? std::log(J[1][1] / J[1][0]) : std::nan("");
  res.truncation = std::abs(res.N - coarse);
  return res;
}

/// Seven-point Laplacian of e^{t sqrt(lambda)} f(x) at (x, t) with step h, relative to the field size.
template <class Fn>
double extension_laplacian_residual(const Fn& f, double lambda, const Vec2& x, double t, double h) {
  const double k = std::sqrt(lambda);
  auto u = [&](const Vec2& p, double s) { return std::exp(s * k) * f(p); };
  const double c = u(x, t);
  const double lap = (u(x + Vec2(h, 0), t) + u(x - Vec2(h, 0), t) + u(x + Vec2(0, h), t) + u(x - Vec2(0, h), t) +
                      u(x, t + h) + u(x, t - h) - 6.0 * c) / (h * h);
  return std::abs(lap) / std::max(std::abs(c) * lambda, 1e-300);
}

}  // namespace nodal_atlas::doubling
