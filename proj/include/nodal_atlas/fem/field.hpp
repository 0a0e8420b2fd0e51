#pragma once

#include "nodal_atlas/fem/mesh.hpp"

#include <complex>
#include <concepts>
#include <functional>
#include <memory>
#include <string>

namespace nodal_atlas::fem {

/// Anything that evaluates a scalar and its gradient at a point known to lie in triangle t.
template <class F>
concept TriangleField = requires(const F& f, std::size_t t, const Vec2& p) {
  { f.value_in(t, p) } -> std::convertible_to<double>;
  { f.gradient_in(t, p) } -> std::convertible_to<Vec2>;
  { f.mesh() } -> std::convertible_to<const Mesh&>;
};

/// Piecewise-linear field: one value per mesh vertex.
class ScalarField {
public:
  ScalarField() = default;
  ScalarField(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values, std::string label = {})
      : mesh_(std::move(mesh)), values_(std::move(values)), label_(std::move(label)) {
    if (!mesh_) throw InvalidInput("ScalarField: null mesh");
    if (static_cast<std::size_t>(values_.size()) != mesh_->num_vertices())
      throw InvalidInput("ScalarField: need one value per vertex");
  }

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  const std::string& label() const { return label_; }
  void set_label(std::string s) { label_ = std::move(s); }

  double value_in(std::size_t t, const Vec2& p) const {
    const auto& T = mesh_->triangles[t];
    const Vec2& a = mesh_->vertices[static_cast<std::size_t>(T[0])];
    const Vec2& b = mesh_->vertices[static_cast<std::size_t>(T[1])];
    const Vec2& c = mesh_->vertices[static_cast<std::size_t>(T[2])];
    const double A = orient(a, b, c);
    const double l1 = orient(a, p, c) / A;
    const double l2 = orient(a, b, p) / A;
    return values_[T[0]] + l1 * (values_[T[1]] - values_[T[0]]) + l2 * (values_[T[2]] - values_[T[0]]);
  }

  Vec2 gradient_in(std::size_t t, const Vec2& = Vec2::Zero()) const {
    const auto& T = mesh_->triangles[t];
    const Vec2& a = mesh_->vertices[static_cast<std::size_t>(T[0])];
    const Vec2& b = mesh_->vertices[static_cast<std::size_t>(T[1])];
    const Vec2& c = mesh_->vertices[static_cast<std::size_t>(T[2])];
    const double A2 = orient(a, b, c);
    const double u0 = values_[T[0]], u1 = values_[T[1]], u2 = values_[T[2]];
    // grad of barycentric lambda_i is perp(opposite edge) / (2 area)
    const Vec2 g = (u0 * Vec2(b.y() - c.y(), c.x() - b.x()) + u1 * Vec2(c.y() - a.y(), a.x() - c.x()) +
                    u2 * Vec2(a.y() - b.y(), b.x() - a.x())) /
                   A2;
    return g;
  }

  double max_abs() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

private:
  std::shared_ptr<const Mesh> mesh_;
  Eigen::VectorXd values_;
  std::string label_;
};

/// Closed-form field sampled pointwise; the mesh only fixes the integration domain.
class AnalyticField {
public:
  using Value = std::function<double(const Vec2&)>;
  using Gradient = std::function<Vec2(const Vec2&)>;

  AnalyticField(std::shared_ptr<const Mesh> mesh, Value f, Gradient g, std::string label = {})
      : mesh_(std::move(mesh)), f_(std::move(f)), g_(std::move(g)), label_(std::move(label)) {
    if (!mesh_) throw InvalidInput("AnalyticField: null mesh");
  }

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const std::string& label() const { return label_; }
  double value_in(std::size_t, const Vec2& p) const { return f_(p); }
  Vec2 gradient_in(std::size_t, const Vec2& p) const { return g_(p); }
  double operator()(const Vec2& p) const { return f_(p); }

  /// P1 interpolant on the same mesh.
  ScalarField interpolate() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(mesh_->num_vertices()));
    for (std::size_t i = 0; i < mesh_->num_vertices(); ++i) v[static_cast<Eigen::Index>(i)] = f_(mesh_->vertices[i]);
    return ScalarField(mesh_, std::move(v), label_);
  }

private:
  std::shared_ptr<const Mesh> mesh_;
  Value f_;
  Gradient g_;
  std::string label_;
};

/// Homogeneous harmonic polynomials Re z^n and Im z^n (about `center`) with exact gradients.
inline AnalyticField harmonic_power(std::shared_ptr<const Mesh> mesh, int n, bool imaginary,
                                    const Vec2& center = Vec2::Zero()) {
  if (n < 1) throw InvalidInput("harmonic_power: n must be >= 1");
  auto zpow = [](double x, double y, int k) {
    std::complex<double> z(x, y), w(1.0, 0.0);
    for (int i = 0; i < k; ++i) w *= z;
    return w;
  };
  auto f = [=](const Vec2& p) {
    const auto w = zpow(p.x() - center.x(), p.y() - center.y(), n);
    return imaginary ? w.imag() : w.real();
  };
  // d/dx Re z^n = Re(n z^{n-1}), d/dy Re z^n = -Im(n z^{n-1}); d/dx Im = Im(.), d/dy Im = Re(.)
  auto g = [=](const Vec2& p) {
    const auto w = static_cast<double>(n) * zpow(p.x() - center.x(), p.y() - center.y(), n - 1);
    return imaginary ? Vec2(w.imag(), w.real()) : Vec2(w.real(), -w.imag());
  };
  return AnalyticField(std::move(mesh), f, g, std::string(imaginary ? "Im" : "Re") + " z^" + std::to_string(n));
}

}  // namespace nodal_atlas::fem
