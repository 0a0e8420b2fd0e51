#pragma once

#include "nodal_atlas/core.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace nodal_atlas::geometry {

/// A one-dimensional boundary profile x_d = phi(s) on [lo, hi].
///
/// Two exact representations are supported: a piecewise quadratic (which covers
/// affine, polygonal, parabolic and the truncated pathological profiles) and the
/// closed form scale * (cosh(s) - 1). Derivatives are one-sided so that support
/// slopes at kinks are available without differencing.
class GraphFunction {
public:
  enum class Kind { piecewise, cosh };

  static GraphFunction piecewise(std::vector<double> breaks,
                                 std::vector<std::array<double, 3>> coeffs, std::string label = {}) {
    if (breaks.size() < 2 || coeffs.size() + 1 != breaks.size())
      throw InvalidInput("GraphFunction: need n+1 breaks for n pieces");
    for (std::size_t i = 1; i < breaks.size(); ++i)
      if (!(breaks[i] > breaks[i - 1])) throw InvalidInput("GraphFunction: breaks must increase");
    GraphFunction g;
    g.kind_ = Kind::piecewise;
    g.breaks_ = std::move(breaks);
    g.coeffs_ = std::move(coeffs);
    g.label_ = std::move(label);
    return g;
  }

  static GraphFunction cosh_profile(double scale, double half_width, std::string label = "cosh") {
    GraphFunction g;
    g.kind_ = Kind::cosh;
    g.scale_ = scale;
    g.breaks_ = {-half_width, half_width};
    g.label_ = std::move(label);
    return g;
  }

  /// Single quadratic a0 + a1 s + a2 s^2 on [lo, hi].
  static GraphFunction quadratic(double lo, double hi, double a0, double a1, double a2,
                                 std::string label = "quadratic") {
    return piecewise({lo, hi}, {{a0 + lo * (a1 + a2 * lo), a1 + 2.0 * a2 * lo, a2}}, std::move(label));
  }

  /// Continuous piecewise-linear interpolant through (xs[i], ys[i]).
  static GraphFunction polygonal(const std::vector<double>& xs, const std::vector<double>& ys,
                                 std::string label = "polygonal") {
    if (xs.size() != ys.size() || xs.size() < 2) throw InvalidInput("polygonal: bad samples");
    std::vector<std::array<double, 3>> c;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      c.push_back({ys[i], (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]), 0.0});
    return piecewise(xs, std::move(c), std::move(label));
  }

  /// psi(s) = phi(s + x) - phi(x), re-centred so that psi(0) = 0.
  GraphFunction recentred(double x) const {
    if (kind_ == Kind::cosh) {
      if (x != 0.0) throw InvalidInput("GraphFunction: cosh profiles cannot be re-centred");
      return *this;
    }
    const double v = value(x);
    std::vector<double> b = breaks_;
    for (double& t : b) t -= x;
    std::vector<std::array<double, 3>> c = coeffs_;
    for (auto& ci : c) ci[0] -= v;
    return piecewise(std::move(b), std::move(c), label_);
  }

  Kind kind() const { return kind_; }
  double lo() const { return breaks_.front(); }
  double hi() const { return breaks_.back(); }
  const std::string& label() const { return label_; }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<std::array<double, 3>>& coeffs() const { return coeffs_; }
  double scale() const { return scale_; }

  double value(double s) const {
    if (kind_ == Kind::cosh) return scale_ * (std::cosh(s) - 1.0);
    const std::size_t i = piece(s, false);
    const double t = s - breaks_[i];
    const auto& c = coeffs_[i];
    return c[0] + t * (c[1] + t * c[2]);
  }

  /// Left derivative (right derivative at the left end of the interval).
  double derivative_left(double s) const {
    if (kind_ == Kind::cosh) return scale_ * std::sinh(s);
    const std::size_t i = piece(s, true);
    const double t = s - breaks_[i];
    return coeffs_[i][1] + 2.0 * coeffs_[i][2] * t;
  }

  double derivative_right(double s) const {
    if (kind_ == Kind::cosh) return scale_ * std::sinh(s);
    const std::size_t i = piece(s, false);
    const double t = s - breaks_[i];
    return coeffs_[i][1] + 2.0 * coeffs_[i][2] * t;
  }

  /// Exact sup |phi'| over the interval.
  double lipschitz() const {
    if (kind_ == Kind::cosh) return std::abs(scale_) * std::max(std::abs(std::sinh(lo())), std::abs(std::sinh(hi())));
    double l = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const double w = breaks_[i + 1] - breaks_[i];
      l = std::max({l, std::abs(coeffs_[i][1]), std::abs(coeffs_[i][1] + 2.0 * coeffs_[i][2] * w)});
    }
    return l;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["label"] = label_;
    if (kind_ == Kind::cosh) {
      j["type"] = "cosh";
      j["scale"] = scale_;
      j["half_width"] = hi();
    } else {
      j["type"] = "piecewise";
      j["breaks"] = breaks_;
      j["coeffs"] = coeffs_;
    }
    return j;
  }

  static GraphFunction from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    const std::string label = j.value("label", std::string{});
    if (type == "cosh")
      return cosh_profile(j.at("scale").get<double>(), j.at("half_width").get<double>(), label);
    if (type == "piecewise")
      return piecewise(j.at("breaks").get<std::vector<double>>(),
                       j.at("coeffs").get<std::vector<std::array<double, 3>>>(), label);
    throw InvalidInput("GraphFunction: unknown type '" + type + "'");
  }

private:
  // Piece containing s; at a break, left_side selects the piece to the left.
  std::size_t piece(double s, bool left_side) const {
    const std::size_t n = coeffs_.size();
    if (s <= breaks_.front()) return 0;
    if (s >= breaks_.back()) return n - 1;
    auto it = left_side ? std::lower_bound(breaks_.begin(), breaks_.end(), s)
                        : std::upper_bound(breaks_.begin(), breaks_.end(), s);
    const auto idx = static_cast<std::size_t>(it - breaks_.begin());
    return std::min(n - 1, idx == 0 ? 0 : idx - 1);
  }

  Kind kind_ = Kind::piecewise;
  std::vector<double> breaks_;
  std::vector<std::array<double, 3>> coeffs_;
  double scale_ = 0.0;
  std::string label_;
};

/// Local graph description of a boundary piece: world = anchor + R(angle) (s, phi(s)),
/// with the domain lying on the side x_d > phi(s). phi(0) = 0 places the anchor on the graph.
struct GraphPatch {
  Vec2 anchor = Vec2::Zero();
  double angle = 0.0;
  GraphFunction phi;

  double half_width() const { return std::min(-phi.lo(), phi.hi()); }
  Mat2 frame() const { return rotation(angle); }
  Vec2 to_world(double s, double xd) const { return anchor + frame() * Vec2(s, xd); }
  Vec2 to_local(const Vec2& p) const { return frame().transpose() * (p - anchor); }
  Vec2 point(double s) const { return to_world(s, phi.value(s)); }

  nlohmann::json to_json() const {
    return {{"anchor", {anchor.x(), anchor.y()}}, {"angle", angle}, {"phi", phi.to_json()}};
  }
  static GraphPatch from_json(const nlohmann::json& j) {
    GraphPatch p;
    const auto a = j.at("anchor").get<std::array<double, 2>>();
    p.anchor = Vec2(a[0], a[1]);
    p.angle = j.value("angle", 0.0);
    p.phi = GraphFunction::from_json(j.at("phi"));
    if (std::abs(p.phi.value(0.0)) > 1e-12) throw InvalidInput("GraphPatch: phi(0) must vanish");
    return p;
  }
};

}  // namespace nodal_atlas::geometry
