#pragma once

#include "nodal_atlas/core.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace nodal_atlas::fem {

/// Symmetric matrix field A(x) with ellipticity bound Lambda and Lipschitz bound gamma.
///
/// Presets:
///   identity        A = I
///   constant-SPD    A = [[a, b], [b, c]]
///   linear-shear    A = I + gamma [[dx, dy], [dy, -dx]],                 d = x - center
///   sine-shear      A = I + gamma [[sin dx, sin dy], [sin dy, -sin dx]]
/// The shear presets have eigenvalues 1 +- gamma |d| at most, operator-norm Lipschitz
/// constant gamma, and Lambda = 1 / (1 - gamma R) for R >= sup |d| over the domain.
class CoefficientField {
public:
  enum class Kind { identity, constant, linear_shear, sine_shear };

  static CoefficientField identity() { return CoefficientField{}; }

  static CoefficientField constant(const Mat2& A) {
    if (std::abs(A(0, 1) - A(1, 0)) > 1e-14 * A.norm()) throw InvalidInput("constant-SPD: matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat2> es(A);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
    if (!(lo > 0.0)) throw InvalidInput("constant-SPD: matrix must be positive definite");
    CoefficientField f;
    f.kind_ = Kind::constant;
    f.A0_ = A;
    f.Lambda_ = std::max({1.0, hi, 1.0 / lo});
    f.gamma_ = 0.0;
    return f;
  }

  static CoefficientField shear(Kind kind, double gamma, const Vec2& center, double radius) {
    if (kind != Kind::linear_shear && kind != Kind::sine_shear) throw InvalidInput("shear: bad kind");
    if (gamma < 0.0) throw InvalidInput("shear: gamma must be >= 0");
    if (!(radius > 0.0) || gamma * radius >= 1.0)
      throw InvalidInput("shear: need gamma * radius < 1 for ellipticity (gamma = " + std::to_string(gamma) +
                         ", radius = " + std::to_string(radius) + ")");
    CoefficientField f;
    f.kind_ = kind;
    f.gamma_ = gamma;
    f.center_ = center;
    f.radius_ = radius;
    f.Lambda_ = 1.0 / (1.0 - gamma * radius);
    return f;
  }

  Kind kind() const { return kind_; }
  double Lambda() const { return Lambda_; }
  double gamma() const { return gamma_; }
  bool is_constant() const { return kind_ == Kind::identity || kind_ == Kind::constant || gamma_ == 0.0; }

  Mat2 operator()(const Vec2& x) const {
    switch (kind_) {
      case Kind::identity: return Mat2::Identity();
      case Kind::constant: return A0_;
      case Kind::linear_shear: {
        const Vec2 d = x - center_;
        Mat2 A;
        A << 1.0 + gamma_ * d.x(), gamma_ * d.y(), gamma_ * d.y(), 1.0 - gamma_ * d.x();
        return A;
      }
      case Kind::sine_shear: {
        const Vec2 d = x - center_;
        const double a = std::sin(d.x()), b = std::sin(d.y());
        Mat2 A;
        A << 1.0 + gamma_ * a, gamma_ * b, gamma_ * b, 1.0 - gamma_ * a;
        return A;
      }
    }
    return Mat2::Identity();
  }

  /// A(x) after checking symmetry, positive definiteness and the Lambda bounds.
  Mat2 checked(const Vec2& x) const {
    const Mat2 A = (*this)(x);
    const auto where = "(" + std::to_string(x.x()) + ", " + std::to_string(x.y()) + ")";
    if (!A.allFinite() || std::abs(A(0, 1) - A(1, 0)) > 1e-12 * (1.0 + A.norm()))
      throw InvalidInput("coefficient field not symmetric at " + where);
    Eigen::SelfAdjointEigenSolver<Mat2> es(A);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
    if (!(lo > 0.0)) throw InvalidInput("coefficient field not positive definite at " + where);
    const double tol = 1e-12 * Lambda_;
    if (lo < 1.0 / Lambda_ - tol || hi > Lambda_ + tol)
      throw InvalidInput("coefficient field leaves [1/Lambda, Lambda] at " + where);
    return A;
  }

  std::string preset_name() const {
    switch (kind_) {
      case Kind::identity: return "identity";
      case Kind::constant: return "constant-SPD";
      case Kind::linear_shear: return "linear-shear";
      default: return "sine-shear";
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"preset", preset_name()}, {"Lambda", Lambda_}, {"gamma", gamma_}};
    if (kind_ == Kind::constant) j["matrix"] = {A0_(0, 0), A0_(0, 1), A0_(1, 1)};
    if (kind_ == Kind::linear_shear || kind_ == Kind::sine_shear) {
      j["center"] = {center_.x(), center_.y()};
      j["radius"] = radius_;
    }
    return j;
  }

  /// Reads {"preset": ..., "gamma": ..., "center": [x, y], "radius": R, "matrix": [a, b, c]}.
  /// default_radius is used when a shear preset omits "radius".
  static CoefficientField from_json(const nlohmann::json& j, double default_radius = 1.0) {
    const std::string preset = j.value("preset", std::string{"identity"});
    if (preset == "identity") return identity();
    if (preset == "constant-SPD") {
      const auto m = j.at("matrix").get<std::array<double, 3>>();
      Mat2 A;
      A << m[0], m[1], m[1], m[2];
      return constant(A);
    }
    if (preset == "linear-shear" || preset == "sine-shear") {
      const auto c = j.value("center", std::array<double, 2>{0.0, 0.0});
      return shear(preset == "linear-shear" ? Kind::linear_shear : Kind::sine_shear, j.value("gamma", 0.0),
                   Vec2(c[0], c[1]), j.value("radius", default_radius));
    }
    throw InvalidInput("unknown coefficient preset '" + preset +
                       "' (known: identity, constant-SPD, linear-shear, sine-shear)");
  }

private:
  Kind kind_ = Kind::identity;
  Mat2 A0_ = Mat2::Identity();
  Vec2 center_ = Vec2::Zero();
  double radius_ = 1.0;
  double Lambda_ = 1.0;
  double gamma_ = 0.0;
};

}  // namespace nodal_atlas::fem
