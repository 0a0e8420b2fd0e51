#pragma once

#include "nodal_atlas/core.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace nodal_atlas::doubling {

enum class SqrtMethod { spectral, series };

inline SqrtMethod parse_sqrt_method(const std::string& s) {
  if (s == "spectral") return SqrtMethod::spectral;
  if (s == "series") return SqrtMethod::series;
  throw InvalidInput("unknown square-root method '" + s + "' (known: spectral, series)");
}

struct SqrtInfo {
  Mat2 S;
  int terms = 0;            // series terms used (0 for spectral)
  double last_term = 0.0;   // norm of the last series term added
};

namespace detail {

inline Eigen::Vector2d checked_spectrum(const Mat2& A) {
  if (!A.allFinite()) throw InvalidInput("matrix_sqrt: non-finite entries");
  if (std::abs(A(0, 1) - A(1, 0)) > 1e-12 * (1.0 + A.norm())) throw InvalidInput("matrix_sqrt: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> es(A);
  if (!(es.eigenvalues()(0) > 0.0)) throw InvalidInput("matrix_sqrt: matrix is not positive definite");
  return es.eigenvalues();
}

}  // namespace detail

/// Symmetric square root of a 2x2 SPD matrix.
///   spectral: V diag(sqrt(l)) V^T
///   series:   sqrt(Lambda) * sum_n binom(1/2, n) (-1)^n (I - A/Lambda)^n, Lambda = max(l_max, 1/l_min)
///             (or the caller's Lambda when larger), stopped once a term has norm < term_tol.
inline SqrtInfo matrix_sqrt_info(const Mat2& A, SqrtMethod method, double Lambda = 0.0, double term_tol = 1e-12) {
  const Eigen::Vector2d ev = detail::checked_spectrum(A);
  const Mat2 As = 0.5 * (A + A.transpose());
  SqrtInfo info;
  if (method == SqrtMethod::spectral) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(As);
    const Mat2& V = es.eigenvectors();
    info.S = V * es.eigenvalues().cwiseSqrt().asDiagonal() * V.transpose();
    info.S = 0.5 * (info.S + info.S.transpose()).eval();
    return info;
  }
  const double L = std::max({Lambda, ev(1), 1.0 / ev(0)});
  const Mat2 B = Mat2::Identity() - As / L;
  Mat2 term = Mat2::Identity();  // binom(1/2, n) (-B)^n
  Mat2 sum = term;
  int n = 0;
  while (term.norm() >= term_tol) {
    ++n;
    if (n > 200000) throw SolverError("matrix_sqrt: series did not converge");
    // binom(1/2, n) = binom(1/2, n-1) * (1/2 - (n-1)) / n
    term = (term * (-B)) * ((0.5 - (n - 1)) / n);
    sum += term;
  }
  info.S = std::sqrt(L) * sum;
  info.S = 0.5 * (info.S + info.S.transpose()).eval();
  info.terms = n;
  info.last_term = term.norm();
  return info;
}

inline Mat2 matrix_sqrt(const Mat2& A, SqrtMethod method = SqrtMethod::spectral, double Lambda = 0.0) {
  return matrix_sqrt_info(A, method, Lambda).S;
}

/// E(x0, r) = x0 + S B_r with S = A(x0)^{1/2}.
struct Ellipsoid {
  Vec2 center = Vec2::Zero();
  Mat2 S = Mat2::Identity();
  double radius = 0.0;

  bool contains(const Vec2& y, double tol = 0.0) const {
    return (S.inverse() * (y - center)).norm() <= radius * (1.0 + tol);
  }
  /// Semi-axes r * sqrt(eigenvalues of A(x0)).
  Eigen::Vector2d semi_axes() const {
    Eigen::SelfAdjointEigenSolver<Mat2> es(S);
    return radius * es.eigenvalues();
  }
};

}  // namespace nodal_atlas::doubling
