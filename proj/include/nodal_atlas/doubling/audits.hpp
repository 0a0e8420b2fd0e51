#pragma once

#include "nodal_atlas/doubling/profiles.hpp"
#include "nodal_atlas/geometry/domain.hpp"
#include "nodal_atlas/geometry/modulus.hpp"

#include <functional>

namespace nodal_atlas::doubling {

// ----------------------------------------------------------------------------------------------
// Continuous dependence of J on the center

struct CenterShift {
  double lhs = 0.0;    // (1 - C gamma theta) J(x1, r - C theta)
  double mid = 0.0;    // J(x0, r)
  double rhs = 0.0;    // (1 + C gamma theta) J(x1, r + C theta)
  double theta = 0.0;
  double C = 0.0;      // the constant used for lhs/rhs
  double C_min = 0.0;  // smallest C for which both inequalities hold (inf if none below r/theta)
};

template <TriangleField F>
CenterShift center_shift_check(const DoublingEvaluator<F>& ev, const Vec2& x0, const Vec2& x1, double r, double C) {
  const double gamma = ev.coefficients().gamma();
  CenterShift out;
  out.theta = (x1 - x0).norm();
  out.C = C;
  if (!(r > 0.0) || !(C >= 0.0)) throw InvalidInput("center_shift_check: need r > 0 and C >= 0");
  if (!(out.theta * C < r))
    throw InvalidInput(fmt::format("center_shift_check: need theta < r / C (theta = {}, r = {}, C = {})", out.theta, r, C));
  out.mid = ev.J(x0, r);
  const Frame f1 = frame_at(ev.coefficients(), x1);
  auto lower = [&](double c) { return (1.0 - c * gamma * out.theta) * ev.J(f1, r - c * out.theta); };
  auto upper = [&](double c) { return (1.0 + c * gamma * out.theta) * ev.J(f1, r + c * out.theta); };
  out.lhs = lower(C);
  out.rhs = upper(C);
  if (out.theta == 0.0) {
    out.C_min = 0.0;
    return out;
  }
  // both bounds are monotone in c: bisect each on [0, r/theta)
  const double cmax = r / out.theta * (1.0 - 1e-9);
  const double tol = 1e-12 * std::max(out.mid, 1e-300);
  auto smallest = [&](const std::function<bool(double)>& ok) {
    if (ok(0.0)) return 0.0;
    if (!ok(cmax)) return std::numeric_limits<double>::infinity();
    double a = 0.0, b = cmax;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      (ok(m) ? b : a) = m;
    }
    return b;
  };
  const double c1 = smallest([&](double c) { return lower(c) <= out.mid + tol; });
  const double c2 = smallest([&](double c) { return upper(c) >= out.mid - tol; });
  out.C_min = std::max(c1, c2);
  return out;
}

// ----------------------------------------------------------------------------------------------
// A-starshape center shift

struct StarShift {
  Vec2 x0 = Vec2::Zero();
  Vec2 x1 = Vec2::Zero();
  Vec2 e_d = Vec2(0.0, 1.0);
  double shift = 0.0;          // |x1 - x0| = C (r omega(2r) + gamma r^2)
  double C = 0.0;              // 9 Lambda (1 + L)
  double omega_2r = 0.0;
  double smallness = 0.0;      // C (omega(2r) + gamma r)
  bool small_enough = true;
  double defect = std::numeric_limits<double>::infinity();  // min n . A(x) A^{-1}(x1) (x - x1) over samples
  std::size_t samples = 0;     // boundary samples inside B_r(x1)
  double defect_unshifted = std::numeric_limits<double>::infinity();  // same with x1 replaced by x0
};

struct StarShiftOptions {
  int boundary_samples = 1000;
  bool strict = true;  // reject when the smallness product exceeds 1
  geometry::ModulusOptions modulus;
};

namespace detail {

/// Evenly spaced points (by arclength) of the polyline pieces inside B_rad(c), with the outward
/// normal of the edge each point lies on.
inline std::vector<std::pair<Vec2, Vec2>> boundary_samples_in_ball(const geometry::Polyline& poly, const Vec2& c,
                                                                   double rad, int count) {
  struct Piece {
    Vec2 a, b, n;
  };
  std::vector<Piece> pieces;
  double total = 0.0;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % m];
    const Vec2 d = q - p;
    const double len = d.norm();
    if (len == 0.0) continue;
    const Vec2 n(d.y() / len, -d.x() / len);
    const auto ts = geometry::segment_circle_params(p, q, c, rad);
    std::vector<double> cuts = {0.0};
    for (double t : ts)
      if (t > 0.0 && t < 1.0) cuts.push_back(t);
    cuts.push_back(1.0);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const Vec2 a = p + cuts[k] * d, b = p + cuts[k + 1] * d;
      if ((0.5 * (a + b) - c).norm() <= rad) {
        pieces.push_back({a, b, n});
        total += (b - a).norm();
      }
    }
  }
  std::vector<std::pair<Vec2, Vec2>> out;
  if (pieces.empty() || total == 0.0) return out;
  for (const auto& pc : pieces) {
    const int k = std::max(2, static_cast<int>(std::ceil(count * (pc.b - pc.a).norm() / total)));
    for (int j = 0; j <= k; ++j) out.emplace_back(pc.a + (pc.b - pc.a) * (static_cast<double>(j) / k), pc.n);
  }
  return out;
}

inline double star_defect(const std::vector<std::pair<Vec2, Vec2>>& samples, const CoefficientField& A, const Vec2& x1) {
  const Mat2 A1inv = A.checked(x1).inverse();
  double d = std::numeric_limits<double>::infinity();
  for (const auto& [x, n] : samples) d = std::min(d, n.dot(A(x) * (A1inv * (x - x1))));
  return d;
}

}  // namespace detail

/// x1 = x0 + C (r omega(2r) + gamma r^2) e_d with C = 9 Lambda (1 + L), e_d the inward direction of
/// the patch frame at x0; defect = min over boundary samples x in B_r(x1) of n(x).A(x)A^{-1}(x1)(x - x1).
inline StarShift star_center_shift(const geometry::PlanarDomain& domain, const CoefficientField& A, const Vec2& x0,
                                   double r, const StarShiftOptions& opt = {}) {
  if (!(r > 0.0)) throw InvalidInput("star_center_shift: r must be positive");
  const int pi = domain.patch_at(x0, 1e-9);
  if (pi < 0) throw InvalidInput("star_center_shift: x0 is not on a graph patch");
  const auto* patch = &domain.patches[static_cast<std::size_t>(pi)];
  StarShift s;
  s.x0 = x0;
  s.e_d = patch->frame() * Vec2(0.0, 1.0);
  const double gamma = A.gamma();
  s.C = 9.0 * A.Lambda() * (1.0 + domain.lipschitz_L);
  if (domain.kind == geometry::DomainKind::convex) {
    s.omega_2r = 0.0;
  } else {
    const auto om = geometry::estimate_modulus(domain, {std::min(2.0 * r, domain.r0)}, opt.modulus);
    s.omega_2r = om.values.back();
  }
  s.smallness = s.C * (s.omega_2r + gamma * r);
  s.small_enough = s.smallness <= 1.0;
  if (opt.strict && !s.small_enough)
    throw InvalidInput(fmt::format("star_center_shift: smallness condition violated, C (omega(2r) + gamma r) = {} > 1",
                                   s.smallness));
  s.shift = s.C * (r * s.omega_2r + gamma * r * r);
  s.x1 = x0 + s.shift * s.e_d;
  const auto samples = detail::boundary_samples_in_ball(domain.boundary, s.x1, r, opt.boundary_samples);
  s.samples = samples.size();
  if (!samples.empty()) s.defect = detail::star_defect(samples, A, s.x1);
  const auto base = detail::boundary_samples_in_ball(domain.boundary, x0, r, opt.boundary_samples);
  if (!base.empty()) s.defect_unshifted = detail::star_defect(base, A, x0);
  return s;
}

// ----------------------------------------------------------------------------------------------
// Monotonicity audits

enum class MonotonicityForm { frequency, doubling };

struct Violation {
  double r_small = 0.0, r_large = 0.0;
  double lhs = 0.0, rhs = 0.0;
};

struct MonotonicityReport {
  MonotonicityForm form = MonotonicityForm::doubling;
  std::vector<Violation> violations;
  double epsilon_min = 0.0;  // smallest eps with N(r)+1 <= (1+eps)(N(2r)+1) over all (r, 2r) pairs
  std::size_t pairs = 0;
  double tolerance = 0.0;
};

/// frequency: e^{C gamma r} N(r) must be nondecreasing along the grid.
/// doubling:  N(r) <= (1 + C(gamma r + omega(16r))) N(2r) + C(gamma r + omega(16r)) on (r, 2r) pairs.
/// omega defaults to 0 (convex). NaN entries are skipped.
inline MonotonicityReport monotonicity_audit(const std::vector<double>& radii, const std::vector<double>& N,
                                             MonotonicityForm form, double gamma, double C,
                                             const std::function<double(double)>& omega = {}, double tol = 1e-9) {
  if (radii.size() != N.size()) throw InvalidInput("monotonicity_audit: radii and N sizes differ");
  MonotonicityReport rep;
  rep.form = form;
  rep.tolerance = tol;
  auto om = [&](double r) { return omega ? omega(r) : 0.0; };
  if (form == MonotonicityForm::frequency) {
    for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
      if (!std::isfinite(N[i]) || !std::isfinite(N[i + 1])) continue;
      const double a = std::exp(C * gamma * radii[i]) * N[i];
      const double b = std::exp(C * gamma * radii[i + 1]) * N[i + 1];
      if (a > b + tol * std::max(1.0, std::abs(b))) rep.violations.push_back({radii[i], radii[i + 1], a, b});
    }
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    for (std::size_t j = 0; j < radii.size(); ++j) {
      if (std::abs(radii[j] - 2.0 * radii[i]) > 1e-9 * radii[i]) continue;
      if (!std::isfinite(N[i]) || !std::isfinite(N[j])) continue;
      ++rep.pairs;
      rep.epsilon_min = std::max(rep.epsilon_min, (N[i] + 1.0) / (N[j] + 1.0) - 1.0);
      if (form == MonotonicityForm::doubling) {
        const double k = C * (gamma * radii[i] + om(16.0 * radii[i]));
        const double rhs = (1.0 + k) * N[j] + k;
        if (N[i] > rhs + tol * std::max(1.0, std::abs(rhs))) rep.violations.push_back({radii[i], radii[j], N[i], rhs});
      }
    }
  }
  return rep;
}

// ----------------------------------------------------------------------------------------------
// Three-ball inequality

struct ThreeBall {
  double residual = 0.0;
  double beta = 0.0;
};

/// residual = beta log(J3/J2) + d log(r2^{1+beta} / (r3^beta r1)) + C gamma r3 - log(J2/J1),
/// beta = e^{C gamma r3} log(r2/r1) / log(r3/r2). The inequality asserts residual >= 0.
inline ThreeBall three_ball_residual(double J1, double J2, double J3, double r1, double r2, double r3, double gamma,
                                     int d = 2, double C = 1.0) {
  if (!(r1 > 0.0 && r1 < r2 && r2 < r3)) throw InvalidInput("three_ball_residual: radii must be positive and increasing");
  if (!(J1 > 0.0 && J2 > 0.0 && J3 > 0.0)) throw InvalidInput("three_ball_residual: J values must be positive");
  if (J1 > J2 || J2 > J3) throw InvalidInput("three_ball_residual: J must be nondecreasing in r");
  ThreeBall t;
  t.beta = std::exp(C * gamma * r3) * std::log(r2 / r1) / std::log(r3 / r2);
  t.residual = t.beta * std::log(J3 / J2) + d * ((1.0 + t.beta) * std::log(r2) - t.beta * std::log(r3) - std::log(r1)) +
               C * gamma * r3 - std::log(J2 / J1);
  return t;
}

}  // namespace nodal_atlas::doubling
