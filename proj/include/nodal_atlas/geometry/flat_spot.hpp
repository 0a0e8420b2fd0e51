#pragma once

#include "nodal_atlas/geometry/graph.hpp"

#include <string>
#include <vector>

namespace nodal_atlas::geometry {

struct SupportPlane {
  double base = 0.0;
  double slope = 0.0;
  double offset = 0.0;  // P(x) = offset + slope (x - base)
  double operator()(double x) const { return offset + slope * (x - base); }
};

struct FlatSpot {
  double base = 0.0;
  SupportPlane plane;
  double defect = 0.0;
  double score = 0.0;           // right quotient at base + r minus left quotient at base - r
  double min_gap = 0.0;         // min of phi - P over the whole interval sample
  bool plane_valid = true;      // min_gap >= -support_tol
};

struct FlatSpotOptions {
  int base_divisions = 16;      // candidate spacing r / base_divisions
  int quotient_divisions = 64;  // difference-quotient step r / quotient_divisions
  int defect_samples = 4096;    // samples across [base - r, base + r]
  int check_samples = 8192;     // samples across the whole interval
  double convexity_tol = 1e-10;
  double support_tol = 1e-12;
};

/// Throws InvalidInput naming the first negative second difference beyond tol.
inline void require_convex(const GraphFunction& phi, int samples = 8192, double tol = 1e-10) {
  const double lo = phi.lo(), hi = phi.hi();
  const double step = (hi - lo) / samples;
  double prev = phi.value(lo), cur = phi.value(lo + step);
  for (int i = 1; i < samples; ++i) {
    const double x = lo + (i + 1) * step;
    const double next = phi.value(i + 1 == samples ? hi : x);
    const double d2 = next - 2.0 * cur + prev;
    if (d2 < -tol) {
      throw InvalidInput("find_flat_spot: graph '" + phi.label() + "' is not convex near x = " +
                         std::to_string(lo + i * step) + " (second difference " + std::to_string(d2) + ")");
    }
    prev = cur;
    cur = next;
  }
}

inline FlatSpot find_flat_spot(const GraphFunction& phi, double r, const FlatSpotOptions& opt = {}) {
  const double a = std::min(-phi.lo(), phi.hi());
  if (!(a > 0.0)) throw InvalidInput("find_flat_spot: interval must contain 0 in its interior");
  if (!(r > 0.0) || !(r < 0.5 * a))
    throw InvalidInput("find_flat_spot: need 0 < r < a/2 (a = " + std::to_string(a) + ")");
  require_convex(phi, opt.check_samples, opt.convexity_tol);

  const double lo = phi.lo(), hi = phi.hi();
  auto at = [&](double x) { return phi.value(std::clamp(x, lo, hi)); };
  const double delta = r / opt.quotient_divisions;
  const double spacing = r / opt.base_divisions;
  const int half = static_cast<int>(std::floor(0.5 * a / spacing + 1e-9));

  FlatSpot best;
  bool have = false;
  for (int i = -half; i <= half; ++i) {
    const double y = i * spacing;
    const double right = (at(y + r + delta) - at(y + r)) / delta;
    const double left = (at(y - r) - at(y - r - delta)) / delta;
    const double score = right - left;
    // scores equal up to rounding count as ties, resolved towards the smaller base
    const double tie = 1e-9 * std::max(1.0, std::abs(right) + std::abs(left));
    if (!have || score < best.score - tie) {
      best.base = y;
      best.score = score;
      have = true;
    }
  }

  const double x0 = best.base;
  best.plane.base = x0;
  best.plane.offset = phi.value(x0);
  best.plane.slope = 0.5 * (phi.derivative_left(x0) + phi.derivative_right(x0));

  double defect = 0.0;
  for (int i = 0; i <= opt.defect_samples; ++i) {
    const double x = std::clamp(x0 - r + 2.0 * r * i / opt.defect_samples, lo, hi);
    defect = std::max(defect, phi.value(x) - best.plane(x));
  }
  for (double b : phi.breaks())
    if (std::abs(b - x0) <= r) defect = std::max(defect, phi.value(b) - best.plane(b));
  best.defect = defect;

  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= opt.check_samples; ++i) {
    const double x = lo + (hi - lo) * i / opt.check_samples;
    gap = std::min(gap, phi.value(x) - best.plane(x));
  }
  for (double b : phi.breaks()) gap = std::min(gap, phi.value(b) - best.plane(b));
  best.min_gap = gap;
  best.plane_valid = gap >= -opt.support_tol;
  return best;
}

/// Convex profiles used by the flat-spot experiment, each on [-1/2, 1/2] with phi(0) = 0.
inline std::vector<GraphFunction> flat_spot_presets() {
  return {
      GraphFunction::quadratic(-0.5, 0.5, 0.0, 0.3, 0.0, "affine"),
      GraphFunction::quadratic(-0.5, 0.5, 0.0, 0.0, 1.0, "square"),
      GraphFunction::polygonal({-0.5, 0.0, 0.5}, {0.5, 0.0, 0.5}, "abs"),
      GraphFunction::polygonal({-0.5, 0.0, 0.2, 0.5}, {0.5, 0.0, 0.1, 0.7}, "max-of-three"),
      GraphFunction::cosh_profile(1.0, 0.5, "cosh"),
  };
}

}  // namespace nodal_atlas::geometry
