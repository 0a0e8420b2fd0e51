#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nodal_atlas {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;

/// Raised when an operation's preconditions are not met by its inputs.
class InvalidInput : public std::invalid_argument {
public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when an iterative numerical method fails to reach its tolerance.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Twice the signed area of (a, b, c); positive for counter-clockwise order.
inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross(b - a, c - a);
}

inline Mat2 rotation(double angle) {
  Mat2 r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration on P_n.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule make_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  return rule;
}

/// Cached Gauss-Legendre rule; n in [1, 64].
inline const GaussRule& gauss_legendre(int n) {
  static const std::vector<GaussRule> cache = [] {
    std::vector<GaussRule> rules(65);
    for (int k = 1; k <= 64; ++k) rules[static_cast<std::size_t>(k)] = make_gauss_legendre(k);
    return rules;
  }();
  if (n < 1 || n > 64) throw InvalidInput("gauss_legendre: order must lie in [1, 64]");
  return cache[static_cast<std::size_t>(n)];
}

/// Collapsed (Duffy) product rule on the reference triangle (0,0),(1,0),(0,1);
/// exact for polynomials of degree 2n-2. Weights sum to 1/2.
struct TriangleRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
};

inline const TriangleRule& triangle_rule(int n) {
  static std::vector<TriangleRule> cache(33);
  static const bool filled = [] {
    for (int k = 1; k <= 32; ++k) {
      const GaussRule& g = gauss_legendre(k);
      TriangleRule& t = cache[static_cast<std::size_t>(k)];
      for (int i = 0; i < k; ++i) {
        const double a = 0.5 * (g.nodes[static_cast<std::size_t>(i)] + 1.0);
        for (int j = 0; j < k; ++j) {
          const double b = 0.5 * (g.nodes[static_cast<std::size_t>(j)] + 1.0);
          t.points.push_back({a, (1.0 - a) * b});
          t.weights.push_back(0.25 * g.weights[static_cast<std::size_t>(i)] *
                              g.weights[static_cast<std::size_t>(j)] * (1.0 - a));
        }
      }
    }
    return true;
  }();
  (void)filled;
  if (n < 1 || n > 32) throw InvalidInput("triangle_rule: order must lie in [1, 32]");
  return cache[static_cast<std::size_t>(n)];
}

/// Worker cap from NODAL_ATLAS_THREADS (default: hardware concurrency).
inline unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NODAL_ATLAS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
  }
  return hw;
}

/// Runs body(i) for i in [0, count). Each index is owned by exactly one worker, so
/// writing results into slot i keeps output independent of the schedule.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_cap(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace nodal_atlas
