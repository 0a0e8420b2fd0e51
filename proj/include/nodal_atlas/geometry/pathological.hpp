#pragma once

#include "nodal_atlas/geometry/graph.hpp"

#include <cstdint>
#include <deque>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace nodal_atlas::geometry {

enum class Enumeration { stern_brocot, cantor_diagonal };

inline Enumeration parse_enumeration(const std::string& s) {
  if (s == "stern-brocot") return Enumeration::stern_brocot;
  if (s == "cantor-diagonal") return Enumeration::cantor_diagonal;
  throw InvalidInput("unknown enumeration '" + s + "' (expected stern-brocot or cantor-diagonal)");
}

inline std::string to_string(Enumeration e) {
  return e == Enumeration::stern_brocot ? "stern-brocot" : "cantor-diagonal";
}

struct Rational {
  std::int64_t p = 0;
  std::int64_t q = 1;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

/// First `count` rationals of (0, 1) in the requested deterministic order.
/// The endpoints carry no mass on (0, 1) and are not listed.
inline std::vector<Rational> enumerate_rationals(std::size_t count, Enumeration order) {
  std::vector<Rational> out;
  out.reserve(count);
  if (order == Enumeration::stern_brocot) {
    // Breadth-first traversal of the Stern-Brocot subtree rooted at 1/2.
    std::deque<std::pair<Rational, Rational>> queue{{Rational{0, 1}, Rational{1, 1}}};
    while (out.size() < count) {
      auto [l, r] = queue.front();
      queue.pop_front();
      const Rational m{l.p + r.p, l.q + r.q};
      out.push_back(m);
      queue.emplace_back(l, m);
      queue.emplace_back(m, r);
    }
  } else {
    for (std::int64_t q = 2; out.size() < count; ++q)
      for (std::int64_t p = 1; p < q && out.size() < count; ++p)
        if (std::gcd(p, q) == 1) out.push_back({p, q});
  }
  return out;
}

/// Truncated nowhere-convex, nowhere-C^1 quasiconvex profile on [0, 1]:
/// phi_K(x) = int_0^x f_K - x^2 with f_K(t) = sum_{k<=K} 2^{-k} 1{q_k < t}.
struct PathologicalCurve {
  int K = 0;
  Enumeration order = Enumeration::stern_brocot;
  std::vector<Rational> rationals;  // q_1..q_K
  GraphFunction phi;                // exact piecewise quadratic on [0, 1]

  double weight(std::size_t k1) const { return std::ldexp(1.0, -static_cast<int>(k1)); }
  /// Mass of the discarded tail sum_{k>K} 2^{-k}, as a base-2 exponent.
  int tail_log2() const { return -K; }
  double tail() const { return std::ldexp(1.0, -K); }
};

inline PathologicalCurve pathological_curve(int K, Enumeration order = Enumeration::stern_brocot) {
  if (K < 1) throw InvalidInput("pathological_curve: K must be >= 1");
  PathologicalCurve c;
  c.K = K;
  c.order = order;
  c.rationals = enumerate_rationals(static_cast<std::size_t>(K), order);

  std::vector<std::pair<double, double>> atoms;  // (location, mass)
  atoms.reserve(c.rationals.size());
  for (std::size_t k = 0; k < c.rationals.size(); ++k)
    atoms.emplace_back(c.rationals[k].value(), std::ldexp(1.0, -static_cast<int>(k + 1)));
  std::sort(atoms.begin(), atoms.end());

  std::vector<double> breaks{0.0};
  std::vector<double> slopes{0.0};  // f on the piece starting at breaks[i]
  for (const auto& [x, m] : atoms) {
    if (x > breaks.back()) {
      breaks.push_back(x);
      slopes.push_back(slopes.back() + m);
    } else {
      slopes.back() += m;
    }
  }
  breaks.push_back(1.0);

  std::vector<std::array<double, 3>> coeffs;
  double F = 0.0;  // int_0^{b_i} f
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double b = breaks[i];
    coeffs.push_back({F - b * b, slopes[i] - 2.0 * b, -1.0});
    F += slopes[i] * (breaks[i + 1] - b);
  }
  c.phi = GraphFunction::piecewise(std::move(breaks), std::move(coeffs),
                                   "pathological-K" + std::to_string(K));
  return c;
}

/// Masses phi''(I) on the 2^level dyadic intervals I_i = [i 2^-level, (i+1) 2^-level);
/// an atom on a dyadic endpoint belongs to the interval it opens.
struct SecondDerivativeMeasure {
  int level = 0;
  std::vector<double> masses;
  std::size_t nonnegative_count = 0;
  double total = 0.0;
};

inline SecondDerivativeMeasure second_derivative_measure(const PathologicalCurve& curve, int level) {
  if (level < 1 || level > 40) throw InvalidInput("second_derivative_measure: level must lie in [1, 40]");
  SecondDerivativeMeasure out;
  out.level = level;
  const std::int64_t n = std::int64_t{1} << level;
  out.masses.assign(static_cast<std::size_t>(n), -2.0 * std::ldexp(1.0, -level));
  for (std::size_t k = 0; k < curve.rationals.size(); ++k) {
    const auto& r = curve.rationals[k];
    // i = floor(p 2^level / q), computed exactly.
    const std::int64_t i = (r.p << level) / r.q;
    out.masses[static_cast<std::size_t>(i)] += std::ldexp(1.0, -static_cast<int>(k + 1));
  }
  for (double m : out.masses) {
    if (m >= 0.0) ++out.nonnegative_count;
    out.total += m;
  }
  return out;
}

}  // namespace nodal_atlas::geometry
