#pragma once

#include "nodal_atlas/core.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <utility>
#include <vector>

namespace nodal_atlas::nodal {

struct ScalingFit {
  std::vector<std::pair<double, double>> points;  // (lambda, length)
  double C = 0.0;
  double alpha = 0.0;
  double residual = 0.0;  // RMS of the log-log fit
};

/// Least squares of log(length) = log C + alpha log(lambda).
inline ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points) {
  std::set<double> distinct;
  for (const auto& [lam, len] : points) {
    if (!(lam > 0.0) || !(len > 0.0) || !std::isfinite(lam) || !std::isfinite(len))
      throw InvalidInput("scaling_fit: lambda and length must be positive and finite");
    distinct.insert(lam);
  }
  if (distinct.size() < 2) throw InvalidInput("scaling_fit: need at least two distinct lambda values");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (const auto& [lam, len] : points) {
    sx += std::log(lam);
    sy += std::log(len);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [lam, len] : points) {
    const double dx = std::log(lam) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(len) - my);
  }
  ScalingFit f;
  f.points = points;
  f.alpha = sxy / sxx;
  const double logC = my - f.alpha * mx;
  f.C = std::exp(logC);
  double ss = 0;
  for (const auto& [lam, len] : points) {
    const double e = std::log(len) - logC - f.alpha * std::log(lam);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

inline nlohmann::json to_json(const ScalingFit& f) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [lam, len] : f.points) pts.push_back({lam, len});
  return {{"points", pts}, {"C", f.C}, {"alpha", f.alpha}, {"residual", f.residual}};
}

inline ScalingFit scaling_fit_from_json(const nlohmann::json& j) {
  ScalingFit f;
  for (const auto& p : j.at("points")) f.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  f.C = j.at("C").get<double>();
  f.alpha = j.at("alpha").get<double>();
  f.residual = j.at("residual").get<double>();
  return f;
}

inline void save_scaling_fit(const ScalingFit& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << to_json(f).dump(2) << "\n";
}

/// Nodal-line table of the unit square: mode (m, n) has length (m - 1) + (n - 1) and
/// eigenvalue pi^2 (m^2 + n^2). The first `count` modes by eigenvalue, ties by (m, n).
struct SquareMode {
  int m = 1, n = 1;
  double lambda = 0.0;
  double length = 0.0;
};

inline std::vector<SquareMode> square_modes(int count) {
  std::vector<SquareMode> all;
  const int kmax = count + 2;
  for (int m = 1; m <= kmax; ++m)
    for (int n = 1; n <= kmax; ++n) all.push_back({m, n, kPi * kPi * (m * m + n * n), static_cast<double>(m + n - 2)});
  std::stable_sort(all.begin(), all.end(), [](const SquareMode& a, const SquareMode& b) {
    if (a.m * a.m + a.n * a.n != b.m * b.m + b.n * b.n) return a.m * a.m + a.n * a.n < b.m * b.m + b.n * b.n;
    return std::pair{a.m, a.n} < std::pair{b.m, b.n};
  });
  all.resize(static_cast<std::size_t>(count));
  return all;
}

}  // namespace nodal_atlas::nodal
