#pragma once

#include "nodal_atlas/doubling/audits.hpp"
#include "nodal_atlas/geometry/cuboid.hpp"
#include "nodal_atlas/nodal/nodal_set.hpp"

namespace nodal_atlas::doubling {

using geometry::Cuboid;

struct IndexSample {
  Vec2 x = Vec2::Zero();
  double r = 0.0;
  double N = 0.0;
};

struct CuboidIndex {
  Cuboid cuboid;
  double value = -std::numeric_limits<double>::infinity();  // N*(Q)
  std::vector<IndexSample> samples;
  std::size_t argmax = 0;
  int level = 0;
  std::size_t points = 0;    // spatial samples inside the closed domain
  double value_shifted = std::nan("");  // sup over boundary samples of N(x1, r), x1 the star-shifted center

  double value_plus_one() const { return value + 1.0; }  // N** = N* + 1
};

struct MaximalOptions {
  int level = 0;             // grid (8*2^level + 1)^2 points x (4*2^level + 1) radii
  QuadOptions quad;
  const geometry::PlanarDomain* domain = nullptr;  // set to also report the shifted index
};

namespace detail {

/// Nested grid coordinate: i/(n-1) in [0, 1]; index 2i at the next level gives the same double.
inline double grid_unit(int i, int n) { return static_cast<double>(i) / static_cast<double>(n - 1); }

}  // namespace detail

/// N*(Q) = sup over x in Q cap closure(Omega), r in [side/2, side] of N(x, r), sampled on nested grids.
template <TriangleField F>
CuboidIndex maximal_index(const F& u, const CoefficientField& A, const Cuboid& Q, const MaximalOptions& opt = {}) {
  if (opt.level < 0 || opt.level > 6) throw InvalidInput("maximal_index: level must lie in [0, 6]");
  const int np = 8 * (1 << opt.level) + 1;
  const int nr = 4 * (1 << opt.level) + 1;
  const double ell = Q.side;
  const DoublingEvaluator<F> ev(u, A, opt.quad);
  const double tol = 1e-9 * std::max(1.0, ell);

  const Mat2 R = rotation(Q.angle);
  const double hw = 0.5 * Q.side, hh = Q.half_height();
  std::vector<Vec2> pts;
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < np; ++i) {
      const Vec2 off(-hw + 2.0 * hw * detail::grid_unit(i, np), -hh + 2.0 * hh * detail::grid_unit(j, np));
      const Vec2 p = Q.center + R * off;
      if (ev.index().locate(p, tol) >= 0) pts.push_back(p);
    }
  std::vector<double> radii(static_cast<std::size_t>(nr));
  for (int k = 0; k < nr; ++k) radii[static_cast<std::size_t>(k)] = ell * (0.5 + 0.5 * detail::grid_unit(k, nr));

  CuboidIndex out;
  out.cuboid = Q;
  out.level = opt.level;
  out.points = pts.size();
  if (pts.empty()) throw InvalidInput("maximal_index: cuboid does not meet the meshed domain");

  const std::size_t per = radii.size();
  std::vector<IndexSample> samples(pts.size() * per);
  std::vector<double> shifted(pts.size(), std::nan(""));
  parallel_for(pts.size(), [&](std::size_t i) {
    const Frame fr = frame_at(A, pts[i]);
    std::vector<double> j1(per), j2(per);
    for (std::size_t k = 0; k < per; ++k) {
      j1[k] = ev.J(fr, radii[k]);
      j2[k] = ev.J(fr, 2.0 * radii[k]);
      const double N = j1[k] > 0.0 && j2[k] > 0.0 ? std::log(j2[k] / j1[k]) : std::nan("");
      samples[i * per + k] = {pts[i], radii[k], N};
    }
    if (opt.domain && opt.domain->patch_at(pts[i], tol) >= 0) {
      double best = -std::numeric_limits<double>::infinity();
      for (double r : radii) {
        StarShiftOptions so;
        so.strict = false;
        const StarShift sh = star_center_shift(*opt.domain, A, pts[i], r, so);
        if (const auto N = ev.N(sh.x1, r)) best = std::max(best, *N);
      }
      if (std::isfinite(best)) shifted[i] = best;
    }
  });
  for (std::size_t s = 0; s < samples.size(); ++s)
    if (std::isfinite(samples[s].N) && samples[s].N > out.value) {
      out.value = samples[s].N;
      out.argmax = s;
    }
  if (!std::isfinite(out.value)) throw InvalidInput("maximal_index: u vanishes on every sampled ball");
  out.samples = std::move(samples);
  for (double v : shifted)
    if (std::isfinite(v)) out.value_shifted = std::isfinite(out.value_shifted) ? std::max(out.value_shifted, v) : v;
  return out;
}

inline nlohmann::json to_json(const CuboidIndex& c) {
  const auto& s = c.samples[c.argmax];
  return {{"cuboid", c.cuboid.to_json()},
          {"value", c.value},
          {"value_plus_one", c.value_plus_one()},
          {"argmax", {{"x", s.x.x()}, {"y", s.x.y()}, {"r", s.r}}},
          {"level", c.level},
          {"points", c.points},
          {"samples", c.samples.size()},
          {"value_shifted", std::isfinite(c.value_shifted) ? nlohmann::json(c.value_shifted) : nlohmann::json(nullptr)}};
}

// ----------------------------------------------------------------------------------------------
// Drop audit

struct DropRow {
  Cuboid q;
  double index = 0.0;  // N*(q)
  double ratio = 0.0;  // N*(q) / N*(Q)
  std::string zero_status;  // "zero-free", "zeros" or "unresolved"
  double min_abs = 0.0;
  double nearest_zero_distance = std::numeric_limits<double>::infinity();
};

struct DropReport {
  double parent_index = 0.0;
  double N0 = 0.0;
  int k = 3;
  std::string branch;    // "drop" when N*(Q) > N0, else "zero-free"
  bool witnessed = false;
  std::size_t drop_witnesses = 0;
  std::size_t zero_free_witnesses = 0;
  double ratio_min = 0.0, ratio_median = 0.0, ratio_max = 0.0;
  std::vector<DropRow> rows;
};

/// Evidence table over the boundary cuboids of B_k(Q): N*(q), N*(q)/N*(Q) and zero-free status.
inline DropReport drop_audit(const fem::ScalarField& u, const CoefficientField& A, const geometry::PlanarDomain& domain,
                             const Cuboid& Q, int k, double N0, const MaximalOptions& opt = {}) {
  const geometry::Decomposition dec = geometry::decompose_cuboid(domain, Q, k);
  DropReport rep;
  rep.k = k;
  rep.N0 = N0;
  MaximalOptions mo = opt;
  mo.domain = nullptr;
  rep.parent_index = maximal_index(u, A, Q, mo).value;
  rep.branch = rep.parent_index > N0 ? "drop" : "zero-free";
  std::vector<double> ratios;
  for (const auto& q : dec.boundary_cuboids) {
    DropRow row;
    row.q = q;
    row.index = maximal_index(u, A, q, mo).value;
    row.ratio = rep.parent_index != 0.0 ? row.index / rep.parent_index : std::nan("");
    try {
      const auto z = nodal::zero_free_audit(u, fem::Region::polygon(q.corners()));
      row.zero_status = z.zero_free ? "zero-free" : "zeros";
      row.min_abs = z.min_abs;
      row.nearest_zero_distance = z.nearest_zero_distance;
    } catch (const InvalidInput&) {
      row.zero_status = "unresolved";
    }
    if (row.ratio <= 0.5) ++rep.drop_witnesses;
    if (row.zero_status == "zero-free") ++rep.zero_free_witnesses;
    if (std::isfinite(row.ratio)) ratios.push_back(row.ratio);
    rep.rows.push_back(std::move(row));
  }
  rep.witnessed = rep.branch == "drop" ? rep.drop_witnesses > 0 : rep.zero_free_witnesses > 0;
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    rep.ratio_min = ratios.front();
    rep.ratio_max = ratios.back();
    const std::size_t n = ratios.size();
    rep.ratio_median = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  }
  return rep;
}

inline void write_drop_csv(const DropReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << "column,center_x,center_y,side,index,ratio,zero_status,min_abs,nearest_zero_distance\n";
  for (const auto& r : rep.rows)
    out << r.q.column << ',' << fmt_num(r.q.center.x()) << ',' << fmt_num(r.q.center.y()) << ',' << fmt_num(r.q.side) << ','
        << fmt_num(r.index) << ',' << fmt_num(r.ratio) << ',' << r.zero_status << ',' << fmt_num(r.min_abs) << ','
        << fmt_num(r.nearest_zero_distance) << "\n";
}

}  // namespace nodal_atlas::doubling
