#pragma once

#include "nodal_atlas/doubling/audits.hpp"
#include "nodal_atlas/doubling/extension.hpp"
#include "nodal_atlas/doubling/maximal.hpp"
#include "nodal_atlas/doubling/profiles.hpp"
#include "nodal_atlas/experiments/cauchy.hpp"
#include "nodal_atlas/experiments/fields.hpp"
#include "nodal_atlas/experiments/report.hpp"
#include "nodal_atlas/geometry/cuboid.hpp"
#include "nodal_atlas/geometry/flat_spot.hpp"
#include "nodal_atlas/geometry/hull_gap.hpp"
#include "nodal_atlas/geometry/modulus.hpp"
#include "nodal_atlas/geometry/pathological.hpp"
#include "nodal_atlas/nodal/export.hpp"
#include "nodal_atlas/nodal/nodal_set.hpp"
#include "nodal_atlas/nodal/scaling.hpp"

#include <cmath>
#include <random>

namespace nodal_atlas::experiments {

namespace detail {

inline RowRef rows(const std::string& table, std::size_t first, std::size_t last) {
  RowRef r{table, {}};
  for (std::size_t i = first; i < last; ++i) r.rows.push_back(i);
  return r;
}

inline RowRef row(const std::string& table, std::size_t i) { return {table, {i}}; }

/// k-th positive zero of J_n.
inline double bessel_zero(int n, int k) {
  double x = 0.5, prev = std::cyl_bessel_j(n, x);
  int found = 0;
  const double step = 0.01;
  while (true) {
    const double y = x + step, fy = std::cyl_bessel_j(n, y);
    if ((prev < 0.0) != (fy < 0.0)) {
      if (++found == k) {
        double a = x, b = y, fa = prev;
        for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
          const double m = 0.5 * (a + b), fm = std::cyl_bessel_j(n, m);
          if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        return 0.5 * (a + b);
      }
    }
    x = y;
    prev = fy;
  }
}

/// Dirichlet spectrum of the unit disk (full = true) or the upper half-disk, ascending.
inline std::vector<double> disk_spectrum(int count, bool full) {
  std::vector<double> out;
  const int reach = count + 4;
  for (int n = full ? 0 : 1; n <= reach; ++n)
    for (int k = 1; k <= reach; ++k) {
      const double j = bessel_zero(n, k);
      if (j > 2.0 * reach + 10.0) break;
      out.push_back(j * j);
      if (full && n > 0) out.push_back(j * j);
    }
  std::sort(out.begin(), out.end());
  out.resize(std::min<std::size_t>(out.size(), static_cast<std::size_t>(count)));
  return out;
}

inline std::vector<double> reference_spectrum(const ExperimentConfig& c, int count) {
  const bool identity = c.make_coefficients().kind() == fem::CoefficientField::Kind::identity;
  if (!identity) return {};
  if (c.domain == "unit-square") {
    std::vector<double> v;
    for (const auto& m : nodal::square_modes(count)) v.push_back(m.lambda);
    return v;
  }
  if (c.domain == "unit-disk") return disk_spectrum(count, true);
  if (c.domain == "half-disk") return disk_spectrum(count, false);
  return {};
}

inline std::string field_label(const AnyField& f) {
  return std::visit([](const auto& u) { return std::string(u.label()); }, f);
}

inline double max_of(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, x);
  return m;
}

inline nlohmann::json mesh_estimate(const ExperimentConfig& c) {
  const auto d = c.make_mesh_domain();
  const double area = std::abs(geometry::signed_area(d.boundary));
  const double tri = area / (std::sqrt(3.0) / 4.0 * c.mesh_h * c.mesh_h);
  return {{"domain_area", area}, {"triangles_est", std::ceil(tri)}, {"vertices_est", std::ceil(0.5 * tri)}};
}

}  // namespace detail

// ----------------------------------------------------------------------------------------------
// eigen

inline void run_eigen(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const auto& sol = ctx.eigen(c.mode_count);
  const auto ref = detail::reference_spectrum(c, c.mode_count);
  auto& t = rep.table("eigenvalues", {"k", "lambda", "residual", "reference", "rel_error"});
  double worst = 0.0;
  for (int k = 0; k < c.mode_count; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double r = i < ref.size() ? ref[i] : std::nan("");
    const double e = std::isfinite(r) ? std::abs(sol.lambdas[i] - r) / r : std::nan("");
    if (std::isfinite(e)) worst = std::max(worst, e);
    t.row(k + 1, sol.lambdas[i], sol.residuals[i], r, e);
  }
  if (!ref.empty())
    rep.check("max_rel_error", worst <= c.tol("rel_error", 0.01), worst, fmt::format("<= {}", c.tol("rel_error", 0.01)),
              {detail::rows("eigenvalues", 0, t.size())});
  rep.info("max_residual", detail::max_of(sol.residuals), {detail::rows("eigenvalues", 0, t.size())});
  rep.files["modes.json"] = fem::eigen_solution_json(sol).dump(2) + "\n";
  if (c.params.value("save_modes", true)) rep.files["modes.csv"] = fem::eigen_solution_csv(sol);
  rep.error_budget = {{"mesh_h", c.mesh_h}, {"solver_tol", fem::EigenOptions{}.tol},
                      {"max_residual", detail::max_of(sol.residuals)}};
}

// ----------------------------------------------------------------------------------------------
// nodal-scaling

inline void run_nodal_scaling(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const auto& sol = ctx.eigen(c.mode_count);
  auto& t = rep.table("modes", {"k", "lambda", "length", "components", "nodal_domains", "ratio"});
  std::vector<nodal::NodalSet> sets(static_cast<std::size_t>(c.mode_count));
  std::vector<int> domains(sets.size());
  parallel_for(sets.size(), [&](std::size_t i) {
    sets[i] = nodal::extract_nodal(sol.fields[i]);
    domains[i] = nodal::count_nodal_domains(sol.fields[i]);
  });
  std::vector<std::pair<double, double>> pts;
  double ratio_max = 0.0;
  bool courant = true;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const double ratio = sets[i].length / std::sqrt(sol.lambdas[i]);
    ratio_max = std::max(ratio_max, ratio);
    courant = courant && domains[i] <= static_cast<int>(i + 1);
    t.row(static_cast<int>(i + 1), sol.lambdas[i], sets[i].length, sets[i].component_count, domains[i], ratio);
    if (sets[i].length > 0.0) pts.emplace_back(sol.lambdas[i], sets[i].length);
  }
  const auto all = detail::rows("modes", 0, t.size());
  if (pts.size() < 2) throw SolverError("nodal-scaling: fewer than two modes with a nonempty nodal set");
  const auto fit = nodal::scaling_fit(pts);
  rep.files["fit.json"] = nodal::to_json(fit).dump(2) + "\n";
  const double lo = c.tol("alpha_lo", 0.45), hi = c.tol("alpha_hi", 0.6);
  rep.check("alpha", fit.alpha >= lo && fit.alpha <= hi, fit.alpha, fmt::format("[{}, {}]", lo, hi), {all});
  rep.info("C", fit.C, {all});
  rep.info("fit_residual", fit.residual, {all});
  const double bound = c.tol("ratio_bound", 2.0);
  rep.check("ratio_bounded", ratio_max <= bound, ratio_max, fmt::format("length/sqrt(lambda) <= {}", bound), {all});
  rep.check("courant", courant, static_cast<double>(courant), "nodal domains of mode k <= k", {all});
  const int shown = std::clamp(c.params.value("svg_mode", std::min(c.mode_count, 6)), 1, c.mode_count);
  rep.svgs[fmt::format("mode_{:02d}.svg", shown)] =
      nodal::nodal_svg(ctx.domain.boundary, sets[static_cast<std::size_t>(shown - 1)]);
  rep.error_budget = {{"mesh_h", c.mesh_h}, {"nodal_length_discretisation", "O(h) on the P1 interpolant"},
                      {"max_residual", detail::max_of(sol.residuals)}};
}

// ----------------------------------------------------------------------------------------------
// frequency / doubling profiles

namespace detail {

struct ProfileRun {
  std::string table;
  std::string label;
  nlohmann::json spec;
  doubling::FrequencyProfile f;
  doubling::DoublingProfile d;
  double quad_error = 0.0;  // max |N - N_refined| over both quotients
};

inline std::vector<ProfileRun> run_profiles(Context& ctx, Report& rep, const std::vector<double>& radii) {
  const auto& c = ctx.config;
  const nlohmann::json specs =
      c.params.value("fields", nlohmann::json::array({{{"kind", "harmonic"}, {"n", 1}, {"imaginary", true}}}));
  const Vec2 fallback = ctx.point_param("center", ctx.domain.patches.empty() ? Vec2::Zero() : ctx.boundary_point());
  std::vector<ProfileRun> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ProfileRun run;
    run.spec = specs[i];
    const AnyField f = ctx.field(run.spec);
    run.label = field_label(f);
    Vec2 x0 = fallback;
    if (run.spec.contains("at")) {
      const auto a = run.spec.at("at").get<std::array<double, 2>>();
      x0 = Vec2(a[0], a[1]);
    }
    doubling::ProfileOptions po, fine;
    fine.quad = po.quad.refined();
    std::visit(
        [&](const auto& u) {
          run.f = doubling::frequency_profile(u, ctx.A, x0, radii, po);
          run.d = doubling::doubling_profile(u, ctx.A, x0, radii, po.quad);
          const auto f2 = doubling::frequency_profile(u, ctx.A, x0, radii, fine);
          const auto d2 = doubling::doubling_profile(u, ctx.A, x0, radii, fine.quad);
          for (std::size_t k = 0; k < radii.size(); ++k) {
            if (std::isfinite(run.f.N[k]) && std::isfinite(f2.N[k]))
              run.quad_error = std::max(run.quad_error, std::abs(run.f.N[k] - f2.N[k]));
            run.quad_error = std::max(run.quad_error, std::abs(run.d.N[k] - d2.N[k]));
          }
        },
        f);
    run.table = fmt::format("profile_{:02d}", i + 1);
    auto& t = rep.table(run.table, {"center_x", "center_y", "r", "H", "D", "N_freq", "J", "N_doub", "flags"});
    for (std::size_t k = 0; k < radii.size(); ++k)
      t.row(x0.x(), x0.y(), radii[k], run.f.H[k], run.f.D[k], run.f.N[k], run.d.J[k], run.d.N[k], run.f.flags[k]);
    rep.extra["profiles"][run.table] = {{"field", run.label}, {"spec", run.spec}, {"quad_error", run.quad_error}};
    log_kv({{"event", "profile"}, {"table", run.table}, {"field", run.label}, {"quad_error", num(run.quad_error)}});
    out.push_back(std::move(run));
  }
  return out;
}

inline double max_abs_error(const std::vector<double>& N, double expected) {
  double e = 0.0;
  for (double v : N) e = std::max(e, std::isfinite(v) ? std::abs(v - expected) : std::numeric_limits<double>::infinity());
  return e;
}

inline double max_excess(const doubling::MonotonicityReport& m) {
  double e = 0.0;
  for (const auto& v : m.violations) e = std::max(e, (v.lhs - v.rhs) / std::max(1.0, std::abs(v.rhs)));
  return e;
}

}  // namespace detail

inline void run_frequency(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const auto radii = c.radii.resolve();
  const auto runs = detail::run_profiles(ctx, rep, radii);
  const double quad = c.tol("quadrature", 1e-8);
  const double Cm = c.params.value("C", 1.0);
  double qmax = 0.0;
  for (const auto& r : runs) {
    const auto all = detail::rows(r.table, 0, radii.size());
    qmax = std::max(qmax, r.quad_error);
    if (r.spec.contains("expected_N_freq")) {
      const double e = detail::max_abs_error(r.f.N, r.spec.at("expected_N_freq").get<double>());
      rep.check(r.table + ".N_freq", e <= c.tol("N_abs", 1e-2), e, fmt::format("|N_freq - {}| <= {}", r.spec.at("expected_N_freq").get<double>(), c.tol("N_abs", 1e-2)), {all});
    }
    const auto m = doubling::monotonicity_audit(radii, r.f.N, doubling::MonotonicityForm::frequency, ctx.A.gamma(), Cm,
                                                {}, 10.0 * quad);
    rep.check(r.table + ".monotone", m.violations.empty(), detail::max_excess(m), fmt::format("violations <= 10 * {}", quad),
              {all});
  }
  rep.error_budget = {{"mesh_h", c.mesh_h}, {"quadrature_tol", quad}, {"quadrature_estimate", qmax}};
}

inline void run_doubling(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const auto radii = c.radii.resolve();
  const auto runs = detail::run_profiles(ctx, rep, radii);
  const double quad = c.tol("quadrature", 1e-8);
  const double Cm = c.params.value("C", 1.0);
  const double gamma = ctx.A.gamma();
  double qmax = 0.0;
  for (const auto& r : runs) {
    const auto all = detail::rows(r.table, 0, radii.size());
    qmax = std::max(qmax, r.quad_error);
    if (r.spec.contains("expected_N_doub")) {
      const double want = r.spec.at("expected_N_doub").get<double>();
      const double e = detail::max_abs_error(r.d.N, want);
      rep.check(r.table + ".N_doub", e <= c.tol("N_abs", 1e-2), e, fmt::format("|N_doub - {:.6f}| <= {}", want, c.tol("N_abs", 1e-2)), {all});
    }
    const auto m = doubling::monotonicity_audit(radii, r.d.N, doubling::MonotonicityForm::doubling, gamma, Cm, {}, 10.0 * quad);
    if (gamma == 0.0) {
      rep.check(r.table + ".epsilon_min", m.epsilon_min <= 10.0 * quad, m.epsilon_min, fmt::format("<= 10 * {}", quad), {all});
    } else {
      rep.info(r.table + ".epsilon_min", m.epsilon_min, {all});
    }
  }

  // gamma > 0: epsilon_min against the largest radius of the ladder
  if (c.params.contains("ladder_maxima")) {
    const auto maxima = c.params.at("ladder_maxima").get<std::vector<double>>();
    const int levels = c.params.value("ladder_levels", 3);
    const nlohmann::json spec = c.params.value("ladder_field", nlohmann::json{{"kind", "aharmonic"}, {"n", 2}});
    const AnyField f = ctx.field(spec);
    const Vec2 x0 = ctx.point_param("center", ctx.boundary_point());
    auto& t = rep.table("epsilon_scaling", {"r_max", "epsilon_min", "epsilon_over_r"});
    std::vector<double> ratios;
    for (double R : maxima) {
      const auto rr = doubling::dyadic_radii(R, levels);
      const auto prof = std::visit([&](const auto& u) { return doubling::doubling_profile(u, ctx.A, x0, rr); }, f);
      const auto m = doubling::monotonicity_audit(rr, prof.N, doubling::MonotonicityForm::doubling, gamma, Cm);
      t.row(R, m.epsilon_min, m.epsilon_min / R);
      ratios.push_back(m.epsilon_min / R);
    }
    const auto all = detail::rows("epsilon_scaling", 0, t.size());
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    const double factor = c.tol("epsilon_factor", 3.0);
    if (!(lo > 0.0)) {
      rep.inconclusive("epsilon_linear", hi, fmt::format("max/min of epsilon/r_max <= {}", factor), {all},
                       "epsilon vanishes on some ladder; the linear law cannot be judged");
    } else {
      rep.check("epsilon_linear", hi / lo <= factor, hi / lo, fmt::format("max/min of epsilon/r_max <= {}", factor), {all});
    }
  }
  rep.error_budget = {{"mesh_h", c.mesh_h}, {"quadrature_tol", quad}, {"quadrature_estimate", qmax}};
}

// ----------------------------------------------------------------------------------------------
// three-ball

inline void run_three_ball(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const int count = c.params.value("count", 1000);
  const int degree = c.params.value("max_degree", 6);
  const double margin = c.params.value("margin", 0.02);
  if (count < 1 || degree < 1) throw ConfigError("three-ball: count and max_degree must be >= 1");
  const auto mesh = ctx.mesh();
  const double gamma = ctx.A.gamma();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> G(0.0, 1.0);

  struct Case {
    std::vector<HarmonicTerm> terms;
    Vec2 expansion, x;
    double r1, r2, r3;
  };
  std::vector<Case> cases;
  double inner = std::numeric_limits<double>::infinity();
  for (const auto& p : ctx.domain.boundary) inner = std::min(inner, p.norm());
  for (int i = 0; i < count; ++i) {
    Case k;
    for (int n = 0; n <= degree; ++n) {
      k.terms.push_back({n, false, G(rng)});
      if (n > 0) k.terms.push_back({n, true, G(rng)});
    }
    const double a0 = 2.0 * kPi * U(rng), a1 = 2.0 * kPi * U(rng);
    const double e0 = 0.9 * inner * std::sqrt(U(rng)), e1 = 0.6 * inner * std::sqrt(U(rng));
    k.expansion = Vec2(e0 * std::cos(a0), e0 * std::sin(a0));
    k.x = Vec2(e1 * std::cos(a1), e1 * std::sin(a1));
    const double room = inner - k.x.norm() - margin;
    k.r3 = room * (0.3 + 0.7 * U(rng));
    k.r2 = k.r3 * (0.2 + 0.7 * U(rng));
    k.r1 = k.r2 * (0.2 + 0.7 * U(rng));
    cases.push_back(std::move(k));
  }
  std::vector<std::array<double, 3>> J(cases.size());
  parallel_for(cases.size(), [&](std::size_t i) {
    const auto& k = cases[i];
    const auto u = harmonic_combo(mesh, k.terms, k.expansion);
    const doubling::DoublingEvaluator<fem::AnalyticField> ev(u, ctx.A);
    J[i] = {ev.J(k.x, k.r1), ev.J(k.x, k.r2), ev.J(k.x, k.r3)};
  });
  auto& t = rep.table("random", {"case", "center_x", "center_y", "r1", "r2", "r3", "J1", "J2", "J3", "beta", "residual"});
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_row = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& k = cases[i];
    const auto tb = doubling::three_ball_residual(J[i][0], J[i][1], J[i][2], k.r1, k.r2, k.r3, gamma);
    const auto r = t.row(static_cast<int>(i), k.x.x(), k.x.y(), k.r1, k.r2, k.r3, J[i][0], J[i][1], J[i][2], tb.beta, tb.residual);
    if (tb.residual < worst) {
      worst = tb.residual;
      worst_row = r;
    }
  }
  const double floor = c.tol("residual_floor", 1e-6);
  rep.check("min_residual", worst >= -floor, worst, fmt::format(">= -{}", floor), {detail::row("random", worst_row)});
  rep.info("cases", static_cast<double>(cases.size()), {detail::rows("random", 0, t.size())});

  // homogeneous fields on geometric radii: residual vanishes
  auto& h = rep.table("homogeneous", {"n", "r1", "r2", "r3", "J1", "J2", "J3", "residual"});
  const auto ratios = c.params.value("geometric", std::vector<std::array<double, 2>>{{0.2, 2.0}, {0.3, 1.5}});
  double hmax = 0.0;
  for (int n = 1; n <= c.params.value("homogeneous_max", 5); ++n) {
    const auto u = harmonic_combo(mesh, {{n, false, 1.0}}, Vec2::Zero());
    const doubling::DoublingEvaluator<fem::AnalyticField> ev(u, ctx.A);
    for (const auto& [r1, q] : ratios) {
      const double r2 = r1 * q, r3 = r2 * q;
      const double j1 = ev.J(Vec2::Zero(), r1), j2 = ev.J(Vec2::Zero(), r2), j3 = ev.J(Vec2::Zero(), r3);
      const auto tb = doubling::three_ball_residual(j1, j2, j3, r1, r2, r3, gamma);
      h.row(n, r1, r2, r3, j1, j2, j3, tb.residual);
      hmax = std::max(hmax, std::abs(tb.residual));
    }
  }
  const double ht = c.tol("homogeneous", 1e-8);
  rep.check("homogeneous_residual", hmax <= ht, hmax, fmt::format("|residual| <= {}", ht), {detail::rows("homogeneous", 0, h.size())});
  rep.error_budget = {{"mesh_h", c.mesh_h}, {"note", "fields are analytic; the mesh only carries the domain"}};
}

// ----------------------------------------------------------------------------------------------
// flatspot

inline void run_flatspot(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const int lo = c.params.value("min_level", 3), hi = c.params.value("max_level", 10);
  if (lo < 1 || hi < lo) throw ConfigError("flatspot: need 1 <= min_level <= max_level");
  auto& t = rep.table("flatspots", {"preset", "r", "base", "defect", "ratio", "plane_valid"});
  const double bound = c.tol("ratio_bound", 2.0);
  for (const auto& phi : geometry::flat_spot_presets()) {
    const std::size_t first = t.size();
    double worst = 0.0, sq = 0.0;
    bool valid = true;
    for (int j = lo; j <= hi; ++j) {
      const double r = std::ldexp(1.0, -j);
      const auto fs = geometry::find_flat_spot(phi, r);
      const double ratio = fs.defect / (r * r);
      worst = std::max(worst, ratio);
      sq = std::max(sq, std::abs(ratio - 1.0));
      valid = valid && fs.plane_valid;
      t.row(phi.label(), r, fs.base, fs.defect, ratio, fs.plane_valid);
    }
    const auto cite = detail::rows("flatspots", first, t.size());
    rep.check(phi.label() + ".bounded", worst <= bound && valid, worst, fmt::format("defect/r^2 <= {}", bound), {cite});
    if (phi.label() == "square")
      rep.check("square.ratio_is_one", sq <= c.tol("square", 1e-6), sq, fmt::format("|ratio - 1| <= {}", c.tol("square", 1e-6)), {cite});
  }
}

// ----------------------------------------------------------------------------------------------
// hull

inline void run_hull(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const auto rs = c.params.value("r", std::vector<double>{0.05, 0.1, 0.2});
  const int density = c.params.value("density", 200);
  auto& t = rep.table("gaps", {"domain", "center_x", "center_y", "r", "gap", "omega_2r", "bound", "resolution"});
  auto centers_of = [&](const geometry::PlanarDomain& d) {
    std::vector<Vec2> out;
    for (const auto& p : d.patches) out.push_back(p.to_world(0.0, p.phi.value(0.0)));
    const std::size_t n = d.boundary.size(), step = std::max<std::size_t>(1, n / 4);
    for (std::size_t i = 0; i < n; i += step) out.push_back(d.boundary[i]);
    return out;
  };

  // the configured (quasiconvex) domain: gap <= 2 r omega(2r) + resolution
  {
    const auto d = c.make_domain();
    std::vector<double> twice;
    for (double r : rs) twice.push_back(2.0 * r);
    const auto om = geometry::estimate_modulus(d, twice);
    const std::size_t first = t.size();
    double worst = -std::numeric_limits<double>::infinity();
    const auto centers = c.params.value("all_centers", false) ? centers_of(d) : std::vector<Vec2>{centers_of(d).front()};
    for (const auto& x : centers)
      for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto g = geometry::convex_hull_gap(d, x, rs[i], density);
        const double bound = 2.0 * rs[i] * om.values[i] + g.resolution;
        worst = std::max(worst, g.gap - bound);
        t.row(d.name, x.x(), x.y(), rs[i], g.gap, om.values[i], bound, g.resolution);
      }
    rep.check(d.name + ".gap_bound", worst <= 1e-12, worst, "gap - (2 r omega(2r) + resolution) <= 0",
              {detail::rows("gaps", first, t.size())});
  }

  // convex presets: gap vanishes
  for (const auto& name : c.params.value("convex", std::vector<std::string>{"unit-square", "hexagon", "unit-disk"})) {
    const auto d = geometry::make_domain(name);
    const std::size_t first = t.size();
    double worst = 0.0;
    for (const auto& x : centers_of(d))
      for (double r : rs) {
        const auto g = geometry::convex_hull_gap(d, x, r, density);
        worst = std::max(worst, g.gap);
        t.row(name, x.x(), x.y(), r, g.gap, 0.0, 0.0, g.resolution);
      }
    const double tol = c.tol("convex_gap", 1e-10);
    rep.check(name + ".gap_zero", worst <= tol, worst, fmt::format("<= {}", tol), {detail::rows("gaps", first, t.size())});
  }
}

// ----------------------------------------------------------------------------------------------
// pathological

inline void run_pathological(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const int K = c.params.value("K", 4096);
  const int levels = c.params.value("levels", 12);
  const auto order = geometry::parse_enumeration(c.params.value("enumeration", std::string{"stern-brocot"}));
  const auto curve = geometry::pathological_curve(K, order);
  auto& t = rep.table("measure", {"j", "intervals", "nonnegative", "total"});
  std::size_t bad = 0;
  for (int j = 1; j <= levels; ++j) {
    const auto m = geometry::second_derivative_measure(curve, j);
    const auto r = t.row(j, 1 << j, m.nonnegative_count, m.total);
    if (m.nonnegative_count > static_cast<std::size_t>(j)) {
      ++bad;
      rep.check(fmt::format("level_{}", j), false, static_cast<double>(m.nonnegative_count), fmt::format("<= {}", j),
                {detail::row("measure", r)});
    }
  }
  rep.check("nonnegative_counts", bad == 0, static_cast<double>(bad), "levels with more than j nonnegative intervals == 0",
            {detail::rows("measure", 0, t.size())});

  const auto d = c.make_domain();
  std::vector<double> radii;
  const double rmax = std::min(d.r0, c.params.value("modulus_r_max", 0.25));
  for (int i = 0; i < c.params.value("modulus_levels", 6); ++i) radii.push_back(std::ldexp(rmax, -i));
  std::sort(radii.begin(), radii.end());
  const auto om = geometry::estimate_modulus(d, radii);
  auto& mt = rep.table("modulus", {"r", "omega", "bound"});
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    mt.row(radii[i], om.values[i], 2.0 * radii[i]);
    worst = std::max(worst, om.values[i] - 2.0 * radii[i]);
  }
  rep.check("omega_le_2r", worst <= 0.0, worst, "omega(r) - 2r <= 0", {detail::rows("modulus", 0, mt.size())});
}

// ----------------------------------------------------------------------------------------------
// decompose

inline geometry::Cuboid configured_cuboid(const geometry::PlanarDomain& d, const CuboidSpec& s) {
  if (d.patches.empty()) throw InvalidInput("domain has no graph patch");
  return geometry::boundary_cuboid(d.patches[0], s.s_center, s.side, s.L);
}

inline void run_decompose(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const auto d = c.make_domain();
  const auto Q = configured_cuboid(d, c.cuboid);
  const int k = c.cuboid.k;
  const auto dec = geometry::decompose_cuboid(d, Q, k);
  auto& t = rep.table("cuboids", {"kind", "column", "center_x", "center_y", "side", "half_height", "angle"});
  std::vector<geometry::Cuboid> all{Q};
  for (const auto* group : {&dec.boundary_cuboids, &dec.interior_cuboids})
    for (const auto& q : *group) {
      t.row(q.kind == geometry::CuboidKind::boundary ? "boundary" : "interior", q.column, q.center.x(), q.center.y(), q.side,
            q.half_height(), q.angle);
      all.push_back(q);
    }
  auto& ct = rep.table("columns", {"column", "cuboids"});
  int worst = 0;
  for (std::size_t j = 0; j < dec.column_counts.size(); ++j) {
    ct.row(static_cast<int>(j), dec.column_counts[j]);
    worst = std::max(worst, dec.column_counts[j]);
  }
  const std::size_t nb = dec.boundary_cuboids.size();
  const auto cite = detail::rows("cuboids", 0, t.size());
  rep.check("boundary_count", nb == (std::size_t{1} << k), static_cast<double>(nb), fmt::format("== {}", 1 << k),
            {detail::rows("cuboids", 0, nb)});
  rep.check("column_height", worst <= (1 << k) + 1, worst, fmt::format("<= {}", (1 << k) + 1),
            {detail::rows("columns", 0, ct.size())});
  rep.check("interior_distance", dec.min_interior_distance_ratio >= c.tol("distance_ratio", 0.5),
            dec.min_interior_distance_ratio, fmt::format(">= {}", c.tol("distance_ratio", 0.5)), {cite});
  rep.check("covers", dec.covers, static_cast<double>(dec.covers), "sampled Q cap Omega covered", {cite});
  rep.svgs["decomposition.svg"] = nodal::nodal_svg(d.boundary, nodal::NodalSet{}, all);
}

// ----------------------------------------------------------------------------------------------
// drop-audit

inline void run_drop_audit(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const double N0 = c.params.value("N0", 4.0);
  const double N = c.params.value("N", N0);
  const int k = c.cuboid.k;
  nlohmann::json cases = c.params.value("cases", nlohmann::json::array());
  if (cases.empty()) cases.push_back({{"mode", 1}, {"s_center", c.cuboid.s_center}, {"side", c.cuboid.side}});
  int top = 1;
  for (const auto& cs : cases) top = std::max(top, cs.value("mode", 1));
  const auto& sol = ctx.eigen(std::max(top, c.mode_count));
  doubling::MaximalOptions opt;
  opt.level = c.cuboid.level;
  opt.domain = &ctx.domain;
  auto& t = rep.table("cases", {"case", "mode", "s_center", "side", "parent_index", "branch", "rows", "drop_witnesses",
                                "zero_free_witnesses", "ratio_min", "ratio_median", "ratio_max"});
  std::size_t eligible = 0, witnessed = 0, complete = 0;
  std::vector<std::size_t> eligible_rows;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& cs = cases[i];
    const int mode = cs.value("mode", 1);
    if (mode < 1) throw ConfigError("drop-audit: mode must be >= 1");
    const auto Q = geometry::boundary_cuboid(ctx.domain.patches.at(0), cs.value("s_center", c.cuboid.s_center),
                                             cs.value("side", c.cuboid.side), cs.value("L", c.cuboid.L));
    const auto d = doubling::drop_audit(sol.fields[static_cast<std::size_t>(mode - 1)], ctx.A, ctx.domain, Q, k, N0, opt);
    const std::string name = fmt::format("case_{:02d}", i + 1);
    auto& ct = rep.table(name, {"column", "center_x", "center_y", "side", "index", "ratio", "zero_status", "min_abs",
                                "nearest_zero_distance"});
    for (const auto& r : d.rows)
      ct.row(r.q.column, r.q.center.x(), r.q.center.y(), r.q.side, r.index, r.ratio, r.zero_status, r.min_abs,
             r.nearest_zero_distance);
    if (d.rows.size() == (std::size_t{1} << k)) ++complete;
    const auto r = t.row(static_cast<int>(i + 1), mode, cs.value("s_center", c.cuboid.s_center), cs.value("side", c.cuboid.side),
                         d.parent_index, d.branch, d.rows.size(), d.drop_witnesses, d.zero_free_witnesses, d.ratio_min,
                         d.ratio_median, d.ratio_max);
    if (d.parent_index <= N) {
      ++eligible;
      eligible_rows.push_back(r);
      if (d.zero_free_witnesses > 0) ++witnessed;
    }
    log_kv({{"event", "drop-case"}, {"case", std::to_string(i + 1)}, {"parent_index", num(d.parent_index)}, {"branch", d.branch}});
  }
  const auto all = detail::rows("cases", 0, t.size());
  rep.check("complete_tables", complete == cases.size(), static_cast<double>(complete),
            fmt::format("== {} tables with {} rows", cases.size(), 1 << k), {all});
  const double rate = eligible ? static_cast<double>(witnessed) / static_cast<double>(eligible) : std::nan("");
  if (eligible == 0) {
    rep.inconclusive("zero_free_rate", rate, fmt::format(">= {}", c.tol("witness_rate", 0.9)), {all},
                     fmt::format("no configuration has N*(Q) <= {}", N));
  } else {
    rep.check("zero_free_rate", rate >= c.tol("witness_rate", 0.9), rate, fmt::format(">= {}", c.tol("witness_rate", 0.9)),
              {{"cases", eligible_rows}});
  }
  rep.info("eligible_cases", static_cast<double>(eligible), {all});
}

// ----------------------------------------------------------------------------------------------
// extension

inline void run_extension(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const auto& sol = ctx.eigen(c.mode_count);
  const Vec2 x0 = ctx.point_param("center", ctx.boundary_point());
  const double r = c.params.value("r", 0.25), t0 = c.params.value("t0", 0.0);
  doubling::ExtensionOptions opt;
  opt.t_nodes = c.params.value("t_nodes", 64);
  std::vector<doubling::ExtensionResult> res(static_cast<std::size_t>(c.mode_count));
  parallel_for(res.size(), [&](std::size_t i) {
    res[i] = doubling::extension_doubling(sol.fields[i], sol.lambdas[i], ctx.A, x0, t0, r, opt);
  });
  auto& t = rep.table("extension", {"k", "lambda", "J", "J2", "N", "truncation"});
  std::vector<std::pair<double, double>> pts;
  double trunc = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    t.row(static_cast<int>(i + 1), res[i].lambda, res[i].J, res[i].J2, res[i].N, res[i].truncation);
    trunc = std::max(trunc, res[i].truncation);
    if (std::isfinite(res[i].N) && res[i].N > 0.0) pts.emplace_back(res[i].lambda, res[i].N);
  }
  const auto all = detail::rows("extension", 0, t.size());
  if (pts.size() < 2) throw SolverError("extension: fewer than two positive doubling indices");
  const auto fit = nodal::scaling_fit(pts);
  rep.files["fit.json"] = nodal::to_json(fit).dump(2) + "\n";
  const double lo = c.tol("alpha_lo", 0.4), hi = c.tol("alpha_hi", 0.6);
  rep.check("exponent", fit.alpha >= lo && fit.alpha <= hi, fit.alpha, fmt::format("[{}, {}]", lo, hi), {all});
  rep.info("fit_residual", fit.residual, {all});
  rep.error_budget = {{"mesh_h", c.mesh_h}, {"truncation_max", trunc}, {"max_residual", detail::max_of(sol.residuals)}};
}

// ----------------------------------------------------------------------------------------------
// cauchy

inline void run_cauchy(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  CauchyOptions opt;
  opt.eps = c.params.value("eps", opt.eps);
  opt.basis_degree = c.params.value("basis_degree", opt.basis_degree);
  opt.ball = c.params.value("ball", opt.ball);
  opt.inner = c.params.value("inner", opt.inner);
  const auto res = cauchy_smallness(ctx.mesh(), ctx.domain, ctx.A, opt);
  auto& t = rep.table("ladder", {"eps", "sup_l2", "sup_pointwise"});
  for (std::size_t i = 0; i < res.eps.size(); ++i) t.row(res.eps[i], res.sup_l2[i], res.sup_pointwise[i]);
  auto& z = rep.table("zero_rung", {"eps", "null_dim", "sup_l2"});
  z.row(0.0, res.null_dim, res.sup_zero);
  const auto all = detail::rows("ladder", 0, t.size());
  const double fit_tol = c.tol("fit_residual", 0.25);
  const std::string range = "0 < tau <= 1";
  if (res.residual > fit_tol) {
    rep.inconclusive("tau", res.tau, range, {all}, fmt::format("fit residual {} above {}", num(res.residual), fit_tol));
  } else {
    rep.check("tau", res.tau > 0.0 && res.tau <= 1.0, res.tau, range, {all});
  }
  rep.info("fit_residual", res.residual, {all});
  rep.check("monotone", res.monotone, static_cast<double>(res.monotone), "sup nondecreasing in eps", {all});
  const double solver = c.tol("solver", 1e-8);
  rep.check("zero_rung", res.sup_zero <= solver, res.sup_zero, fmt::format("<= {}", solver), {detail::row("zero_rung", 0)});
  rep.extra["label"] = "analogue";
  rep.extra["tau"] = res.tau;
  rep.extra["C"] = res.C;
  rep.extra["basis_size"] = res.basis_size;
  rep.extra["gamma1_vertices"] = res.gamma1_vertices;
  rep.extra["inner_vertices"] = res.inner_vertices;
  rep.error_budget = {{"mesh_h", c.mesh_h}, {"basis_degree", opt.basis_degree}, {"fit_residual", res.residual}};
}

}  // namespace nodal_atlas::experiments
