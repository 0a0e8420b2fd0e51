#include "nodal_atlas/fem/eigen_solver.hpp"
#include "nodal_atlas/fem/mesher.hpp"
#include "nodal_atlas/nodal/export.hpp"
#include "nodal_atlas/nodal/nodal_set.hpp"
#include "nodal_atlas/nodal/scaling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace nodal_atlas;
using namespace nodal_atlas::nodal;
using fem::AnalyticField;

namespace {

std::shared_ptr<const fem::Mesh> mesh_of(const std::string& name, double h) {
  return std::make_shared<const fem::Mesh>(fem::mesh_domain(geometry::make_domain_for_mesh(name, h), h));
}

ScalarField square_mode(std::shared_ptr<const fem::Mesh> m, int a, int b) {
  return AnalyticField(m, [=](const Vec2& p) { return std::sin(a * kPi * p.x()) * std::sin(b * kPi * p.y()); },
                       [](const Vec2&) { return Vec2(0, 0); })
      .interpolate();
}

ScalarField from_fn(std::shared_ptr<const fem::Mesh> m, std::function<double(const Vec2&)> f) {
  return AnalyticField(m, std::move(f), [](const Vec2&) { return Vec2(0, 0); }).interpolate();
}

/// Dirichlet extension: boundary vertices carry exact zeros.
ScalarField dirichlet(const ScalarField& u) {
  Eigen::VectorXd v = u.values();
  for (std::size_t i = 0; i < u.mesh().num_vertices(); ++i)
    if (u.mesh().on_boundary[i]) v[static_cast<Eigen::Index>(i)] = 0.0;
  return ScalarField(u.mesh_ptr(), v);
}

ScalarField scaled(const ScalarField& u, double c) { return ScalarField(u.mesh_ptr(), c * u.values()); }

const double kJ11 = 3.8317059702075125;

}  // namespace

TEST(Extract, SquareModeLines) {
  const auto mesh = mesh_of("unit-square", 0.005);
  const auto Z21 = extract_nodal(square_mode(mesh, 2, 1));
  EXPECT_NEAR(Z21.length, 1.0, 0.02);
  EXPECT_EQ(Z21.component_count, 1);
  const auto Z33 = extract_nodal(square_mode(mesh, 3, 3));
  EXPECT_NEAR(Z33.length, 4.0, 0.08);
  const auto quarter = Region::polygon({{0, 0}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}});
  EXPECT_NEAR(nodal_length(Z33, quarter), 1.0, 0.02);
  EXPECT_NEAR(extract_nodal(square_mode(mesh, 3, 3), quarter).length, nodal_length(Z33, quarter), 1e-12);
}

TEST(Extract, DiskDiameter) {
  const auto mesh = mesh_of("unit-disk", 0.02);
  const auto u = dirichlet(from_fn(mesh, [](const Vec2& p) {
    const double r = p.norm();
    return r == 0.0 ? 0.0 : std::cyl_bessel_j(1.0, kJ11 * r) * p.x() / r;
  }));
  const auto Z = extract_nodal(u);
  EXPECT_NEAR(Z.length, 2.0, 0.05);
  EXPECT_EQ(Z.component_count, 1);
}

TEST(Extract, SegmentsInsideTrianglesAndZeroAtEnds) {
  const auto mesh = mesh_of("hexagon", 0.05);
  const auto u = from_fn(mesh, [](const Vec2& p) { return std::sin(3.0 * p.x()) * std::cos(2.0 * p.y()) + 0.1; });
  const auto Z = extract_nodal(u);
  ASSERT_FALSE(Z.segments.empty());
  double total = 0.0;
  for (std::size_t i = 0; i < Z.segments.size(); ++i) {
    const auto& s = Z.segments[i];
    if (i) EXPECT_LT(Z.segments[i - 1].triangle, s.triangle);
    const auto t = static_cast<std::size_t>(s.triangle);
    for (const Vec2& p : {s.a, s.b}) {
      EXPECT_NEAR(u.value_in(t, p), 0.0, 1e-12);
      const auto& T = mesh->triangles[t];
      const Vec2 v[3] = {mesh->vertices[T[0]], mesh->vertices[T[1]], mesh->vertices[T[2]]};
      EXPECT_TRUE(fem::detail::in_triangle(p, v, 1e-12));
    }
    total += s.length();
  }
  EXPECT_DOUBLE_EQ(total, Z.length);
}

TEST(Extract, ScaleInvariance) {
  const auto mesh = mesh_of("unit-square", 0.05);
  // vanishes exactly on grid lines, exercising the zero-vertex rule
  const auto u = from_fn(mesh, [](const Vec2& p) { return (p.x() - 0.5) * (p.y() - 0.25) * std::sin(kPi * p.x()); });
  const auto Z = extract_nodal(u);
  ASSERT_FALSE(Z.segments.empty());
  for (double c : {-1.0, 1e-6, 1e6}) {
    const auto Zc = extract_nodal(scaled(u, c));
    ASSERT_EQ(Zc.segments.size(), Z.segments.size()) << c;
    for (std::size_t i = 0; i < Z.segments.size(); ++i) {
      EXPECT_EQ(Zc.segments[i].triangle, Z.segments[i].triangle);
      const double tol = c == -1.0 ? 0.0 : 1e-14;
      EXPECT_LE((Zc.segments[i].a - Z.segments[i].a).norm(), tol);
      EXPECT_LE((Zc.segments[i].b - Z.segments[i].b).norm(), tol);
    }
  }
  // the crossing at (0.5, 0.25) is resolved into two corners cut across one cell
  EXPECT_NEAR(Z.length, 2.0 - 2.0 * (2.0 - std::sqrt(2.0)) * 0.05, 1e-12);
  EXPECT_EQ(Z.component_count, 2);
}

TEST(Extract, RejectsVanishingField) {
  const auto mesh = mesh_of("unit-square", 0.1);
  EXPECT_THROW(extract_nodal(from_fn(mesh, [](const Vec2&) { return 0.0; })), InvalidInput);
  const auto u = from_fn(mesh, [](const Vec2& p) { return p.x() > 0.5 ? p.x() - 0.5 : 0.0; });
  EXPECT_THROW(extract_nodal(u, Region::polygon({{0, 0}, {0.3, 0}, {0.3, 0.3}, {0, 0.3}})), InvalidInput);
}

TEST(Length, TrivialCases) {
  NodalSet empty;
  EXPECT_EQ(nodal_length(empty), 0.0);
  NodalSet one;
  one.segments.push_back({Vec2(0, 0), Vec2(1, 0), 0});
  EXPECT_DOUBLE_EQ(nodal_length(one, Region::polygon({{-1, -1}, {2, -1}, {2, 1}, {-1, 1}})), 1.0);
  EXPECT_NEAR(nodal_length(one, Region::disk(Vec2(0, 0), 0.5)), 0.5, 1e-15);
}

TEST(Length, RefinementStable) {
  const double a = extract_nodal(square_mode(mesh_of("unit-square", 0.01), 2, 1)).length;
  const double b = extract_nodal(square_mode(mesh_of("unit-square", 0.005), 2, 1)).length;
  EXPECT_LT(std::abs(a - b) / b, 0.005);
}

TEST(Length, AdditiveOverPartition) {
  const auto mesh = mesh_of("unit-square", 0.02);
  const auto Z = extract_nodal(from_fn(mesh, [](const Vec2& p) { return std::sin(5.0 * p.x() + 3.0 * p.y()) - 0.2 * p.x(); }));
  double sum = 0.0;
  for (const auto& [x0, y0, x1, y1] : std::vector<std::array<double, 4>>{
           {0, 0, 0.37, 0.61}, {0.37, 0, 1, 0.61}, {0, 0.61, 0.37, 1}, {0.37, 0.61, 1, 1}})
    sum += nodal_length(Z, Region::polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}));
  EXPECT_NEAR(sum, Z.length, 1e-10);
}

TEST(ZeroFree, LinearFieldAtFlatBoundary) {
  const auto mesh = mesh_of("half-disk", 0.05);
  const auto u = from_fn(mesh, [](const Vec2& p) { return p.y(); });
  for (double x : {-0.4, 0.0, 0.3}) {
    const auto reg = Region::disk(Vec2(x, 0.0), 0.2);
    const auto rep = zero_free_audit(u, reg);
    EXPECT_TRUE(rep.zero_free);
    EXPECT_GT(rep.min_abs, 0.0);
    EXPECT_TRUE(extract_nodal(u, reg).segments.empty());
  }
}

TEST(ZeroFree, SignChangeReachesBoundary) {
  const auto mesh = mesh_of("half-plane-box", 0.05);
  const auto u = from_fn(mesh, [](const Vec2& p) { return 2.0 * p.x() * p.y(); });
  const auto rep = zero_free_audit(u, Region::disk(Vec2::Zero(), 0.3));
  EXPECT_FALSE(rep.zero_free);
  EXPECT_NEAR(rep.nearest_zero_distance, 0.0, 1e-12);
}

TEST(ZeroFree, EigenmodeBoundaryLayer) {
  const auto mesh = mesh_of("unit-square", 0.02);
  const auto u = square_mode(mesh, 1, 2);
  const auto rep = zero_free_audit(u, Region::disk(Vec2(0.5, 0.0), 0.6));
  EXPECT_FALSE(rep.zero_free);
  EXPECT_GT(rep.nearest_zero_distance, 0.1);
  EXPECT_LT(rep.nearest_zero_distance, 0.2);
}

TEST(Courant, SquareModes) {
  const auto mesh = mesh_of("unit-square", 0.05);
  const auto sol = fem::solve_eigs(mesh, fem::CoefficientField::identity(), 20);
  for (int k = 1; k <= 20; ++k) EXPECT_LE(count_nodal_domains(sol.fields[static_cast<std::size_t>(k - 1)]), k) << k;
  EXPECT_EQ(count_nodal_domains(sol.fields[0]), 1);
}

TEST(Scaling, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double lam : {1.0, 4.0, 10.0, 100.0, 1234.5}) pts.emplace_back(lam, std::sqrt(lam));
  const auto f = scaling_fit(pts);
  EXPECT_NEAR(f.alpha, 0.5, 1e-10);
  EXPECT_NEAR(f.C, 1.0, 1e-10);
  EXPECT_NEAR(f.residual, 0.0, 1e-10);
}

TEST(Scaling, RejectsDegenerateInput) {
  EXPECT_THROW(scaling_fit({{2.0, 1.0}}), InvalidInput);
  EXPECT_THROW(scaling_fit({{2.0, 1.0}, {2.0, 3.0}}), InvalidInput);
  EXPECT_THROW(scaling_fit({{2.0, 1.0}, {3.0, 0.0}}), InvalidInput);
  EXPECT_THROW(scaling_fit({{-2.0, 1.0}, {3.0, 1.0}}), InvalidInput);
}

TEST(Scaling, ClosedFormSquareTable) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& m : square_modes(40))
    if (m.length > 0.0) pts.emplace_back(m.lambda, m.length);
  const auto f = scaling_fit(pts);
  EXPECT_GE(f.alpha, 0.45);
  EXPECT_LE(f.alpha, 0.6);
}

TEST(Export, CsvSvgJson) {
  const auto mesh = mesh_of("unit-square", 0.1);
  const auto Z = extract_nodal(square_mode(mesh, 2, 1));
  const auto dir = std::filesystem::temp_directory_path();
  write_nodal_csv(Z, (dir / "na_nodal.csv").string());
  std::ifstream in(dir / "na_nodal.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x1,y1,x2,y2,triangle_id");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, Z.segments.size());

  const auto svg = nodal_svg(geometry::unit_square().boundary, Z);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(static_cast<std::size_t>(std::count(svg.begin(), svg.end(), '\n')), Z.segments.size() + 5);

  const auto f = scaling_fit({{1.0, 2.0}, {4.0, 4.0}});
  const auto g = scaling_fit_from_json(nlohmann::json::parse(to_json(f).dump()));
  EXPECT_EQ(g.alpha, f.alpha);
  EXPECT_EQ(g.points, f.points);
}
