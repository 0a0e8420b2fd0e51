#include "nodal_atlas/fem/eigen_solver.hpp"
#include "nodal_atlas/fem/harmonic.hpp"
#include "nodal_atlas/fem/mesher.hpp"
#include "nodal_atlas/fem/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace nodal_atlas;
using namespace nodal_atlas::fem;

namespace {

std::shared_ptr<const Mesh> mesh_of(const std::string& name, double h) {
  return std::make_shared<const Mesh>(mesh_domain(geometry::make_domain_for_mesh(name, h), h));
}

}  // namespace

TEST(Mesh, SquareStructuredCount) {
  const auto m = mesh_domain(geometry::unit_square(), 0.1);
  EXPECT_EQ(m.num_triangles(), 200u);
  EXPECT_NEAR(m.total_area(), 1.0, 1e-12);
  EXPECT_GE(m.min_angle_degrees(), 20.0);
}

TEST(Mesh, DiskVerticesInside) {
  const auto d = geometry::make_domain_for_mesh("unit-disk", 0.05);
  const auto m = mesh_domain(d, 0.05);
  for (const auto& p : m.vertices) EXPECT_LE(p.norm(), 1.0 + 1e-12);
  for (const auto& e : m.boundary) {
    const Vec2 a = m.vertices[e.a], b = m.vertices[e.b];
    EXPECT_LT(geometry::distance_to_boundary(a, d.boundary), 1e-12);
    EXPECT_LT(geometry::distance_to_boundary(b, d.boundary), 1e-12);
  }
  EXPECT_NEAR(m.total_area(), std::abs(geometry::signed_area(d.boundary)), 1e-10);
  EXPECT_GE(m.min_angle_degrees(), 20.0);
}

TEST(Mesh, RejectsCoarseH) { EXPECT_THROW(mesh_domain(geometry::hexagon(), 2.0), InvalidInput); }

TEST(Mesh, Deterministic) {
  const auto a = mesh_domain(geometry::make_domain_for_mesh("parabola", 0.05), 0.05);
  const auto b = mesh_domain(geometry::make_domain_for_mesh("parabola", 0.05), 0.05);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(Mesh, JsonRoundTrip) {
  const auto m = mesh_domain(geometry::hexagon(), 0.2);
  const auto path = std::filesystem::temp_directory_path() / "nodal_atlas_mesh_rt.json";
  save_mesh(m, path.string());
  const auto back = load_mesh(path.string());
  EXPECT_EQ(back.to_json().dump(), m.to_json().dump());
  std::filesystem::remove(path);
}

TEST(Assembly, ReferenceElement) {
  const auto K = element_stiffness({0, 0}, {1, 0}, {0, 1}, Mat2::Identity());
  Eigen::Matrix3d expect;
  expect << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  EXPECT_LT((K - expect).cwiseAbs().maxCoeff(), 1e-15);
  const auto M = element_mass({0, 0}, {1, 0}, {0, 1});
  EXPECT_NEAR(M.sum(), 0.5, 1e-15);
  EXPECT_NEAR(M(0, 0), 1.0 / 12.0, 1e-15);
}

TEST(Assembly, LinearInA) {
  const auto m = mesh_domain(geometry::hexagon(), 0.1);
  const auto a = assemble(m, CoefficientField::identity());
  const auto b = assemble(m, CoefficientField::constant(2.0 * Mat2::Identity()));
  EXPECT_LT(Eigen::MatrixXd(b.K - 2.0 * a.K).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Assembly, ConstantsInKernelAndDefiniteness) {
  const auto m = mesh_domain(geometry::make_domain_for_mesh("parabola", 0.08), 0.08);
  const auto A = CoefficientField::shear(CoefficientField::Kind::linear_shear, 0.2, Vec2(0, 0.5), 2.0);
  const auto ops = assemble(m, A);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(ops.K.rows());
  EXPECT_LT((ops.K * one).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((ops.K - Eigen::SparseMatrix<double>(ops.K.transpose())).norm(), 1e-13);
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd v(ops.K.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = nd(gen);
    EXPECT_GE(v.dot(ops.K * v), -1e-12 * v.squaredNorm());
    EXPECT_GT(v.dot(ops.M * v), 0.0);
  }
}

TEST(Assembly, RejectsIndefiniteSample) {
  const auto m = mesh_domain(geometry::unit_square(), 0.1);
  // ellipticity only guaranteed within radius 0.5 of the origin; the far corner leaves it
  const auto A = CoefficientField::shear(CoefficientField::Kind::linear_shear, 1.5, Vec2(0, 0), 0.5);
  try {
    assemble(m, A);
    FAIL() << "expected rejection";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("at ("), std::string::npos);
  }
}

TEST(Eigen, SquareSpectrum) {
  const auto mesh = mesh_of("unit-square", 0.02);
  const auto sol = solve_eigs(mesh, CoefficientField::identity(), 10);
  std::vector<double> exact;
  for (int m = 1; m <= 6; ++m)
    for (int n = 1; n <= 6; ++n) exact.push_back(kPi * kPi * (m * m + n * n));
  std::sort(exact.begin(), exact.end());
  ASSERT_EQ(sol.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(sol.lambdas[i] / exact[i], 1.0, 0.01) << "mode " << i + 1;
  EXPECT_NEAR(sol.lambdas[0], 2 * kPi * kPi, 0.01 * 2 * kPi * kPi);
}

TEST(Eigen, DiskFirstEigenvalue) {
  const auto mesh = mesh_of("unit-disk", 0.04);
  const auto sol = solve_eigs(mesh, CoefficientField::identity(), 3);
  const double j01 = 2.404825557695773;
  EXPECT_NEAR(sol.lambdas[0] / (j01 * j01), 1.0, 0.015);
}

TEST(Eigen, ScalingWithA) {
  const auto mesh = mesh_of("unit-square", 0.05);
  const auto a = solve_eigs(mesh, CoefficientField::identity(), 6);
  const auto b = solve_eigs(mesh, CoefficientField::constant(2.0 * Mat2::Identity()), 6);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(b.lambdas[i], 2.0 * a.lambdas[i], 1e-8 * a.lambdas[i]);
}

TEST(Eigen, SecondOrderConvergence) {
  double prev = 0.0;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto sol = solve_eigs(mesh_of("unit-square", h), CoefficientField::identity(), 1);
    const double err = std::abs(sol.lambdas[0] - 2 * kPi * kPi);
    if (prev > 0.0) {
      EXPECT_GE(prev / err, 3.5) << "h = " << h;
    }
    prev = err;
  }
}

TEST(Eigen, RayleighConsistencyAndNormalization) {
  const auto mesh = mesh_of("hexagon", 0.06);
  const auto A = CoefficientField::shear(CoefficientField::Kind::sine_shear, 0.1, Vec2::Zero(), 1.5);
  const auto sol = solve_eigs(mesh, A, 12);
  const auto ops = assemble(*mesh, A);
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const auto& v = sol.fields[i].values();
    const double rq = v.dot(ops.K * v) / v.dot(ops.M * v);
    EXPECT_LE(std::abs(rq - sol.lambdas[i]) / sol.lambdas[i], 1e-8);
    EXPECT_NEAR(v.dot(ops.M * v), 1.0, 1e-10);
    if (i > 0) {
      EXPECT_LE(sol.lambdas[i - 1], sol.lambdas[i]);
    }
    for (std::size_t k = 0; k < mesh->num_vertices(); ++k)
      if (mesh->on_boundary[k]) {
        EXPECT_EQ(v[static_cast<Eigen::Index>(k)], 0.0);
      }
  }
  EXPECT_EQ(sol.method, "subspace");
}

TEST(Eigen, DenseAndSubspaceAgree) {
  const auto mesh = mesh_of("hexagon", 0.08);
  EigenOptions dense;
  dense.dense_limit = 100000;
  EigenOptions iter;
  iter.dense_limit = 0;
  const auto a = solve_eigs(mesh, CoefficientField::identity(), 5, dense);
  const auto b = solve_eigs(mesh, CoefficientField::identity(), 5, iter);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(a.lambdas[i], b.lambdas[i], 1e-9 * a.lambdas[i]);
}

TEST(Eigen, SignConventionAndCountLimit) {
  const auto mesh = mesh_of("unit-square", 0.25);
  EXPECT_THROW(solve_eigs(mesh, CoefficientField::identity(), 10), InvalidInput);
  const auto sol = solve_eigs(mesh, CoefficientField::identity(), 3);
  for (const auto& f : sol.fields) {
    const double big = f.max_abs();
    for (std::size_t k = 0; k < mesh->num_vertices(); ++k) {
      const double v = f.values()[static_cast<Eigen::Index>(k)];
      if (!mesh->on_boundary[k] && std::abs(v) > 1e-6 * big) {
        EXPECT_GT(v, 0.0);
        break;
      }
    }
  }
}

TEST(Eigen, Export) {
  const auto mesh = mesh_of("unit-square", 0.25);
  const auto sol = solve_eigs(mesh, CoefficientField::identity(), 2);
  const auto stem = std::filesystem::temp_directory_path() / "nodal_atlas_eigs";
  save_eigen_solution(sol, stem);
  std::ifstream js(stem.string() + ".json");
  nlohmann::json j;
  js >> j;
  EXPECT_EQ(j["metadata"]["domain"], "unit-square");
  EXPECT_EQ(j["lambdas"].size(), 2u);
  std::ifstream csv(stem.string() + ".csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "vertex,x,y,mode_1,mode_2");
}

TEST(Harmonic, ZeroData) {
  const auto mesh = mesh_of("hexagon", 0.1);
  const auto u = solve_aharmonic_from(mesh, CoefficientField::identity(), [](const Vec2&) { return 0.0; });
  EXPECT_EQ(u.max_abs(), 0.0);
}

TEST(Harmonic, QuadraticHarmonicsConverge) {
  for (int which = 0; which < 2; ++which) {
    auto g = [which](const Vec2& p) { return which == 0 ? p.x() * p.x() - p.y() * p.y() : 2.0 * p.x() * p.y(); };
    double prev = 0.0;
    for (double h : {0.1, 0.05}) {
      const auto mesh = mesh_of("parabola", h);
      const auto u = solve_aharmonic_from(mesh, CoefficientField::identity(), g);
      double err = 0.0;
      for (std::size_t k = 0; k < mesh->num_vertices(); ++k)
        err = std::max(err, std::abs(u.values()[static_cast<Eigen::Index>(k)] - g(mesh->vertices[k])));
      EXPECT_LT(err, 0.5 * h * h);
      if (prev > 1e-12) {
        EXPECT_LT(err, prev);
      }
      prev = err;
    }
  }
}

TEST(Harmonic, MaximumPrinciple) {
  const auto mesh = mesh_of("unit-disk", 0.08);
  auto g = [](const Vec2& p) { return std::sin(5 * std::atan2(p.y(), p.x())) + 0.3 * p.x(); };
  const auto u = solve_aharmonic_from(mesh, CoefficientField::identity(), g);
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = 0; k < mesh->num_vertices(); ++k)
    if (mesh->on_boundary[k]) {
      lo = std::min(lo, u.values()[static_cast<Eigen::Index>(k)]);
      hi = std::max(hi, u.values()[static_cast<Eigen::Index>(k)]);
    }
  EXPECT_GE(u.values().minCoeff(), lo - 1e-12);
  EXPECT_LE(u.values().maxCoeff(), hi + 1e-12);
}

TEST(Quadrature, DiskArea) {
  const auto mesh = mesh_of("unit-square", 0.05);
  const TriangleIndex idx(*mesh);
  const ScalarField u(mesh, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh->num_vertices())));
  const auto A = CoefficientField::identity();
  for (double r : {0.1, 0.2337, 0.4}) {
    const auto q = integrate_region(Integrand::one, Region::disk({0.5, 0.5}, r), u, A, idx);
    EXPECT_NEAR(q.value / (kPi * r * r), 1.0, 1e-4);
    EXPECT_LT(q.error, 1e-8);
    EXPECT_FALSE(q.empty);
  }
  // ellipse: area pi r^2 det S
  Mat2 S;
  S << 1.3, 0.2, 0.2, 0.8;
  const auto e = integrate_region(Integrand::one, Region::ellipse({0.5, 0.5}, S, 0.3), u, A, idx);
  EXPECT_NEAR(e.value / (kPi * 0.09 * S.determinant()), 1.0, 1e-10);
}

TEST(Quadrature, CircleLength) {
  const auto mesh = mesh_of("hexagon", 0.07);
  const TriangleIndex idx(*mesh);
  const ScalarField u(mesh, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh->num_vertices())));
  const auto q = integrate_circle(Integrand::one, Vec2(0.05, -0.02), 0.3, u, CoefficientField::identity(), idx);
  EXPECT_NEAR(q.value / (2 * kPi * 0.3), 1.0, 1e-6);
  const auto out = integrate_circle(Integrand::one, Vec2(5, 5), 0.3, u, CoefficientField::identity(), idx);
  EXPECT_EQ(out.value, 0.0);
  EXPECT_TRUE(out.empty);
  const auto none = integrate_region(Integrand::one, Region::disk({5, 5}, 0.3), u, CoefficientField::identity(), idx);
  EXPECT_EQ(none.value, 0.0);
  EXPECT_TRUE(none.empty);
}

TEST(Quadrature, OddSymmetryOnHalfDisk) {
  const auto mesh = mesh_of("half-disk", 0.05);
  const TriangleIndex idx(*mesh);
  const auto u = AnalyticField(mesh, [](const Vec2& p) { return p.x(); }, [](const Vec2&) { return Vec2(1, 0); }).interpolate();
  const auto q = integrate_region(Integrand::u, Region::disk({0, 0}, 0.6), u, CoefficientField::identity(), idx);
  EXPECT_NEAR(q.value, 0.0, 1e-12);
}

TEST(Quadrature, WeightedCircleOnHalfPlane) {
  const auto mesh = mesh_of("half-plane-box", 0.05);
  const TriangleIndex idx(*mesh);
  const auto u = AnalyticField(mesh, [](const Vec2& p) { return p.y(); }, [](const Vec2&) { return Vec2(0, 1); }).interpolate();
  for (double r : {0.1, 0.3, 0.5}) {
    const auto q = integrate_circle(Integrand::mu_u2, Vec2::Zero(), r, u, CoefficientField::identity(), idx);
    EXPECT_NEAR(q.value, kPi * r * r * r / 2.0, 1e-4 * r * r * r);
    const auto d = integrate_region(Integrand::energy, Region::disk({0, 0}, r), u, CoefficientField::identity(), idx);
    EXPECT_NEAR(d.value, kPi * r * r / 2.0, 1e-10);
  }
}

TEST(Quadrature, MonteCarloCorner) {
  const auto mesh = mesh_of("unit-square", 0.05);
  const TriangleIndex idx(*mesh);
  const auto u = AnalyticField(
                     mesh, [](const Vec2& p) { return std::sin(3 * p.x()) + p.y() * p.y(); },
                     [](const Vec2& p) { return Vec2(3 * std::cos(3 * p.x()), 2 * p.y()); })
                     .interpolate();
  const double r = 0.35;
  const auto q = integrate_region(Integrand::u2, Region::disk({0, 0}, r), u, CoefficientField::identity(), idx);
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> U(0.0, r);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec2 p(U(gen), U(gen));
    double v = 0.0;
    if (p.norm() <= r) {
      const int t = idx.locate(p, 1e-10);
      ASSERT_GE(t, 0);
      const double w = u.value_in(static_cast<std::size_t>(t), p);
      v = w * w;
    }
    s += v;
    s2 += v * v;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  const double est = mean * r * r, se = std::sqrt(var / n) * r * r;
  EXPECT_LE(std::abs(q.value - est), 3.0 * se) << q.value << " vs " << est << " +- " << se;
}

TEST(Quadrature, AdditiveOverPartition) {
  const auto mesh = mesh_of("hexagon", 0.06);
  const TriangleIndex idx(*mesh);
  const auto u = harmonic_power(mesh, 3, false).interpolate();
  const auto A = CoefficientField::identity();
  auto rect = [](double x0, double y0, double x1, double y1) {
    return geometry::Polyline{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  };
  const double whole = integrate_region(Integrand::u2, Region::polygon(rect(-0.4, -0.3, 0.4, 0.5)), u, A, idx).value;
  double parts = 0.0;
  for (auto [x0, x1] : {std::pair{-0.4, 0.1}, std::pair{0.1, 0.4}})
    for (auto [y0, y1] : {std::pair{-0.3, 0.2}, std::pair{0.2, 0.5}})
      parts += integrate_region(Integrand::u2, Region::polygon(rect(x0, y0, x1, y1)), u, A, idx).value;
  EXPECT_NEAR(whole, parts, 1e-12 * std::abs(whole));
  // monotone in the region for nonnegative integrands
  double prev = 0.0;
  for (double r : {0.1, 0.2, 0.3, 0.5, 0.9}) {
    const double v = integrate_region(Integrand::u2, Region::disk({0.1, 0.0}, r), u, A, idx).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Quadrature, HomogeneousHarmonicClosedForms) {
  // J(r) = pi r^{2n+2} / (2n+2) for Re z^n in an interior disk
  const auto mesh = mesh_of("unit-disk", 0.05);
  const TriangleIndex idx(*mesh);
  for (int n = 1; n <= 5; ++n) {
    const auto u = harmonic_power(mesh, n, false);
    const double r = 0.4;
    const auto q = integrate_region(Integrand::u2, Region::disk({0, 0}, r), u, CoefficientField::identity(), idx);
    EXPECT_NEAR(q.value / (kPi * std::pow(r, 2 * n + 2) / (2 * n + 2)), 1.0, 1e-10) << n;
  }
}
