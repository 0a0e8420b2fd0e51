#include "nodal_atlas/doubling/audits.hpp"
#include "nodal_atlas/doubling/extension.hpp"
#include "nodal_atlas/doubling/maximal.hpp"
#include "nodal_atlas/fem/mesher.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace nodal_atlas;
using namespace nodal_atlas::doubling;
using fem::AnalyticField;
using fem::CoefficientField;

namespace {

std::shared_ptr<const fem::Mesh> mesh_of(const std::string& name, double h) {
  return std::make_shared<const fem::Mesh>(fem::mesh_domain(geometry::make_domain_for_mesh(name, h), h));
}

AnalyticField linear_y(std::shared_ptr<const fem::Mesh> m) {
  return AnalyticField(m, [](const Vec2& p) { return p.y(); }, [](const Vec2&) { return Vec2(0, 1); });
}

const double kLn2 = std::log(2.0);

}  // namespace

TEST(MatrixSqrt, ClosedForms) {
  EXPECT_LT((matrix_sqrt(Mat2::Identity()) - Mat2::Identity()).norm(), 1e-15);
  for (auto m : {SqrtMethod::spectral, SqrtMethod::series}) {
    const Mat2 S = matrix_sqrt(Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix(), m);
    EXPECT_NEAR(S(0, 0), 2.0, 1e-10);
    EXPECT_NEAR(S(1, 1), 1.0, 1e-10);
    EXPECT_NEAR(S(0, 1), 0.0, 1e-10);
  }
}

TEST(MatrixSqrt, RandomSpdCrossMethod) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ev(0.5, 2.0), ang(0.0, kPi);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 R = rotation(ang(rng));
    const Mat2 A = R * Eigen::Vector2d(ev(rng), ev(rng)).asDiagonal() * R.transpose();
    const Mat2 As = 0.5 * (A + A.transpose());
    const Mat2 S1 = matrix_sqrt(As, SqrtMethod::spectral);
    const Mat2 S2 = matrix_sqrt(As, SqrtMethod::series);
    EXPECT_LT((S1 * S1 - As).norm(), 1e-10);
    EXPECT_LT((S2 * S2 - As).norm(), 1e-10);
    EXPECT_LT((S1 - S2).norm(), 1e-8);
    EXPECT_EQ(S1(0, 1), S1(1, 0));
  }
}

TEST(MatrixSqrt, RejectsBadInput) {
  Mat2 ns;
  ns << 1, 0.5, 0, 1;
  EXPECT_THROW(matrix_sqrt(ns), InvalidInput);
  EXPECT_THROW(matrix_sqrt(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix()), InvalidInput);
  EXPECT_THROW(parse_sqrt_method("cholesky"), InvalidInput);
}

TEST(Ellipsoid, SandwichedBetweenBalls) {
  Mat2 A;
  A << 2.0, 0.3, 0.3, 0.7;
  const double Lambda = 2.2;
  const Ellipsoid E{Vec2(0.1, -0.2), matrix_sqrt(A), 0.5};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 y = E.center + 1.2 * Vec2(U(rng), U(rng));
    const double d = (y - E.center).norm();
    if (d <= E.radius / std::sqrt(Lambda)) EXPECT_TRUE(E.contains(y));
    if (E.contains(y)) EXPECT_LE(d, E.radius * std::sqrt(Lambda));
  }
}

TEST(Frequency, LinearFieldOnHalfPlane) {
  const auto mesh = mesh_of("half-plane-box", 0.05);
  const auto u = linear_y(mesh);
  const auto p = frequency_profile(u, CoefficientField::identity(), Vec2::Zero(), dyadic_radii(0.4, 3));
  for (std::size_t i = 0; i < p.radii.size(); ++i) {
    const double r = p.radii[i];
    EXPECT_NEAR(p.H[i] / (kPi * r * r * r / 2.0), 1.0, 1e-4);
    EXPECT_NEAR(p.D[i] / (kPi * r * r / 2.0), 1.0, 1e-8);
    EXPECT_NEAR(p.N[i], 1.0, 1e-4);
    EXPECT_LT(p.hd_residual[i] * r, 1e-3);
    EXPECT_EQ(p.flags[i], "ok");
  }
  EXPECT_DOUBLE_EQ(p.mu_min, 1.0);
  EXPECT_DOUBLE_EQ(p.mu_max, 1.0);
}

TEST(Frequency, HomogeneousHarmonicsOnHalfDisk) {
  const auto mesh = mesh_of("half-disk", 0.05);
  const auto A = CoefficientField::identity();
  const auto radii = dyadic_radii(0.4, 3);
  for (int n = 1; n <= 5; ++n) {
    const auto u = fem::harmonic_power(mesh, n, true);
    const auto f = frequency_profile(u, A, Vec2::Zero(), radii);
    const auto d = doubling_profile(u, A, Vec2::Zero(), radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      EXPECT_NEAR(f.N[i], n, 1e-2) << "n=" << n << " r=" << radii[i];
      EXPECT_NEAR(d.N[i], (2 * n + 2) * kLn2, 1e-2) << "n=" << n << " r=" << radii[i];
    }
  }
}

TEST(Frequency, DegenerateRadiusFlagged) {
  const auto mesh = mesh_of("unit-square", 0.05);
  const AnalyticField u(mesh, [](const Vec2& p) { return p.x() < 0.7 ? 0.0 : p.x() - 0.7; },
                        [](const Vec2& p) { return p.x() < 0.7 ? Vec2(0, 0) : Vec2(1, 0); });
  const auto p = frequency_profile(u, CoefficientField::identity(), Vec2(0.3, 0.5), {0.1, 0.2, 0.45});
  EXPECT_EQ(p.flags[0], "degenerate");
  EXPECT_TRUE(std::isnan(p.N[0]));
  EXPECT_EQ(p.flags[2], "ok");
  EXPECT_GT(p.N[2], 0.0);
}

TEST(Doubling, LinearFieldAtBoundary) {
  const auto mesh = mesh_of("half-plane-box", 0.05);
  const auto p = doubling_profile(linear_y(mesh), CoefficientField::identity(), Vec2::Zero(), dyadic_radii(0.4, 4));
  for (std::size_t i = 0; i < p.radii.size(); ++i) {
    EXPECT_NEAR(p.J[i] / (kPi * std::pow(p.radii[i], 4) / 8.0), 1.0, 1e-8);
    EXPECT_NEAR(p.N[i], 4.0 * kLn2, 1e-6);
  }
}

TEST(Doubling, HomogeneousHarmonicInterior) {
  const auto mesh = mesh_of("unit-disk", 0.05);
  for (int n = 1; n <= 5; ++n) {
    const auto p = doubling_profile(fem::harmonic_power(mesh, n, false), CoefficientField::identity(), Vec2::Zero(),
                                    dyadic_radii(0.4, 3));
    for (double N : p.N) EXPECT_NEAR(N, (2 * n + 2) * kLn2, 1e-2) << n;
  }
}

TEST(Doubling, MuRangeAndMonotoneJ) {
  const auto mesh = mesh_of("unit-square", 0.05);
  const auto u = AnalyticField(mesh, [](const Vec2& p) { return std::sin(kPi * p.x()) * std::sin(2 * kPi * p.y()) + 0.3; },
                               [](const Vec2& p) {
                                 return Vec2(kPi * std::cos(kPi * p.x()) * std::sin(2 * kPi * p.y()),
                                             2 * kPi * std::sin(kPi * p.x()) * std::cos(2 * kPi * p.y()));
                               });
  const auto A = CoefficientField::shear(CoefficientField::Kind::sine_shear, 0.3, Vec2(0.5, 0.5), 1.0);
  std::vector<double> radii;
  for (int i = 1; i <= 12; ++i) radii.push_back(0.02 * i);
  const auto p = doubling_profile(u, A, Vec2(0.4, 0.45), radii);
  EXPECT_GE(p.mu_min, 1.0 / A.Lambda() - 1e-12);
  EXPECT_LE(p.mu_max, A.Lambda() + 1e-12);
  EXPECT_LT(p.mu_min, 1.0);
  for (std::size_t i = 1; i < p.J.size(); ++i) EXPECT_GE(p.J[i], p.J[i - 1]);

  Mat2 C;
  C << 1.5, 0.2, 0.2, 0.8;
  const auto pc = doubling_profile(u, CoefficientField::constant(C), Vec2(0.4, 0.45), radii);
  EXPECT_NEAR(pc.mu_min, 1.0, 1e-12);
  EXPECT_NEAR(pc.mu_max, 1.0, 1e-12);
}

TEST(Doubling, RejectsVanishingField) {
  const auto mesh = mesh_of("unit-square", 0.1);
  const AnalyticField zero(mesh, [](const Vec2&) { return 0.0; }, [](const Vec2&) { return Vec2(0, 0); });
  EXPECT_THROW(doubling_profile(zero, CoefficientField::identity(), Vec2(0.5, 0.5), {0.1}), InvalidInput);
}

TEST(CenterShift, ZeroShiftAndInclusion) {
  const auto mesh = mesh_of("unit-disk", 0.05);
  const auto u = fem::harmonic_power(mesh, 2, false, Vec2(0.1, 0.0));
  const DoublingEvaluator ev(u, CoefficientField::identity());
  const auto same = center_shift_check(ev, Vec2(0, 0), Vec2(0, 0), 0.3, 1.0);
  EXPECT_EQ(same.lhs, same.mid);
  EXPECT_EQ(same.rhs, same.mid);
  const auto s = center_shift_check(ev, Vec2(0, 0), Vec2(0.02, 0.01), 0.3, 1.0);
  EXPECT_LE(s.lhs, s.mid);
  EXPECT_LE(s.mid, s.rhs);
  EXPECT_LE(s.C_min, 1.0 + 1e-9);
  EXPECT_THROW(center_shift_check(ev, Vec2(0, 0), Vec2(0.2, 0), 0.3, 2.0), InvalidInput);
}

TEST(StarShift, ConvexPresetsHaveNoShift) {
  for (const char* name : {"hexagon", "half-disk", "unit-square"}) {
    const auto d = geometry::make_domain(name);
    const Vec2 x0 = d.patches[0].to_world(0.0, 0.0);
    const auto s = star_center_shift(d, CoefficientField::identity(), x0, 0.2);
    EXPECT_EQ(s.x1, s.x0) << name;
    EXPECT_GT(s.samples, 0u) << name;
    EXPECT_GE(s.defect, -1e-8) << name;
  }
}

TEST(StarShift, ParabolaShift) {
  const auto d = geometry::make_domain("parabola");
  const double r = 0.05;
  EXPECT_THROW(star_center_shift(d, CoefficientField::identity(), Vec2::Zero(), r), InvalidInput);
  StarShiftOptions opt;
  opt.strict = false;
  const auto s = star_center_shift(d, CoefficientField::identity(), Vec2::Zero(), r, opt);
  EXPECT_FALSE(s.small_enough);
  EXPECT_NEAR(s.x1.x(), 0.0, 1e-15);
  EXPECT_NEAR(s.x1.y() / (9.0 * (1.0 + d.lipschitz_L) * 2.0 * r * r), 1.0, 0.05);
  EXPECT_GE(s.defect, 0.0);
  EXPECT_LT(s.defect_unshifted, 0.0);
}

TEST(Monotonicity, ConstantIndexHasNoViolations) {
  const std::vector<double> radii = dyadic_radii(0.4, 4);
  const std::vector<double> N(radii.size(), 3.0);
  for (auto form : {MonotonicityForm::frequency, MonotonicityForm::doubling}) {
    const auto rep = monotonicity_audit(radii, N, form, 0.0, 1.0);
    EXPECT_TRUE(rep.violations.empty());
    EXPECT_NEAR(rep.epsilon_min, 0.0, 1e-15);
    EXPECT_EQ(rep.pairs, 3u);
  }
  const auto bad = monotonicity_audit(radii, {1.0, 2.0, 1.5, 2.5}, MonotonicityForm::frequency, 0.0, 1.0);
  EXPECT_EQ(bad.violations.size(), 1u);
}

TEST(Monotonicity, HarmonicOnConvexPolygon) {
  const auto mesh = mesh_of("hexagon", 0.05);
  const auto d = geometry::hexagon();
  const Vec2 x0 = d.patches[0].to_world(0.0, 0.0);
  const AnalyticField u(mesh, [&](const Vec2& p) { return (p - x0).y() * (1.0 + 0.5 * (p - x0).x()); },
                        [&](const Vec2& p) { return Vec2(0.5 * (p - x0).y(), 1.0 + 0.5 * (p - x0).x()); });
  // 2r stays within the bottom edge's neighbourhood, where u vanishes on the boundary
  const auto radii = dyadic_radii(0.2, 4);
  const auto f = frequency_profile(u, CoefficientField::identity(), x0, radii);
  const auto rep = monotonicity_audit(radii, f.N, MonotonicityForm::frequency, 0.0, 1.0, {}, 1e-6);
  EXPECT_TRUE(rep.violations.empty());
  const auto dp = doubling_profile(u, CoefficientField::identity(), x0, radii);
  const auto rd = monotonicity_audit(radii, dp.N, MonotonicityForm::doubling, 0.0, 1.0, {}, 1e-6);
  EXPECT_LE(rd.epsilon_min, 1e-6);
}

TEST(ThreeBall, Examples) {
  for (int n = 1; n <= 4; ++n) {
    auto J = [n](double r) { return std::pow(r, 2 * n + 2); };
    const auto t = three_ball_residual(J(0.1), J(0.2), J(0.4), 0.1, 0.2, 0.4, 0.0);
    EXPECT_NEAR(t.beta, 1.0, 1e-14);
    EXPECT_NEAR(t.residual, 0.0, 1e-8);
  }
  const auto bad = three_ball_residual(1.0, 3.0, 4.0, 0.1, 0.2, 0.4, 0.0);
  EXPECT_LT(bad.residual, 0.0);
  EXPECT_THROW(three_ball_residual(2.0, 1.0, 3.0, 0.1, 0.2, 0.4, 0.0), InvalidInput);
  EXPECT_THROW(three_ball_residual(1.0, 2.0, 3.0, 0.2, 0.1, 0.4, 0.0), InvalidInput);
}

TEST(ThreeBall, HarmonicFieldsOnDisk) {
  const auto mesh = mesh_of("unit-disk", 0.05);
  const auto A = CoefficientField::identity();
  for (int n = 1; n <= 3; ++n) {
    const auto u = fem::harmonic_power(mesh, n, false, Vec2(0.05, -0.03));
    const DoublingEvaluator ev(u, A);
    const double J1 = ev.J(Vec2::Zero(), 0.1), J2 = ev.J(Vec2::Zero(), 0.25), J3 = ev.J(Vec2::Zero(), 0.6);
    EXPECT_GE(three_ball_residual(J1, J2, J3, 0.1, 0.25, 0.6, 0.0).residual, -1e-6) << n;
  }
}

TEST(MaximalIndex, LinearFieldBoundaryCuboid) {
  const auto mesh = mesh_of("half-plane-box", 0.05);
  const auto d = geometry::make_domain("half-plane-box");
  const auto Q = geometry::boundary_cuboid(d.patches[0], 0.0, 0.1, 1.0);
  MaximalOptions opt;
  const auto c0 = maximal_index(linear_y(mesh), CoefficientField::identity(), Q, opt);
  EXPECT_NEAR(c0.value, 4.0 * kLn2, 1e-2);
  EXPECT_EQ(c0.samples.size(), 9u * 5u * 5u);  // lower half of Q lies outside the domain
  EXPECT_EQ(c0.value, c0.samples[c0.argmax].N);
  opt.level = 1;
  const auto c1 = maximal_index(linear_y(mesh), CoefficientField::identity(), Q, opt);
  EXPECT_GE(c1.value, c0.value);
}

TEST(MaximalIndex, HomogeneousInterior) {
  const auto mesh = mesh_of("unit-disk", 0.05);
  geometry::Cuboid Q;
  Q.center = Vec2::Zero();
  Q.side = 0.04;
  Q.L = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const auto c = maximal_index(fem::harmonic_power(mesh, n, false), CoefficientField::identity(), Q);
    EXPECT_NEAR(c.value, (2 * n + 2) * kLn2, 1e-2) << n;
  }
}

TEST(DropAudit, LinearFieldZeroFree) {
  const auto mesh = mesh_of("half-plane-box", 0.02);
  const auto d = geometry::make_domain("half-plane-box");
  const auto u = linear_y(mesh).interpolate();
  const auto Q = geometry::boundary_cuboid(d.patches[0], 0.0, 0.2, 1.0);
  const auto rep = drop_audit(u, CoefficientField::identity(), d, Q, 3, 10.0);
  EXPECT_EQ(rep.branch, "zero-free");
  EXPECT_TRUE(rep.witnessed);
  EXPECT_EQ(rep.rows.size(), 8u);
  for (const auto& r : rep.rows) EXPECT_EQ(r.zero_status, "zero-free");
  const auto path = std::filesystem::temp_directory_path() / "na_drop.csv";
  write_drop_csv(rep, path.string());
  EXPECT_TRUE(std::filesystem::exists(path));
}

TEST(Extension, PositiveIndexAndHarmonicResidual) {
  const auto mesh = mesh_of("unit-square", 0.05);
  const int m = 1, n = 2;
  const double lambda = kPi * kPi * (m * m + n * n);
  auto f = [&](const Vec2& p) { return std::sin(m * kPi * p.x()) * std::sin(n * kPi * p.y()); };
  const AnalyticField phi(mesh, f, [&](const Vec2& p) {
    return Vec2(m * kPi * std::cos(m * kPi * p.x()) * std::sin(n * kPi * p.y()),
                n * kPi * std::sin(m * kPi * p.x()) * std::cos(n * kPi * p.y()));
  });
  const auto e = extension_doubling(phi, lambda, CoefficientField::identity(), Vec2(0.4, 0.3), 0.0, 0.1);
  EXPECT_GT(e.J, 0.0);
  EXPECT_GT(e.N, 0.0);
  EXPECT_TRUE(std::isfinite(e.N));
  EXPECT_LT(e.truncation, 1e-8);

  const double r1 = extension_laplacian_residual(f, lambda, Vec2(0.37, 0.21), 0.3, 1e-2);
  const double r2 = extension_laplacian_residual(f, lambda, Vec2(0.37, 0.21), 0.3, 5e-3);
  EXPECT_LT(r1, 1e-2);
  EXPECT_NEAR(r1 / r2, 4.0, 0.1);
  EXPECT_THROW(extension_doubling(phi, lambda, CoefficientField::identity(), Vec2(1.5, 0.3), 0.0, 0.1), InvalidInput);
}

TEST(Export, ProfileCsv) {
  const auto mesh = mesh_of("half-plane-box", 0.1);
  const auto u = linear_y(mesh);
  const auto radii = dyadic_radii(0.2, 2);
  const auto f = frequency_profile(u, CoefficientField::identity(), Vec2::Zero(), radii);
  const auto d = doubling_profile(u, CoefficientField::identity(), Vec2::Zero(), radii);
  const auto path = std::filesystem::temp_directory_path() / "na_profile.csv";
  write_profile_csv(path.string(), &f, &d);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "center_x,center_y,r,H,D,N_freq,J,N_doub,flags");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
}
