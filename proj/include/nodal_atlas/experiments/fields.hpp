#pragma once

#include "nodal_atlas/experiments/config.hpp"
#include "nodal_atlas/fem/eigen_solver.hpp"
#include "nodal_atlas/fem/field.hpp"
#include "nodal_atlas/fem/harmonic.hpp"
#include "nodal_atlas/fem/mesher.hpp"

#include <complex>
#include <variant>

namespace nodal_atlas::experiments {

using AnyField = std::variant<fem::AnalyticField, fem::ScalarField>;

struct HarmonicTerm {
  int n = 1;
  bool imaginary = false;
  double coeff = 1.0;
};

/// sum_k c_k Re/Im (z - center)^{n_k} with exact gradients.
inline fem::AnalyticField harmonic_combo(std::shared_ptr<const fem::Mesh> mesh, std::vector<HarmonicTerm> terms,
                                         const Vec2& center, std::string label = "harmonic-combo") {
  for (const auto& t : terms)
    if (t.n < 0) throw InvalidInput("harmonic_combo: degrees must be >= 0");
  auto eval = [terms, center](const Vec2& p, bool grad) {
    const std::complex<double> z(p.x() - center.x(), p.y() - center.y());
    double v = 0.0;
    std::complex<double> g(0.0, 0.0);  // d/dz of the holomorphic part, per term
    Vec2 G = Vec2::Zero();
    for (const auto& t : terms) {
      const std::complex<double> w = std::pow(z, t.n);
      v += t.coeff * (t.imaginary ? w.imag() : w.real());
      if (grad && t.n > 0) {
        g = static_cast<double>(t.n) * std::pow(z, t.n - 1);
        // f = Re w: grad = (Re w', -Im w'); f = Im w: grad = (Im w', Re w')
        G += t.coeff * (t.imaginary ? Vec2(g.imag(), g.real()) : Vec2(g.real(), -g.imag()));
      }
    }
    return std::pair{v, G};
  };
  return fem::AnalyticField(
      std::move(mesh), [eval](const Vec2& p) { return eval(p, false).first; },
      [eval](const Vec2& p) { return eval(p, true).second; }, std::move(label));
}

/// Shared state of one experiment run: the meshed domain, coefficients and (lazily) eigenpairs.
class Context {
public:
  explicit Context(const ExperimentConfig& c) : config(c), domain(c.make_mesh_domain()), A(c.make_coefficients()) {}

  const ExperimentConfig& config;
  geometry::PlanarDomain domain;
  fem::CoefficientField A;

  std::shared_ptr<const fem::Mesh> mesh() {
    if (!mesh_) mesh_ = std::make_shared<const fem::Mesh>(fem::mesh_domain(domain, config.mesh_h));
    return mesh_;
  }

  const fem::EigenSolution& eigen(int count) {
    if (!eig_ || static_cast<int>(eig_->lambdas.size()) < count) {
      fem::EigenOptions opt;
      opt.seed = config.seed;
      eig_ = fem::solve_eigs(mesh(), A, count, opt);
    }
    return *eig_;
  }

  /// {"kind": "harmonic" | "aharmonic", "n", "imaginary", "center"} | {"kind": "linear"} (u = distance above the
  /// patch-0 tangent line) | {"kind": "eigen", "mode"} | {"kind": "combo", "terms", "center"}.
  AnyField field(const nlohmann::json& spec) {
    const std::string kind = spec.value("kind", std::string{"eigen"});
    const auto c = spec.value("center", std::array<double, 2>{0.0, 0.0});
    if (kind == "harmonic")
      return harmonic_combo(mesh(), {{spec.value("n", 1), spec.value("imaginary", false), 1.0}}, Vec2(c[0], c[1]),
                            fmt::format("harmonic-{}", spec.value("n", 1)));
    if (kind == "combo") {
      std::vector<HarmonicTerm> terms;
      for (const auto& t : spec.at("terms")) terms.push_back({t.value("n", 1), t.value("imaginary", false), t.value("coeff", 1.0)});
      return harmonic_combo(mesh(), terms, Vec2(c[0], c[1]));
    }
    if (kind == "aharmonic") {
      // A-harmonic extension of the trace of Re/Im (z - center)^n
      const auto h = harmonic_combo(mesh(), {{spec.value("n", 1), spec.value("imaginary", false), 1.0}}, Vec2(c[0], c[1]));
      return fem::solve_aharmonic(mesh(), A, h.interpolate().values());
    }
    if (kind == "linear") {
      if (domain.patches.empty()) throw InvalidInput("field: linear field needs a graph patch");
      const auto& p = domain.patches[0];
      const Vec2 o = p.to_world(0.0, 0.0), n = p.frame() * Vec2(0.0, 1.0);
      return fem::AnalyticField(mesh(), [o, n](const Vec2& y) { return (y - o).dot(n); }, [n](const Vec2&) { return n; },
                                "linear");
    }
    if (kind == "eigen") {
      const int mode = spec.value("mode", 1);
      if (mode < 1) throw InvalidInput("field: mode must be >= 1");
      return eigen(std::max(mode, config.mode_count)).fields[static_cast<std::size_t>(mode - 1)];
    }
    throw InvalidInput("field: unknown kind '" + kind + "' (known: harmonic, aharmonic, combo, linear, eigen)");
  }

  /// Point on patch 0 at local abscissa s (default: the patch anchor).
  Vec2 boundary_point(double s = 0.0) const {
    if (domain.patches.empty()) throw InvalidInput("domain has no graph patch");
    const auto& p = domain.patches[0];
    return p.to_world(s, p.phi.value(s));
  }

  Vec2 point_param(const std::string& key, const Vec2& fallback) const {
    if (!config.params.contains(key)) return fallback;
    const auto a = config.params.at(key).get<std::array<double, 2>>();
    return Vec2(a[0], a[1]);
  }

private:
  std::shared_ptr<const fem::Mesh> mesh_;
  std::optional<fem::EigenSolution> eig_;
};

}  // namespace nodal_atlas::experiments
