#pragma once

#include "nodal_atlas/doubling/matrix_sqrt.hpp"
#include "nodal_atlas/fem/coefficients.hpp"
#include "nodal_atlas/fem/quadrature.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <mutex>
#include <optional>

namespace nodal_atlas::doubling {

using fem::CoefficientField;
using fem::Frame;
using fem::QuadOptions;
using fem::TriangleField;
using fem::TriangleIndex;

/// Largest |u| over mesh vertices, evaluated through the field interface.
template <TriangleField F>
double field_scale(const F& u) {
  const fem::Mesh& m = u.mesh();
  double s = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) s = std::max(s, std::abs(u.value_in(t, m.vertices[m.triangles[t][i]])));
  return s;
}

/// Frame with S = A(x0)^{1/2}; the identity frame when A(x0) = I.
inline Frame frame_at(const CoefficientField& A, const Vec2& x0) {
  const Mat2 A0 = A.checked(x0);
  if ((A0 - Mat2::Identity()).norm() == 0.0) return Frame::at(x0);
  return Frame::with_shape(x0, matrix_sqrt(A0));
}

/// Running min/max of sampled mu values; merged under a lock so parallel radii are safe.
struct MuRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void merge(const MuRange& o) {
    lo = std::min(lo, o.lo);
    hi = std::max(hi, o.hi);
  }
};

inline void check_mu(const MuRange& mu, double Lambda) {
  const double tol = 1e-10 * Lambda;
  if (mu.lo < 1.0 / Lambda - tol || mu.hi > Lambda + tol)
    throw InvalidInput(fmt::format("mu weight left [1/Lambda, Lambda]: range [{}, {}], Lambda = {}", mu.lo, mu.hi, Lambda));
}

// ----------------------------------------------------------------------------------------------

struct FrequencyProfile {
  Vec2 center = Vec2::Zero();
  Mat2 S = Mat2::Identity();
  std::vector<double> radii;
  std::vector<double> H, D, N;           // N is NaN where degenerate
  std::vector<double> hd_residual;       // |H'/H - 1/r - 2N/r|, NaN where degenerate
  std::vector<std::string> flags;        // "ok" or "degenerate"
  double mu_min = 1.0, mu_max = 1.0;
};

struct ProfileOptions {
  QuadOptions quad;
  double degenerate_tol = 1e-14;  // H below this times (scale^2 * 2 pi r) is degenerate
  double derivative_step = 1e-3;  // relative step for H'
};

/// H(r) = int over {|x~| = r} of mu~ u~^2, D(r) = int over {|x~| < r} of A grad u . grad u (both in the
/// frame x~ = S^{-1}(y - center), S = A(center)^{1/2}), N = r D / H.
template <TriangleField F>
FrequencyProfile frequency_profile(const F& u, const CoefficientField& A, const Vec2& center,
                                   const std::vector<double>& radii, const ProfileOptions& opt = {}) {
  if (radii.empty()) throw InvalidInput("frequency_profile: empty radius grid");
  for (double r : radii)
    if (!(r > 0.0)) throw InvalidInput("frequency_profile: radii must be positive");
  const TriangleIndex index(u.mesh());
  const Frame fr = frame_at(A, center);
  const double scale = field_scale(u);

  FrequencyProfile p;
  p.center = center;
  p.S = fr.S;
  p.radii = radii;
  const std::size_t n = radii.size();
  p.H.assign(n, 0.0);
  p.D.assign(n, 0.0);
  p.N.assign(n, std::nan(""));
  p.hd_residual.assign(n, std::nan(""));
  p.flags.assign(n, "ok");
  std::vector<MuRange> mus(n);

  parallel_for(n, [&](std::size_t i) {
    const double r = radii[i];
    MuRange& mu = mus[i];
    auto h_fn = [&](std::size_t t, const Vec2& y, const Vec2& xt) {
      const double w = fem::mu_weight(A, fr, y, xt);
      mu.add(w);
      const double v = u.value_in(t, y);
      return w * v * v;
    };
    auto d_fn = [&](std::size_t t, const Vec2& y, const Vec2&) {
      const Vec2 g = u.gradient_in(t, y);
      return g.dot(A(y) * g);
    };
    const double H = fem::circle_integral(index, fr, r, h_fn, opt.quad);
    const double D = fem::ball_integral(index, fr, r, d_fn, opt.quad);
    p.H[i] = H;
    p.D[i] = D;
    if (!(H > opt.degenerate_tol * scale * scale * 2.0 * kPi * r)) {
      p.flags[i] = "degenerate";
      return;
    }
    p.N[i] = r * D / H;
    const double dr = opt.derivative_step * r;
    const double Hp = fem::circle_integral(index, fr, r + dr, h_fn, opt.quad);
    const double Hm = fem::circle_integral(index, fr, r - dr, h_fn, opt.quad);
    const double dH = (Hp - Hm) / (2.0 * dr);
    p.hd_residual[i] = std::abs(dH / H - 1.0 / r - 2.0 * p.N[i] / r);
  });
  MuRange all;
  for (const auto& m : mus) all.merge(m);
  if (all.lo <= all.hi) {
    check_mu(all, A.Lambda());
    p.mu_min = all.lo;
    p.mu_max = all.hi;
  }
  return p;
}

// ----------------------------------------------------------------------------------------------

struct DoublingProfile {
  Vec2 center = Vec2::Zero();
  Mat2 S = Mat2::Identity();
  std::vector<double> radii;
  std::vector<double> J;    // J(r)
  std::vector<double> J2;   // J(2r)
  std::vector<double> N;    // log(J(2r) / J(r))
  double mu_min = 1.0, mu_max = 1.0;
};

/// J(x0, r) = |det A(x0)|^{-1/2} int over E(x0, r) ∩ Omega of mu(x0, y) u(y)^2 dy, which in the
/// local frame is the integral of mu~ u~^2 over B_r.
template <TriangleField F>
class DoublingEvaluator {
public:
  DoublingEvaluator(const F& u, const CoefficientField& A, QuadOptions q = {})
      : u_(u), A_(A), index_(u.mesh()), q_(q) {}

  const TriangleIndex& index() const { return index_; }

  double J(const Frame& fr, double r, MuRange* mu = nullptr) const {
    auto fn = [&](std::size_t t, const Vec2& y, const Vec2& xt) {
      const double w = fem::mu_weight(A_, fr, y, xt);
      if (mu) mu->add(w);
      const double v = u_.value_in(t, y);
      return w * v * v;
    };
    return fem::ball_integral(index_, fr, r, fn, q_);
  }

  double J(const Vec2& x0, double r, MuRange* mu = nullptr) const { return J(frame_at(A_, x0), r, mu); }

  /// N_u(x0, r) = log(J(2r) / J(r)); nullopt when J(r) vanishes.
  std::optional<double> N(const Vec2& x0, double r, MuRange* mu = nullptr) const {
    const Frame fr = frame_at(A_, x0);
    const double j1 = J(fr, r, mu);
    const double j2 = J(fr, 2.0 * r, mu);
    if (!(j1 > 0.0) || !(j2 > 0.0)) return std::nullopt;
    return std::log(j2 / j1);
  }

  const F& field() const { return u_; }
  const CoefficientField& coefficients() const { return A_; }

private:
  const F& u_;
  const CoefficientField& A_;
  TriangleIndex index_;
  QuadOptions q_;
};

template <TriangleField F>
DoublingProfile doubling_profile(const F& u, const CoefficientField& A, const Vec2& x0, const std::vector<double>& radii,
                                 const QuadOptions& q = {}) {
  if (radii.empty()) throw InvalidInput("doubling_profile: empty radius grid");
  for (double r : radii)
    if (!(r > 0.0)) throw InvalidInput("doubling_profile: radii must be positive");
  const DoublingEvaluator<F> ev(u, A, q);
  const Frame fr = frame_at(A, x0);

  // J on the union of {r} and {2r}; dyadic ladders share values
  std::vector<double> all;
  for (double r : radii) {
    all.push_back(r);
    all.push_back(2.0 * r);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<double> Jv(all.size());
  std::vector<MuRange> mus(all.size());
  parallel_for(all.size(), [&](std::size_t i) { Jv[i] = ev.J(fr, all[i], &mus[i]); });
  if (!(Jv.back() > 0.0)) throw InvalidInput("doubling_profile: u vanishes on the largest ellipsoid");

  auto lookup = [&](double r) {
    const auto it = std::lower_bound(all.begin(), all.end(), r);
    return Jv[static_cast<std::size_t>(it - all.begin())];
  };
  DoublingProfile p;
  p.center = x0;
  p.S = fr.S;
  p.radii = radii;
  for (double r : radii) {
    const double a = lookup(r), b = lookup(2.0 * r);
    p.J.push_back(a);
    p.J2.push_back(b);
    p.N.push_back(a > 0.0 && b > 0.0 ? std::log(b / a) : std::nan(""));
  }
  MuRange mu;
  for (const auto& m : mus) mu.merge(m);
  if (mu.lo <= mu.hi) {
    check_mu(mu, A.Lambda());
    p.mu_min = mu.lo;
    p.mu_max = mu.hi;
  }
  return p;
}

/// Dyadic ladder r_max * 2^{-j}, j = levels-1 .. 0 (ascending).
inline std::vector<double> dyadic_radii(double r_max, int levels) {
  if (!(r_max > 0.0) || levels < 1) throw InvalidInput("dyadic_radii: need r_max > 0 and levels >= 1");
  std::vector<double> r;
  for (int j = levels - 1; j >= 0; --j) r.push_back(std::ldexp(r_max, -j));
  return r;
}

// ----------------------------------------------------------------------------------------------
// Export

inline std::string fmt_num(double v) { return std::isfinite(v) ? fmt::format("{:.12g}", v) : std::string{}; }

/// Columns center_x, center_y, r, H, D, N_freq, J, N_doub, flags. Either profile may be null;
/// when both are given their radius grids must match.
inline void write_profile_csv(const std::string& path, const FrequencyProfile* f, const DoublingProfile* d) {
  if (!f && !d) throw InvalidInput("write_profile_csv: nothing to write");
  if (f && d && f->radii != d->radii) throw InvalidInput("write_profile_csv: radius grids differ");
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << "center_x,center_y,r,H,D,N_freq,J,N_doub,flags\n";
  const auto& radii = f ? f->radii : d->radii;
  const Vec2 c = f ? f->center : d->center;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    out << fmt_num(c.x()) << ',' << fmt_num(c.y()) << ',' << fmt_num(radii[i]) << ',';
    if (f)
      out << fmt_num(f->H[i]) << ',' << fmt_num(f->D[i]) << ',' << fmt_num(f->N[i]) << ',';
    else
      out << ",,,";
    if (d)
      out << fmt_num(d->J[i]) << ',' << fmt_num(d->N[i]) << ',';
    else
      out << ",,";
    out << (f ? f->flags[i] : std::string{"ok"}) << "\n";
  }
}

}  // namespace nodal_atlas::doubling
