#pragma once

// Brute-force numerical evaluation of the defining integrals behind the
// closed forms: Qm, the first overlap Y1 (point detector and finite
// detector), single entries of the V0 contractions, plane integrals of the
// photon-number density, and the calibration of N_vK.
//
// Every routine returns its own error estimate. Budget exhaustion raises
// QuadratureError carrying the estimate reached.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "scintilla/coherentdist.hpp"
#include "scintilla/cubature.hpp"
#include "scintilla/error.hpp"
#include "scintilla/quadrature.hpp"
#include "scintilla/specfun.hpp"
#include "scintilla/turbmodel.hpp"

namespace scintilla::oracle {

enum class Method { adaptive, monte_carlo };

struct QuadratureSpec {
  double rel_tol = 1e-7;
  long max_evals = 4'000'000;
  std::uint64_t seed = 0x5c1a7711a;
  /// Evaluate the turbulence (non-Lambda) parts with kappa0 -> 0.
  bool outer_scale_limit = true;
  Method method = Method::adaptive;

  void validate() const {
    if (!(rel_tol >= 1e-10 && rel_tol <= 1e-1)) throw DomainError("QuadratureSpec: rel_tol must be in [1e-10, 1e-1]");
    if (max_evals < 1000) throw DomainError("QuadratureSpec: max_evals must be >= 1000");
  }
};

struct Value {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
};

namespace detail {

inline double pi() { return std::numbers::pi; }

/// exp(-x) I0(x) for x >= 0.
inline double bessel_i0_scaled(double x) {
  if (x < 600.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
  const double r = 1.0 / (8.0 * x);
  return (1.0 + r * (1.0 + r * (4.5 + r * 37.5))) / std::sqrt(2.0 * pi() * x);
}

/// exp(-u) I0(2 sqrt(X u)) - 1 without cancellation for small u.
inline double overlap_bracket(double u, double x) {
  const double xu = x * u;
  if (xu <= 100.0) {
    double term = 1.0, s = 0.0;
    for (int m = 1; m < 200; ++m) {
      term *= xu / (static_cast<double>(m) * m);
      s += term;
      if (term <= 1e-18 * s) break;
    }
    return std::expm1(-u) * (1.0 + s) + s;
  }
  const double arg = 2.0 * std::sqrt(xu);
  return std::exp(arg - u) * bessel_i0_scaled(arg) - 1.0;
}

/// e^z - 1 for complex z without cancellation at small |z|.
inline cplx expm1(cplx z) {
  const double sh = std::sin(0.5 * z.imag());
  return {std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * sh * sh, std::exp(z.real()) * std::sin(z.imag())};
}

/// (f(q) + f(-q)) / (2 f(0)) - 1 for f(q) = f(0) exp(lin(q) + quad(q)) with
/// lin odd and quad even in q.
inline cplx symmetric_excess(cplx lin, cplx quad) {
  const cplx sh = std::sinh(0.5 * lin);
  return expm1(quad) * std::cosh(lin) + 2.0 * sh * sh;
}

/// Integrates f over consecutive breakpoints; raises when the summed error
/// exceeds max(rel_tol |I|, abs_tol).
template <class F>
Value piecewise(F&& f, const std::vector<double>& pts, const QuadratureSpec& spec, double abs_tol,
                const char* what) {
  Value v;
  CompensatedSum sum;
  const int intervals = static_cast<int>(std::max<long>(50, spec.max_evals / (30 * static_cast<long>(pts.size()))));
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i])) continue;
    const auto e = quad::integrate_adaptive(f, pts[i], pts[i + 1], 0.1 * spec.rel_tol, 0.1 * abs_tol, intervals);
    sum.add(e.value);
    v.error += e.error;
    v.evaluations += e.evaluations;
  }
  v.value = sum.value();
  if (v.error > std::max(spec.rel_tol * std::abs(v.value), abs_tol))
    throw QuadratureError(std::string(what) + ": budget exhausted", v.value, v.error);
  return v;
}

inline std::vector<double> breakpoints(double eps6, double upper) {
  std::vector<double> pts{0.0};
  if (eps6 > 0.0) {
    for (double t = eps6 / 4.0; t < 1.0 && t < upper; t *= 4.0) pts.push_back(t);
  }
  if (pts.back() < 1.0 && upper > 1.0) pts.push_back(1.0);
  pts.push_back(upper);
  return pts;
}

struct Y1Scales {
  double a1, x, b, pref;
};

inline Y1Scales y1_scales(double z1, const BeamGeometry& g) {
  Y1Scales s;
  s.a1 = std::pow(g.w0, 4) * g.k * g.k + 4.0 * g.big_l * g.big_l;
  s.x = 2.0 * g.w0 * g.w0 * g.k * g.k * norm2(g.x0) / s.a1;
  s.b = 2.0 * g.w0 * g.w0 * (g.big_l - z1) * (g.big_l - z1) / s.a1;
  s.pref = std::pow(g.k, 4) * g.w0 * g.w0 * g.zeta0 * g.zeta0 / (4.0 * pi() * pi() * s.a1) * std::exp(-s.x);
  return s;
}

/// Integral over the disk |q| < r_max of an even function h(q), through
/// q = t^3 (cos th, sin th) on the half-plane. Power-law singularities up to
/// |q|^-2 at the origin become bounded.
template <class H>
cubature::Result disk_integral_even(H&& h, double r_max, double abs_tol, const QuadratureSpec& spec) {
  const double t_max = std::cbrt(r_max);
  auto f = [&](const cubature::Point<2>& p) {
    const double t = p[0];
    const double r = t * t * t;
    return 6.0 * t * t * t * t * t * h(Vec2{r * std::cos(p[1]), r * std::sin(p[1])});
  };
  const cubature::Point<2> lo{0.0, 0.0}, hi{t_max, pi()};
  if (spec.method == Method::monte_carlo) {
    const int strata = 64;
    const int per_cell = static_cast<int>(std::max<long>(2, spec.max_evals / (strata * strata)));
    return cubature::stratified_monte_carlo<2>(f, lo, hi, strata, per_cell, spec.seed);
  }
  return cubature::genz_malik<2>(f, lo, hi, spec.rel_tol, abs_tol, spec.max_evals);
}

inline void require_converged(const cubature::Result& r, const QuadratureSpec& spec, const char* what) {
  if (spec.method == Method::adaptive && !r.converged)
    throw QuadratureError(std::string(what) + ": budget exhausted", r.value, r.error);
}

/// int_{|q| > r} Phi(|q|^2) d^2q / (2pi)^2 for the von Karman spectrum.
inline double spectral_tail(double r, double cn2, double n_vk, double kappa0) {
  return 0.3 / pi() * n_vk * cn2 * std::pow(r * r + kappa0 * kappa0, -5.0 / 6.0);
}

}  // namespace detail

/// int Phi(q) dq over q in [0, inf) by quadrature, i.e. 4 pi Lambda.
inline Value spectral_mass_numeric(const TurbulenceParams& p, const QuadratureSpec& spec) {
  spec.validate();
  p.validate();
  if (p.cn2 == 0.0) return {};
  // q = kappa0^2 t^6
  auto f = [](double t) { return 6.0 * std::pow(t, 5) * std::pow(1.0 + std::pow(t, 6), -11.0 / 6.0); };
  const auto e = quad::integrate_to_infinity(f, 0.0, 0.01 * spec.rel_tol);
  if (e.error > spec.rel_tol * std::abs(e.value))
    throw QuadratureError("spectral_mass_numeric: budget exhausted", e.value, e.error);
  const double s = p.n_vk * p.cn2 * std::pow(p.kappa0, -5.0 / 3.0);
  return {s * e.value, s * e.error, e.evaluations};
}

/// Lambda = int Phi d^2k/(2pi)^2 by quadrature.
inline Value lambda_numeric(const TurbulenceParams& p, const QuadratureSpec& spec) {
  Value v = spectral_mass_numeric(p, spec);
  v.value /= 4.0 * std::numbers::pi;
  v.error /= 4.0 * std::numbers::pi;
  return v;
}

/// Qm = int_0^inf q^m exp(-b q) Phi(q) dq, b = 2 w0^2 (L - z1)^2 / (w0^4 k^2 + 4 L^2).
/// m = 0 always keeps the finite outer scale; m >= 1 uses kappa0 -> 0 when
/// spec.outer_scale_limit is set.
inline Value qm_numeric(int m, double z1, const BeamGeometry& g, const TurbulenceParams& p,
                        const QuadratureSpec& spec) {
  if (m < 0 || m > 6) throw DomainError("qm_numeric: m must be in [0, 6]");
  if (z1 < 0.0 || z1 > g.big_l) throw DomainError("qm_numeric: z1 outside [0, L]");
  spec.validate();
  if (p.cn2 == 0.0) return {};
  const auto sc = detail::y1_scales(z1, g);
  const double kappa0 = (m >= 1 && spec.outer_scale_limit) ? 0.0 : p.kappa0;
  if (sc.b == 0.0) {
    if (m > 0) throw DomainError("qm_numeric: diverges for m >= 1 at z1 = L");
    return spectral_mass_numeric(p, spec);
  }
  // q = t^6 / b
  const double eps = sc.b * kappa0 * kappa0;
  auto f = [m, eps](double t) {
    const double t6 = std::pow(t, 6);
    return 6.0 * std::pow(t, 6 * m + 5) * std::pow(t6 + eps, -11.0 / 6.0) * std::exp(-t6);
  };
  const double upper = std::pow(80.0 + 6.0 * m, 1.0 / 6.0);
  Value v = detail::piecewise(f, detail::breakpoints(std::pow(eps, 1.0 / 6.0), upper), spec, 0.0, "qm_numeric");
  const double s = p.n_vk * p.cn2 * std::pow(sc.b, 5.0 / 6.0 - m);
  v.value *= s;
  v.error *= s;
  return v;
}

struct Y1Numeric {
  Value lambda_part;
  Value kappa_part;
  double total() const noexcept { return lambda_part.value + kappa_part.value; }
  double error() const noexcept { return lambda_part.error + kappa_part.error; }
};

/// Y1(z1) per unit detector area. The angular integral over the transfer
/// vector is done analytically (Bessel I0), the radial one by quadrature.
inline Y1Numeric y1_numeric(double z1, const BeamGeometry& g, const TurbulenceParams& p,
                            const QuadratureSpec& spec) {
  if (z1 < 0.0 || z1 > g.big_l) throw DomainError("y1_numeric: z1 outside [0, L]");
  spec.validate();
  Y1Numeric r;
  if (p.cn2 == 0.0) return r;
  const auto sc = detail::y1_scales(z1, g);
  const Value mass = spectral_mass_numeric(p, spec);
  r.lambda_part = {sc.pref * mass.value, sc.pref * mass.error, mass.evaluations};
  if (sc.b == 0.0) return r;

  // Q = t^6 / b; beyond t_max the Bessel term is below 1e-18 and only the
  // subtracted -1 remains, integrated analytically.
  const double kappa0 = spec.outer_scale_limit ? 0.0 : p.kappa0;
  const double eps = sc.b * kappa0 * kappa0;
  const double x = sc.x;
  auto f = [x, eps](double t) {
    const double t6 = std::pow(t, 6);
    const double w = 6.0 * std::pow(t, 5) * std::pow(t6 + eps, -11.0 / 6.0);
    return w * detail::overlap_bracket(t6, x);
  };
  const double sx = std::sqrt(x) + std::sqrt(x + 45.0);
  const double t_max = std::max(2.0, std::pow(sx * sx, 1.0 / 6.0));
  auto pts = detail::breakpoints(std::pow(eps, 1.0 / 6.0), t_max);
  if (x > 1.0) {
    const double peak = std::pow(x, 1.0 / 6.0);
    if (peak > 1.0 && peak < t_max) pts.insert(pts.end() - 1, peak);
  }
  const double tail = -1.2 * std::pow(std::pow(t_max, 6) + eps, -5.0 / 6.0);
  const double abs_tol = 1e-3 * spec.rel_tol * std::abs(tail);
  Value body = detail::piecewise(f, pts, spec, abs_tol, "y1_numeric");
  const double s = sc.pref * p.n_vk * p.cn2 * std::pow(sc.b, 5.0 / 6.0);
  r.kappa_part = {s * (body.value + tail), s * body.error, body.evaluations};
  return r;
}

/// Overlap amplitude S_q(z1) = int d^2k/(2pi)^2 M*(k) zeta(k - q) e^{i(z1/k) q.k}
/// for a Gaussian detector of size w_d at x0 in the plane z = L.
inline cplx overlap_amplitude(const Vec2& q, double z1, const BeamGeometry& g, double w_d) {
  const cplx a{0.25 * (g.w0 * g.w0 + w_d * w_d), g.big_l / (2.0 * g.k)};
  const double tau = z1 / g.k;
  const cplx ux{0.5 * g.w0 * g.w0 * q[0], g.x0[0] + tau * q[0]};
  const cplx uy{0.5 * g.w0 * g.w0 * q[1], g.x0[1] + tau * q[1]};
  const cplx e = (ux * ux + uy * uy) / (4.0 * a) - 0.25 * g.w0 * g.w0 * norm2(q);
  return w_d * g.w0 * g.zeta0 / (2.0 * a) * std::exp(e);
}

/// Y1(z1) for a detector of finite size w_d: detection probability, not a
/// density. Full two-dimensional integral over the transfer vector.
inline Y1Numeric y1_numeric_finite(double z1, const BeamGeometry& g, const TurbulenceParams& p, double w_d,
                                   const QuadratureSpec& spec) {
  if (z1 < 0.0 || z1 > g.big_l) throw DomainError("y1_numeric_finite: z1 outside [0, L]");
  if (!(w_d > 0.0)) throw DomainError("y1_numeric_finite: w_d must be > 0");
  spec.validate();
  Y1Numeric r;
  if (p.cn2 == 0.0) return r;
  const double k2h = 0.5 * g.k * g.k;
  const double g0 = std::norm(overlap_amplitude({0.0, 0.0}, z1, g, w_d));
  const Value lam = lambda_numeric(p, spec);
  r.lambda_part = {k2h * lam.value * g0, k2h * lam.error * g0, lam.evaluations};

  const double kappa0 = spec.outer_scale_limit ? 0.0 : p.kappa0;
  const double c = p.n_vk * p.cn2 / (4.0 * std::numbers::pi * std::numbers::pi);
  // |S_q|^2 / |S_0|^2 = exp(2 Re D(q)) with D(q) = (2 u0.d + d.d) / (4a) - w0^2 |q|^2 / 4,
  // u0 = i x0 and d = (w0^2 / 2 + i z1 / k) q
  const cplx a4 = 4.0 * cplx{0.25 * (g.w0 * g.w0 + w_d * w_d), g.big_l / (2.0 * g.k)};
  const cplx dq{0.5 * g.w0 * g.w0, z1 / g.k};
  auto h = [&](const Vec2& q) {
    const cplx u0d = cplx{0.0, 1.0} * dq * (g.x0[0] * q[0] + g.x0[1] * q[1]);
    const cplx lin = 2.0 * u0d / a4;
    const cplx quad = dq * dq * norm2(q) / a4 - 0.25 * g.w0 * g.w0 * norm2(q);
    const double s = g0 * detail::symmetric_excess(2.0 * lin.real(), 2.0 * quad.real()).real();
    return c * std::pow(norm2(q) + kappa0 * kappa0, -11.0 / 6.0) * s;
  };
  // |S_q| is a Gaussian envelope; grow the radius until it is negligible
  double r_max = 4.0 / g.w0;
  for (int it = 0; it < 60; ++it) {
    double peak = 0.0;
    for (int d = 0; d < 8; ++d) {
      const double th = d * std::numbers::pi / 4.0;
      peak = std::max(peak, std::norm(overlap_amplitude({r_max * std::cos(th), r_max * std::sin(th)}, z1, g, w_d)));
    }
    if (peak <= 1e-30 * g0) break;
    r_max *= 1.5;
  }
  const double tail = -g0 * detail::spectral_tail(r_max, p.cn2, p.n_vk, kappa0);
  const auto res = detail::disk_integral_even(h, r_max, 1e-3 * spec.rel_tol * std::abs(tail), spec);
  detail::require_converged(res, spec, "y1_numeric_finite");
  r.kappa_part = {k2h * (res.value + tail), k2h * res.error, res.evaluations};
  return r;
}

/// Point-detector Y1 from finite detectors of size h and h/2, scaled to a
/// density and Richardson-extrapolated in w_d^2.
inline Y1Numeric y1_numeric_extrapolated(double z1, const BeamGeometry& g, const TurbulenceParams& p,
                                         const QuadratureSpec& spec, double h = 0.0) {
  if (h == 0.0) h = 0.025 * g.w0;
  const auto coarse = y1_numeric_finite(z1, g, p, h, spec);
  const auto fine = y1_numeric_finite(z1, g, p, 0.5 * h, spec);
  const double sc = 1.0 / (2.0 * std::numbers::pi * h * h);
  const double sf = 4.0 * sc;
  auto extrap = [&](const Value& c, const Value& f) {
    return Value{(4.0 * sf * f.value - sc * c.value) / 3.0, (4.0 * sf * f.error + sc * c.error) / 3.0,
                 c.evaluations + f.evaluations};
  };
  return {extrap(coarse.lambda_part, fine.lambda_part), extrap(coarse.kappa_part, fine.kappa_part)};
}

/// Order-1 term of the photon-number density, 2 int_0^L (Y1 - Lambda part) dz1.
inline Value order1_numeric(const BeamGeometry& g, const TurbulenceParams& p, const QuadratureSpec& spec) {
  spec.validate();
  if (p.cn2 == 0.0 || g.big_l == 0.0) return {};
  // L - z1 = L v^3 removes the (L - z1)^{5/3} endpoint behaviour
  Value acc;
  auto f = [&](double v) {
    const double z1 = g.big_l * (1.0 - v * v * v);
    const auto y = y1_numeric(z1, g, p, spec);
    acc.evaluations += y.kappa_part.evaluations;
    return 6.0 * g.big_l * v * v * y.kappa_part.value;
  };
  const auto e = quad::integrate_adaptive(f, 0.0, 1.0, spec.rel_tol, 0.0, 200);
  if (e.error > 10.0 * spec.rel_tol * std::abs(e.value))
    throw QuadratureError("order1_numeric: budget exhausted", e.value, e.error);
  return {e.value, e.error, acc.evaluations};
}

/// Order-1 detection probability for a finite detector, on z_points
/// Gauss-Legendre nodes in v with L - z1 = L v^3.
inline Value order1_numeric_finite(const BeamGeometry& g, const TurbulenceParams& p, double w_d,
                                   const QuadratureSpec& spec, int z_points = 12) {
  spec.validate();
  if (p.cn2 == 0.0 || g.big_l == 0.0) return {};
  const auto rule = quad::gauss_legendre(z_points, 0.0, 1.0);
  CompensatedSum sum;
  Value out;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = rule.nodes[i];
    const double z1 = g.big_l * (1.0 - v * v * v);
    const auto y = y1_numeric_finite(z1, g, p, w_d, spec);
    const double jac = 6.0 * g.big_l * v * v * rule.weights[i];
    sum.add(jac * y.kappa_part.value);
    out.error += jac * y.kappa_part.error;
    out.evaluations += y.kappa_part.evaluations;
  }
  out.value = sum.value();
  return out;
}

/// Analytic two-point inputs for the contraction spot checks.
enum class GaussianInput { zero, identity, zeta_zeta_conj, zeta_zeta };

struct ContractionValue {
  cplx value;
  cplx lambda_part;      ///< Lambda-weighted input at (k1, k2)
  cplx subtracted_part;  ///< integral of Phi times (shifted input - input)
  double error = 0.0;
  long evaluations = 0;
};

namespace detail {

inline cplx gaussian_input(GaussianInput m, const Vec2& a, const Vec2& b, const BeamGeometry& g) {
  switch (m) {
    case GaussianInput::zeta_zeta_conj: return coherent::zeta_fn(a, g) * std::conj(coherent::zeta_fn(b, g));
    case GaussianInput::zeta_zeta: return coherent::zeta_fn(a, g) * coherent::zeta_fn(b, g);
    default: return {};
  }
}

/// Exponents is called with q and returns {lin, quad} such that the shifted,
/// phased input equals m0 exp(lin + quad).
template <class Exponents>
ContractionValue contraction_numeric(GaussianInput m, const Vec2& k1, const Vec2& k2, const BeamGeometry& g,
                                     const TurbulenceParams& p, const QuadratureSpec& spec, Exponents&& exponents) {
  ContractionValue out;
  const double k2h = 0.5 * g.k * g.k;
  const cplx m0 = gaussian_input(m, k1, k2, g);
  const Value lam = lambda_numeric(p, spec);
  out.lambda_part = k2h * lam.value * m0;
  if (m0 == cplx{}) return out;
  const double c = p.n_vk * p.cn2 / (4.0 * std::numbers::pi * std::numbers::pi);
  const double kappa0 = spec.outer_scale_limit ? 0.0 : p.kappa0;
  const double r_max = std::max(std::sqrt(norm2(k1)), std::sqrt(norm2(k2))) + 14.0 / g.w0;
  const double tail_mass = spectral_tail(r_max, p.cn2, p.n_vk, kappa0);
  const double scale = p.n_vk * p.cn2 * std::pow(g.w0, 5.0 / 3.0);
  std::array<double, 2> parts{};
  for (int part = 0; part < 2; ++part) {
    auto h = [&](const Vec2& q) {
      const auto [lin, quad] = exponents(q);
      const cplx s = symmetric_excess(lin, quad);
      const double v = part == 0 ? s.real() : s.imag();
      return c * std::pow(norm2(q) + kappa0 * kappa0, -11.0 / 6.0) * v;
    };
    const auto res = disk_integral_even(h, r_max, 1e-3 * spec.rel_tol * scale, spec);
    require_converged(res, spec, "contraction_numeric");
    parts[part] = res.value;
    out.error += k2h * std::abs(m0) * res.error;
    out.evaluations += res.evaluations;
  }
  // the Gaussian is negligible beyond r_max, only -m0 remains there
  out.subtracted_part = k2h * m0 * (cplx{parts[0], parts[1]} - tail_mass);
  out.value = out.lambda_part + out.subtracted_part;
  return out;
}

}  // namespace detail

/// One entry of V0(z) ⋄⋄a m at (k1, k2). For m = identity the value is the
/// coefficient of the delta function on the diagonal and 0 off it.
inline ContractionValue contract_a_numeric(GaussianInput m, const Vec2& k1, const Vec2& k2, double z,
                                           const BeamGeometry& g, const TurbulenceParams& p,
                                           const QuadratureSpec& spec) {
  spec.validate();
  ContractionValue out;
  if (m == GaussianInput::zero || p.cn2 == 0.0) return out;
  if (m == GaussianInput::identity) {
    if (k1 != k2) return out;
    const Value lam = lambda_numeric(p, spec);
    out.lambda_part = out.value = 0.5 * g.k * g.k * lam.value;
    out.error = 0.5 * g.k * g.k * lam.error;
    return out;
  }
  const double tau = z / g.k;
  const Vec2 d{k1[0] - k2[0], k1[1] - k2[1]};
  // zeta is real, so both inputs shift as exp(-(w0^2/4)(|k1-q|^2 - |k1|^2 + |k2-q|^2 - |k2|^2))
  const double w2 = 0.5 * g.w0 * g.w0;
  return detail::contraction_numeric(m, k1, k2, g, p, spec, [&](const Vec2& q) {
    const cplx lin{w2 * ((k1[0] + k2[0]) * q[0] + (k1[1] + k2[1]) * q[1]), tau * (q[0] * d[0] + q[1] * d[1])};
    return std::pair<cplx, cplx>{lin, cplx{-w2 * norm2(q), 0.0}};
  });
}

/// One entry of V0(z) ⋄⋄b m at (k1, k2).
inline ContractionValue contract_b_numeric(GaussianInput m, const Vec2& k1, const Vec2& k2, double z,
                                           const BeamGeometry& g, const TurbulenceParams& p,
                                           const QuadratureSpec& spec) {
  spec.validate();
  ContractionValue out;
  if (m == GaussianInput::zero || p.cn2 == 0.0) return out;
  const double tau = z / g.k;
  const Vec2 d{k1[0] - k2[0], k1[1] - k2[1]};
  if (m == GaussianInput::identity) {
    // the delta function fixes q = (k1 - k2) / 2
    const double d2 = norm2(d);
    out.value = 0.5 * g.k * g.k * 0.25 * turb::psd_q(0.25 * d2, p) * std::polar(1.0, 0.25 * tau * d2);
    return out;
  }
  const double w2 = 0.5 * g.w0 * g.w0;
  return detail::contraction_numeric(m, k1, k2, g, p, spec, [&](const Vec2& q) {
    const double qd = q[0] * d[0] + q[1] * d[1];
    return std::pair<cplx, cplx>{cplx{w2 * qd, tau * qd}, cplx{-w2 * norm2(q), -tau * norm2(q)}};
  });
}

/// Calibration sample point: normalized distance, normalized offset and
/// z1 / L.
struct CalibrationPoint {
  double beta;
  double u0;
  double z_fraction;
};

inline std::vector<CalibrationPoint> default_calibration_points() {
  return {{0.3, 0.5, 0.25}, {1.0, 1.0, 0.5}, {3.0, 1.5, 0.25}};
}

struct Calibration {
  double n_vk = 0.0;
  double spread = 0.0;  ///< (max - min) / mean of the per-point values
  std::vector<double> per_point;
  bool ok = false;
  static constexpr double max_spread = 0.02;
};

/// N_vK for which the quadrature turbulence term of Y1 reproduces the closed
/// form evaluated with p.n_vk.
inline Calibration calibrate_nvk(const BeamGeometry& g, const TurbulenceParams& p, const QuadratureSpec& spec,
                                 const std::vector<CalibrationPoint>& points = default_calibration_points()) {
  if (!(p.cn2 > 0.0)) throw DomainError("calibrate_nvk: cn2 must be > 0");
  if (points.empty()) throw DomainError("calibrate_nvk: no sample points");
  Calibration c;
  for (const auto& pt : points) {
    const BeamGeometry gp = g.with_beta(pt.beta).with_u0(pt.u0);
    const double z1 = pt.z_fraction * gp.big_l;
    const double closed = coherent::y1_closed_parts(z1, gp, p).kappa_term;
    const double numeric = y1_numeric(z1, gp, p, spec).kappa_part.value;
    if (numeric == 0.0) throw DomainError("calibrate_nvk: turbulence term vanishes at a sample point");
    c.per_point.push_back(p.n_vk * closed / numeric);
  }
  const auto [lo, hi] = std::minmax_element(c.per_point.begin(), c.per_point.end());
  CompensatedSum s;
  for (double v : c.per_point) s.add(v);
  c.n_vk = s.value() / static_cast<double>(c.per_point.size());
  c.spread = (*hi - *lo) / c.n_vk;
  c.ok = c.spread <= Calibration::max_spread;
  return c;
}

/// Y1 quadrature with the turbulence part rescaled to a calibrated N_vK.
inline double y1_calibrated(double z1, const BeamGeometry& g, const TurbulenceParams& p, double calibrated_n_vk,
                            const QuadratureSpec& spec) {
  const auto y = y1_numeric(z1, g, p, spec);
  return y.lambda_part.value + y.kappa_part.value * calibrated_n_vk / p.n_vk;
}

struct PlaneIntegral {
  double value = 0.0;
  double disk = 0.0;  ///< quadrature over the disk
  double tail = 0.0;  ///< analytic contribution outside the disk
  double error = 0.0;
  long evaluations = 0;
};

namespace detail {

/// int_{xc}^inf e^{-x} L_nu(x) dx from the algebraic asymptotic expansion of
/// e^{-x} L_nu(x); the exponentially small part is dropped.
inline double laguerre_tail(double nu, double xc) {
  if (nu == 0.0) return std::exp(-xc);
  const double s = std::sin(std::numbers::pi * nu);
  if (s == 0.0 || nu == std::floor(nu)) return 0.0;
  const double inv_gamma_neg = -specfun::gamma(1.0 + nu) * s / std::numbers::pi;
  double coef = 1.0;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 60; ++j) {
    const double term = coef * std::pow(xc, -nu - j) / (nu + j);
    if (std::abs(term) > std::abs(prev)) break;
    sum += term;
    prev = term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    coef *= (1.0 + nu + j) * (1.0 + nu + j) / (j + 1.0);
  }
  return inv_gamma_neg * sum;
}

template <class F>
PlaneIntegral radial_plane_integral(F&& density, double r_max, double tail, double abs_tol,
                                    const QuadratureSpec& spec) {
  auto f = [&](const cubature::Point<2>& pt) {
    return pt[0] * density(Vec2{pt[0] * std::cos(pt[1]), pt[0] * std::sin(pt[1])});
  };
  const cubature::Point<2> lo{0.0, 0.0}, hi{r_max, 2.0 * std::numbers::pi};
  cubature::Result res;
  if (spec.method == Method::monte_carlo) {
    const int strata = 64;
    const int per_cell = static_cast<int>(std::max<long>(2, spec.max_evals / (strata * strata)));
    res = cubature::stratified_monte_carlo<2>(f, lo, hi, strata, per_cell, spec.seed);
  } else {
    res = cubature::genz_malik<2>(f, lo, hi, spec.rel_tol, abs_tol, spec.max_evals);
    require_converged(res, spec, "plane integral");
  }
  PlaneIntegral out;
  out.disk = res.value;
  out.tail = tail;
  out.value = res.value + tail;
  out.error = res.error;
  out.evaluations = res.evaluations;
  return out;
}

}  // namespace detail

/// int R_n(x0) d^2x0 for one series order over the disk of radius
/// 8 w(beta), plus the analytic remainder outside it.
inline PlaneIntegral order_plane_integral(int n, const BeamGeometry& g, double kappa, const QuadratureSpec& spec) {
  spec.validate();
  const double beta = g.beta();
  const double q = 1.0 + beta * beta;
  const double r_max = 8.0 * coherent::width(beta, kappa, g.w0);
  const double xc = 2.0 * r_max * r_max / (g.w0 * g.w0 * q);
  const double nu = 5.0 * n / 6.0;
  // R_n = coef e^{-X} L_nu(X) with X = 2 r^2 / (w0^2 q), d^2x0 = (pi w0^2 q / 2) dX
  const double at_zero = coherent::r_n_value(n, g, kappa, {0.0, 0.0});
  const double tail = at_zero * 0.5 * std::numbers::pi * g.w0 * g.w0 * q * detail::laguerre_tail(nu, xc);
  const double abs_tol = 1e-3 * spec.rel_tol * g.zeta0 * g.zeta0;
  return detail::radial_plane_integral([&](const Vec2& x0) { return coherent::r_n_value(n, g, kappa, x0); },
                                       r_max, tail, abs_tol, spec);
}

/// int <n(x0)> d^2x0 of a computed distribution.
inline PlaneIntegral conservation_numeric(const coherent::DistributionResult& dist, const QuadratureSpec& spec) {
  spec.validate();
  const auto& g = dist.geometry;
  const double beta = g.beta();
  const double r_max = 8.0 * dist.width;
  double tail = 0.0;
  if (dist.method == coherent::DistributionMethod::approximate) {
    const double s = (1.0 + beta * beta) * (1.0 + coherent::xi(beta, dist.kappa));
    tail = g.zeta0 * g.zeta0 * std::exp(-2.0 * r_max * r_max / (g.w0 * g.w0 * s));
  } else {
    const double q = 1.0 + beta * beta;
    const double xc = 2.0 * r_max * r_max / (g.w0 * g.w0 * q);
    for (int n = 0; n <= dist.truncation_order; ++n) {
      const double at_zero = coherent::r_n_value(n, g, dist.kappa, {0.0, 0.0});
      tail += at_zero * 0.5 * std::numbers::pi * g.w0 * g.w0 * q * detail::laguerre_tail(5.0 * n / 6.0, xc);
    }
  }
  const double abs_tol = 1e-3 * spec.rel_tol * g.zeta0 * g.zeta0;
  return detail::radial_plane_integral([&](const Vec2& x0) { return dist.density_at(x0); }, r_max, tail, abs_tol,
                                       spec);
}

/// One line of a verification table.
struct CheckRow {
  std::string name;
  double value_closed = 0.0;
  double value_oracle = 0.0;
  double rel_diff = 0.0;
  double tol = 0.0;
  bool pass = false;
  double oracle_error = 0.0;
};

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return r.ec == std::errc{} ? std::string(buf, r.ptr) : std::string("nan");
}

class VerificationReport {
public:
  /// Relative comparison; an exact zero on both sides counts as agreement.
  void add(std::string name, double closed, double oracle, double tol, double oracle_error = 0.0) {
    const double diff = std::abs(closed - oracle);
    const double rel = diff == 0.0 ? 0.0 : diff / std::abs(oracle);
    rows_.push_back({std::move(name), closed, oracle, rel, tol, rel <= tol, oracle_error});
  }

  /// Row whose deviation is supplied directly (spreads, residual norms).
  void add_deviation(std::string name, double closed, double oracle, double deviation, double tol,
                     double oracle_error = 0.0) {
    rows_.push_back({std::move(name), closed, oracle, deviation, tol, deviation <= tol, oracle_error});
  }

  void append(const VerificationReport& other) {
    rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
  }

  const std::vector<CheckRow>& rows() const noexcept { return rows_; }

  bool passed() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const CheckRow& r) { return r.pass; });
  }

  void write_csv(std::ostream& os) const {
    os << "check_name,value_closed,value_oracle,rel_diff,tol,pass\n";
    for (const auto& r : rows_) {
      os << r.name << ',' << format_double(r.value_closed) << ',' << format_double(r.value_oracle) << ','
         << format_double(r.rel_diff) << ',' << format_double(r.tol) << ',' << (r.pass ? "true" : "false")
         << '\n';
    }
  }

  void write_text(std::ostream& os) const {
    std::size_t width = 10;
    for (const auto& r : rows_) width = std::max(width, r.name.size());
    auto pad = [](std::string s, std::size_t w) {
      if (s.size() < w) s.append(w - s.size(), ' ');
      return s;
    };
    os << pad("check", width) << "  " << pad("closed", 24) << pad("oracle", 24) << pad("oracle_err", 24)
       << pad("rel_diff", 24) << pad("tol", 12) << "result\n";
    for (const auto& r : rows_) {
      os << pad(r.name, width) << "  " << pad(format_double(r.value_closed), 24)
         << pad(format_double(r.value_oracle), 24) << pad(format_double(r.oracle_error), 24)
         << pad(format_double(r.rel_diff), 24) << pad(format_double(r.tol), 12) << (r.pass ? "PASS" : "FAIL")
         << '\n';
    }
    std::size_t failed = 0;
    for (const auto& r : rows_) failed += r.pass ? 0 : 1;
    os << rows_.size() << " checks, " << failed << " failed\n";
  }

private:
  std::vector<CheckRow> rows_;
};

}  // namespace scintilla::oracle
