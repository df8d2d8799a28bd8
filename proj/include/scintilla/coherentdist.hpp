#pragma once

// Photon-number distribution of a coherent Gaussian beam after turbulent
// propagation: parameter function, detector mode, overlap density, first
// overlap Y1, the per-order series terms and the Gaussian approximation.
//
// Densities are per unit detector area (the point-detector limit).

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "scintilla/error.hpp"
#include "scintilla/kernelgrid.hpp"
#include "scintilla/specfun.hpp"
#include "scintilla/turbmodel.hpp"

namespace scintilla::coherent {

/// sqrt(2 pi) w0 zeta0 exp(-w0^2 |k|^2 / 4)
inline cplx zeta_fn(const Vec2& k, const BeamGeometry& g) {
  return std::sqrt(2.0 * std::numbers::pi) * g.w0 * g.zeta0 * std::exp(-0.25 * g.w0 * g.w0 * norm2(k));
}

/// Normalized detector mode of size w_d centred at x0, propagated to z:
/// sqrt(2 pi) w_d exp(-w_d^2 |k|^2 / 4 - i k.x0 + i z |k|^2 / 2k).
inline cplx detector_mode(const Vec2& k, double z, const Vec2& x0, double w_d, const BeamGeometry& g) {
  if (w_d < 0.0) throw DomainError("detector_mode: w_d must be >= 0");
  if (w_d == 0.0) throw DomainError("detector_mode: w_d = 0 exists only as the density limit");
  const double k2 = norm2(k);
  const double phase = -(k[0] * x0[0] + k[1] * x0[1]) + z * k2 / (2.0 * g.k);
  return std::sqrt(2.0 * std::numbers::pi) * w_d * std::exp(-0.25 * w_d * w_d * k2) * std::polar(1.0, phase);
}

inline TransverseField sample_zeta(const WavevectorGrid& grid, const BeamGeometry& g) {
  return TransverseField::sample(grid, [&](const Vec2& k) { return zeta_fn(k, g); });
}

inline TransverseField sample_detector(const WavevectorGrid& grid, const BeamGeometry& g, double w_d) {
  return TransverseField::sample(grid, [&](const Vec2& k) { return detector_mode(k, g.big_l, g.x0, w_d, g); });
}

/// Detector kernel D(k1,k2) = M(k1) M*(k2).
inline TwoPointKernel detector_kernel(const TransverseField& mode) { return TwoPointKernel::outer(mode, mode); }

/// Argument 2 u0^2 / (1 + beta^2) of the series.
inline double series_argument(const BeamGeometry& g) {
  const double b = g.beta();
  const double u = g.u0();
  return 2.0 * u * u / (1.0 + b * b);
}

/// Overlap density 2 w0^2 k^2 zeta0^2 / (pi (w0^4 k^2 + 4 L^2)) exp(-X) at x0.
inline double mu_squared_at(const BeamGeometry& g, const Vec2& x0) {
  const double a = std::pow(g.w0, 4) * g.k * g.k + 4.0 * g.big_l * g.big_l;
  const double x = 2.0 * g.w0 * g.w0 * g.k * g.k * norm2(x0) / a;
  return 2.0 * g.w0 * g.w0 * g.k * g.k * g.zeta0 * g.zeta0 / (std::numbers::pi * a) * std::exp(-x);
}

inline double mu_squared(const BeamGeometry& g) { return mu_squared_at(g, g.x0); }

/// Detection probability |M* ⋄ zeta|^2 for a detector mode of finite size.
inline double mu_squared_finite(const BeamGeometry& g, double w_d) {
  if (!(w_d > 0.0)) throw DomainError("mu_squared_finite: w_d must be > 0");
  const cplx a{0.25 * (g.w0 * g.w0 + w_d * w_d), g.big_l / (2.0 * g.k)};
  const cplx mu = w_d * g.w0 * g.zeta0 / (2.0 * a) * std::exp(-norm2(g.x0) / (4.0 * a));
  return std::norm(mu);
}

struct Y1Parts {
  double lambda_term = 0.0;
  double kappa_term = 0.0;
  double total() const noexcept { return lambda_term + kappa_term; }
};

/// First overlap Y1(z1) in closed form: outer-scale term plus turbulence term
/// with the Laguerre function of order 5/6.
inline Y1Parts y1_closed_parts(double z1, const BeamGeometry& g, const TurbulenceParams& p) {
  if (z1 < 0.0 || z1 > g.big_l) throw DomainError("y1_closed: z1 outside [0, L]");
  if (p.cn2 == 0.0) return {};
  const double pi = std::numbers::pi;
  const double a = std::pow(g.w0, 4) * g.k * g.k + 4.0 * g.big_l * g.big_l;
  const double x = 2.0 * g.w0 * g.w0 * g.k * g.k * norm2(g.x0) / a;
  const double z2 = g.zeta0 * g.zeta0;
  const double kappa = turb::kappa_from_k(turb::strength_k(g, p));
  Y1Parts r;
  r.lambda_term = g.w0 * g.w0 * std::pow(g.k, 4) * z2 * turb::lambda_const(p) / (a * pi) * std::exp(-x);
  r.kappa_term = -32.0 * g.k * std::pow(2.0, 2.0 / 3.0) * std::pow(g.big_l - z1, 5.0 / 3.0) * z2 * kappa /
                 (3.0 * std::pow(a, 11.0 / 6.0) * pi) * specfun::laguerre_scaled({5.0 / 6.0}, x);
  return r;
}

inline double y1_closed(double z1, const BeamGeometry& g, const TurbulenceParams& p) {
  return y1_closed_parts(z1, g, p).total();
}

/// Closed form of int_0^inf q^m exp(-b q) Phi(q) dq with b = A2 / (2 A1),
/// A1 = w0^4 k^2 + 4 L^2 and A2 = 4 w0^2 (L - z1)^2, in the large outer-scale
/// limit: 4 pi Lambda delta_{m0} - 2 pi (-1)^m N_vK Cn2 b^{5/6-m} / Gamma(11/6 - m).
inline double qm_closed(int m, double z1, const BeamGeometry& g, const TurbulenceParams& p) {
  if (m < 0) throw DomainError("qm_closed: m must be >= 0");
  if (p.cn2 == 0.0) return 0.0;
  const double a1 = std::pow(g.w0, 4) * g.k * g.k + 4.0 * g.big_l * g.big_l;
  const double a2 = 4.0 * g.w0 * g.w0 * (g.big_l - z1) * (g.big_l - z1);
  const double b = a2 / (2.0 * a1);
  const double pi = std::numbers::pi;
  double v = m == 0 ? 4.0 * pi * turb::lambda_const(p) : 0.0;
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  // 1/Gamma(11/6 - m) is finite for all integer m
  v -= 2.0 * pi * sign * p.n_vk * p.cn2 * std::pow(b, 5.0 / 6.0 - m) / specfun::gamma(11.0 / 6.0 - m);
  return v;
}

enum class TermKind { closed_form, grid, oracle };

/// One order of the photon-number series as a function of detector position.
struct OrderTerm {
  int order = 0;
  TermKind kind = TermKind::closed_form;
  std::function<double(const Vec2&)> value_at;
  double value = 0.0;  ///< value at the geometry's x0
};

namespace detail {

inline double order_prefactor(int n, const BeamGeometry& g, const TurbulenceParams& p) {
  const double pi = std::numbers::pi;
  const double big_k = turb::strength_k(g, p);
  const double a = std::pow(g.w0, 4) * g.k * g.k + 4.0 * g.big_l * g.big_l;
  const double z2 = g.zeta0 * g.zeta0;
  const double g23 = specfun::gamma(2.0 / 3.0);
  // nested z-integrals of prod (L - z_j)^{5/3} over the ordered simplex
  const double s = 0.375 * std::pow(g.big_l, 8.0 / 3.0);
  switch (n) {
    case 1:
      return -64.0 * std::sqrt(2.0 * pi) * big_k * g.k * z2 / (3.0 * g23 * std::pow(a, 11.0 / 6.0)) * s;
    case 2:
      return 65536.0 * pi * pi * pi * std::cbrt(2.0) * big_k * big_k * z2 /
             (135.0 * std::pow(g23, 5) * g.w0 * g.w0 * std::pow(a, 8.0 / 3.0)) * (s * s / 2.0);
    case 3:
      return -524288.0 * std::pow(pi, 5.5) * std::sqrt(6.0) * big_k * big_k * big_k * z2 /
             (75.0 * std::pow(g23, 9) * g.k * std::pow(g.w0, 4) * std::pow(a, 3.5)) * (s * s * s / 6.0);
    default:
      throw DomainError("order_term: only orders 1, 2 and 3 have closed forms");
  }
}

}  // namespace detail

/// Turbulence-only closed form of order n in {1, 2, 3}, integrated over the
/// propagation distance.
inline OrderTerm order_term(int n, const BeamGeometry& g, const TurbulenceParams& p) {
  const double pref = detail::order_prefactor(n, g, p);
  const double a = std::pow(g.w0, 4) * g.k * g.k + 4.0 * g.big_l * g.big_l;
  const double c = 2.0 * g.w0 * g.w0 * g.k * g.k / a;
  const LaguerreOrder nu = LaguerreOrder::series_order(n);
  OrderTerm t;
  t.order = n;
  t.kind = TermKind::closed_form;
  t.value_at = [pref, c, nu](const Vec2& x0) { return pref * specfun::laguerre_scaled(nu, c * norm2(x0)); };
  t.value = t.value_at(g.x0);
  return t;
}

/// Series term of order n >= 0 for strength kappa:
/// zeta0^2 2 (-kappa beta^{8/3})^n Gamma(1+5n/6) e^{-X} L_{5n/6}(X) /
/// (pi w0^2 (1+beta^2)^{1+5n/6} n!).
inline double r_n_value(int n, const BeamGeometry& g, double kappa, const Vec2& x0) {
  if (n < 0) throw DomainError("r_n: order must be >= 0");
  if (n == 0) return mu_squared_at(g, x0);
  const double beta = g.beta();
  const double nu = 5.0 * n / 6.0;
  const double q = 1.0 + beta * beta;
  const double x = 2.0 * norm2(x0) / (g.w0 * g.w0 * q);
  double coef = g.zeta0 * g.zeta0 * 2.0 / (std::numbers::pi * g.w0 * g.w0 * std::pow(q, 1.0 + nu));
  if (n > 0) coef *= std::pow(-kappa * std::pow(beta, 8.0 / 3.0), n) / std::tgamma(n + 1.0);
  // sum_m Gamma(1+m+nu) (-X)^m / m!^2 = Gamma(1+nu) e^{-X} L_nu(X)
  return coef * specfun::gamma(1.0 + nu) * specfun::laguerre_scaled({nu}, x);
}

inline OrderTerm r_n(int n, const BeamGeometry& g, const TurbulenceParams& p) {
  const double kappa = turb::kappa_from_k(turb::strength_k(g, p));
  OrderTerm t;
  t.order = n;
  t.kind = TermKind::closed_form;
  t.value_at = [n, g, kappa](const Vec2& x0) { return r_n_value(n, g, kappa, x0); };
  t.value = t.value_at(g.x0);
  return t;
}

/// kappa beta^{8/3} / (1 + beta^2)^{5/6}
inline double xi(double beta, double kappa) {
  return kappa * std::pow(beta, 8.0 / 3.0) / std::pow(1.0 + beta * beta, 5.0 / 6.0);
}

/// w(beta) / w0 = sqrt(1 + beta^2) sqrt(1 + Xi).
inline double width_ratio(double beta, double kappa) {
  if (beta < 0.0 || kappa < 0.0) throw DomainError("width: beta and kappa must be >= 0");
  return std::sqrt(1.0 + beta * beta) * std::sqrt(1.0 + xi(beta, kappa));
}

inline double width(double beta, double kappa, double w0) { return w0 * width_ratio(beta, kappa); }

enum class DistributionMethod { series, approximate };

struct DistributionResult {
  DistributionMethod method = DistributionMethod::series;
  BeamGeometry geometry;
  double kappa = 0.0;
  int truncation_order = 0;
  std::vector<double> order_values;  ///< R_0 .. R_truncation at geometry.x0
  double density = 0.0;              ///< <n(x0)> [photons / m^2]
  double width = 0.0;                ///< w(beta) [m]
  double total_photons = 0.0;        ///< analytic plane integral
  bool converged = false;

  /// Density at another detector position with the same truncation.
  double density_at(const Vec2& x0) const {
    if (method == DistributionMethod::approximate) {
      const double beta = geometry.beta();
      const double s = (1.0 + beta * beta) * (1.0 + xi(beta, kappa));
      const double w02 = geometry.w0 * geometry.w0;
      return 2.0 * geometry.zeta0 * geometry.zeta0 / (std::numbers::pi * s * w02) *
             std::exp(-2.0 * norm2(x0) / (w02 * s));
    }
    CompensatedSum sum;
    for (int n = 0; n <= truncation_order; ++n) sum.add(r_n_value(n, geometry, kappa, x0));
    return sum.value();
  }
};

/// Partial sums of the all-orders series. Converged once the last retained
/// term is below tol times the running sum; otherwise flagged.
inline DistributionResult avg_n_series(const BeamGeometry& g, const TurbulenceParams& p, int max_n = 12,
                                       double tol = 1e-6) {
  if (max_n < 0 || max_n > 25) throw DomainError("avg_n_series: max_n must be in [0, 25]");
  DistributionResult r;
  r.method = DistributionMethod::series;
  r.geometry = g;
  r.kappa = turb::kappa_from_k(turb::strength_k(g, p));
  r.width = width(g.beta(), r.kappa, g.w0);
  r.total_photons = g.zeta0 * g.zeta0;
  CompensatedSum sum;
  const double r0 = r_n_value(0, g, r.kappa, g.x0);
  sum.add(r0);
  r.order_values.push_back(r0);
  r.truncation_order = 0;
  if (r.kappa == 0.0 || g.big_l == 0.0) {
    r.converged = true;
  } else {
    for (int n = 1; n <= max_n; ++n) {
      const double rn = r_n_value(n, g, r.kappa, g.x0);
      sum.add(rn);
      r.order_values.push_back(rn);
      r.truncation_order = n;
      if (std::abs(rn) <= tol * std::abs(sum.value())) {
        r.converged = true;
        break;
      }
    }
  }
  r.density = sum.value();
  if (r.density < 0.0) r.converged = false;
  return r;
}

/// Series truncated at a fixed order, without a convergence test.
inline DistributionResult avg_n_truncated(const BeamGeometry& g, const TurbulenceParams& p, int order) {
  if (order < 0 || order > 25) throw DomainError("avg_n_truncated: order must be in [0, 25]");
  DistributionResult r;
  r.method = DistributionMethod::series;
  r.geometry = g;
  r.kappa = turb::kappa_from_k(turb::strength_k(g, p));
  r.width = width(g.beta(), r.kappa, g.w0);
  r.total_photons = g.zeta0 * g.zeta0;
  r.truncation_order = order;
  CompensatedSum sum;
  for (int n = 0; n <= order; ++n) {
    r.order_values.push_back(r_n_value(n, g, r.kappa, g.x0));
    sum.add(r.order_values.back());
  }
  r.density = sum.value();
  r.converged = true;
  return r;
}

/// Gaussian approximation with broadening factor Xi.
inline DistributionResult avg_n_approx(const BeamGeometry& g, const TurbulenceParams& p) {
  DistributionResult r;
  r.method = DistributionMethod::approximate;
  r.geometry = g;
  r.kappa = turb::kappa_from_k(turb::strength_k(g, p));
  r.width = width(g.beta(), r.kappa, g.w0);
  r.total_photons = g.zeta0 * g.zeta0;
  r.converged = true;
  r.density = r.density_at(g.x0);
  return r;
}

}  // namespace scintilla::coherent
