#pragma once

// Turbulence statistics and beam geometry.
//
// Units are SI. The refractive-index spectrum is written in the Fourier
// convention where Lambda = int Phi(k) d^2k/(2pi)^2, so the von Karman
// constant N_vK equals the textbook 0.033 multiplied by (2pi)^3.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "scintilla/error.hpp"
#include "scintilla/specfun.hpp"

namespace scintilla {

using Vec2 = std::array<double, 2>;

inline double norm2(const Vec2& v) noexcept { return v[0] * v[0] + v[1] * v[1]; }

namespace turb {

/// pi sqrt(3) Gamma(8/3), i.e. 0.033005 (2pi)^3.
inline double kolmogorov_n_vk() {
  return std::numbers::pi * std::sqrt(3.0) * specfun::gamma(8.0 / 3.0);
}

/// Converts a spectral constant quoted in the 0.033 convention.
inline double n_vk_from_textbook(double c) {
  return c * 8.0 * std::numbers::pi * std::numbers::pi * std::numbers::pi;
}

}  // namespace turb

/// Refractive-index turbulence statistics.
struct TurbulenceParams {
  double cn2 = 0.0;     ///< structure constant [m^-2/3]
  double kappa0 = 1.0;  ///< inverse outer scale [1/m]
  double n_vk = turb::kolmogorov_n_vk();

  void validate() const {
    if (!(cn2 >= 0.0) || !std::isfinite(cn2)) throw DomainError("TurbulenceParams: cn2 must be >= 0");
    if (!(kappa0 > 0.0)) throw DomainError("TurbulenceParams: kappa0 must be > 0");
    if (!(n_vk > 0.0)) throw DomainError("TurbulenceParams: n_vk must be > 0");
  }
};

/// Gaussian beam and detector placement.
struct BeamGeometry {
  double k = 2.0 * std::numbers::pi / 1.55e-6;  ///< wavenumber [1/m]
  double w0 = 0.02;                              ///< waist [m]
  double big_l = 0.0;                            ///< path length [m]
  double zeta0 = 1.0;                            ///< coherent amplitude, zeta0^2 photons
  Vec2 x0{0.0, 0.0};                             ///< detector position [m]

  /// Normalized distance 2L/(w0^2 k).
  double beta() const noexcept { return 2.0 * big_l / (w0 * w0 * k); }
  /// Normalized detector offset |x0|/w0.
  double u0() const noexcept { return std::sqrt(norm2(x0)) / w0; }
  double rayleigh_range() const noexcept { return 0.5 * w0 * w0 * k; }

  void validate() const {
    if (!(k > 0.0)) throw DomainError("BeamGeometry: k must be > 0");
    if (!(w0 > 0.0)) throw DomainError("BeamGeometry: w0 must be > 0");
    if (!(big_l >= 0.0)) throw DomainError("BeamGeometry: L must be >= 0");
    if (!(zeta0 >= 0.0)) throw DomainError("BeamGeometry: zeta0 must be >= 0");
  }

  /// Same beam with the path length set from a normalized distance.
  BeamGeometry with_beta(double beta) const {
    BeamGeometry g = *this;
    g.big_l = 0.5 * beta * w0 * w0 * k;
    return g;
  }
  /// Same beam with the detector at radial offset u0 w0 along x.
  BeamGeometry with_u0(double u0) const {
    BeamGeometry g = *this;
    g.x0 = {u0 * w0, 0.0};
    return g;
  }
};

namespace turb {

/// Von Karman spectrum as a function of q0 = |k|^2.
inline double psd_q(double q0, const TurbulenceParams& p) {
  if (q0 < 0.0) throw DomainError("psd_q: q0 must be >= 0");
  return p.n_vk * p.cn2 * std::pow(q0 + p.kappa0 * p.kappa0, -11.0 / 6.0);
}

/// int Phi d^2k/(2pi)^2 = (3/(10 pi)) N_vK Cn2 kappa0^{-5/3}.
inline double lambda_const(const TurbulenceParams& p) {
  if (!(p.kappa0 > 0.0)) throw DomainError("lambda_const: kappa0 must be > 0");
  return 3.0 / (10.0 * std::numbers::pi) * p.n_vk * p.cn2 * std::pow(p.kappa0, -5.0 / 3.0);
}

/// Dimensionless strength w0^{11/3} k^3 Cn2 / 8.
inline double strength_k(const BeamGeometry& g, const TurbulenceParams& p) {
  return 0.125 * std::pow(g.w0, 11.0 / 3.0) * g.k * g.k * g.k * p.cn2;
}

/// Cn2 that yields a given strength for the beam.
inline double cn2_from_strength(double k_strength, const BeamGeometry& g) {
  return 8.0 * k_strength / (std::pow(g.w0, 11.0 / 3.0) * g.k * g.k * g.k);
}

/// 2 pi^2 sqrt(6) / (5 Gamma(2/3)^3).
inline double kappa_constant() {
  const double g = specfun::gamma(2.0 / 3.0);
  return 2.0 * std::numbers::pi * std::numbers::pi * std::sqrt(6.0) / (5.0 * g * g * g);
}

inline double kappa_from_k(double k_strength) {
  if (k_strength < 0.0) throw DomainError("kappa_from_k: strength must be >= 0");
  return kappa_constant() * k_strength;
}

inline constexpr double rytov_cn2_coefficient = 1.23;
inline constexpr double rytov_strength_coefficient = 2.76;

/// 1.23 Cn2 k^{7/6} L^{11/6}.
inline double rytov_variance(const BeamGeometry& g, const TurbulenceParams& p) {
  return rytov_cn2_coefficient * p.cn2 * std::pow(g.k, 7.0 / 6.0) * std::pow(g.big_l, 11.0 / 6.0);
}

/// 2.76 K beta^{11/6}.
inline double rytov_variance_from_strength(double k_strength, double beta) {
  return rytov_strength_coefficient * k_strength * std::pow(beta, 11.0 / 6.0);
}

/// beta at which 2.76 K beta^{11/6} = 1; infinite for K = 0.
inline double rytov_onset_beta(double k_strength) {
  if (k_strength < 0.0) throw DomainError("rytov_onset_beta: strength must be >= 0");
  if (k_strength == 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(1.0 / (rytov_strength_coefficient * k_strength), 6.0 / 11.0);
}

}  // namespace turb
}  // namespace scintilla
