#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "scintilla/coherentdist.hpp"
#include "scintilla/oracle.hpp"

using namespace scintilla;
using namespace scintilla::coherent;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TurbulenceParams strength(double k, const BeamGeometry& g = {}) {
  TurbulenceParams p;
  p.cn2 = turb::cn2_from_strength(k, g);
  p.kappa0 = 1e-3 / g.w0;
  return p;
}

// kappa giving the requested broadening factor at beta
double kappa_for_xi(double xi_value, double beta) {
  return xi_value * std::pow(1.0 + beta * beta, 5.0 / 6.0) / std::pow(beta, 8.0 / 3.0);
}

TurbulenceParams params_for_kappa(double kappa, const BeamGeometry& g) {
  return strength(kappa / turb::kappa_constant(), g);
}

}  // namespace

TEST(Zeta, Values) {
  BeamGeometry g;
  EXPECT_DOUBLE_EQ(zeta_fn({0.0, 0.0}, g).real(), std::sqrt(2.0 * std::numbers::pi) * g.w0);
  g.zeta0 = 0.0;
  EXPECT_EQ(zeta_fn({10.0, 3.0}, g), cplx{});
}

TEST(DetectorMode, ShapeAndPhase) {
  const BeamGeometry g = BeamGeometry{}.with_beta(1.0);
  const Vec2 k{40.0, -25.0};
  const cplx a = detector_mode(k, 0.0, {0.0, 0.0}, 0.01, g);
  EXPECT_NEAR(a.imag(), 0.0, 1e-15);
  EXPECT_GT(a.real(), 0.0);
  const cplx b = detector_mode(k, 300.0, {0.004, 0.002}, 0.01, g);
  EXPECT_NEAR(std::abs(b), std::abs(a), 1e-15);
  EXPECT_THROW(detector_mode(k, 0.0, {0.0, 0.0}, -1.0, g), DomainError);
  EXPECT_THROW(detector_mode(k, 0.0, {0.0, 0.0}, 0.0, g), DomainError);
}

TEST(MuSquared, OriginAtZeroDistance) {
  BeamGeometry g;
  g.zeta0 = 3.0;
  EXPECT_LT(rel(mu_squared(g), 2.0 * 9.0 / (std::numbers::pi * g.w0 * g.w0)), 1e-14);
}

TEST(MuSquared, EqualsZerothOrderTerm) {
  for (double beta : {0.1, 1.0, 7.0})
    for (double u0 : {0.0, 0.8, 2.5}) {
      const auto g = BeamGeometry{}.with_beta(beta).with_u0(u0);
      const double q = 1.0 + beta * beta;
      const double normalized = 2.0 / (std::numbers::pi * g.w0 * g.w0 * q) * std::exp(-2.0 * u0 * u0 / q);
      EXPECT_LT(rel(mu_squared(g), normalized), 1e-12) << beta << ' ' << u0;
      EXPECT_EQ(r_n_value(0, g, 2.0, g.x0), mu_squared(g));
    }
}

TEST(MuSquared, FiniteDetectorApproachesDensity) {
  const auto g = BeamGeometry{}.with_beta(1.0).with_u0(0.5);
  const double wd = 1e-4 * g.w0;
  EXPECT_LT(rel(mu_squared_finite(g, wd) / (2.0 * std::numbers::pi * wd * wd), mu_squared(g)), 1e-6);
}

TEST(MuSquared, PlaneIntegralIsPhotonNumber) {
  BeamGeometry g = BeamGeometry{}.with_beta(2.0);
  g.zeta0 = 2.0;
  const auto d = avg_n_series(g, strength(0.0, g));
  oracle::QuadratureSpec spec;
  EXPECT_LT(rel(oracle::conservation_numeric(d, spec).value, 4.0), 1e-6);
}

TEST(Y1, ZeroTurbulence) {
  const auto g = BeamGeometry{}.with_beta(1.0);
  EXPECT_EQ(y1_closed(0.3 * g.big_l, g, strength(0.0)), 0.0);
}

TEST(Y1, EndOfPathKeepsOnlyLambdaTerm) {
  const auto g = BeamGeometry{}.with_beta(1.0).with_u0(0.7);
  const auto p = strength(1.0);
  const auto parts = y1_closed_parts(g.big_l, g, p);
  EXPECT_EQ(parts.kappa_term, 0.0);
  EXPECT_LT(rel(parts.lambda_term, 0.5 * g.k * g.k * turb::lambda_const(p) * mu_squared(g)), 1e-13);
}

TEST(Qm, ZeroTurbulence) {
  const auto g = BeamGeometry{}.with_beta(1.0);
  for (int m = 0; m < 4; ++m) EXPECT_EQ(qm_closed(m, 0.5 * g.big_l, g, strength(0.0)), 0.0);
}

TEST(OrderTerm, MatchesSeriesTerms) {
  for (double beta : {0.05, 0.4, 1.0, 3.3, 20.0})
    for (double u0 : {0.0, 0.6, 1.9, 4.0}) {
      const auto g = BeamGeometry{}.with_beta(beta).with_u0(u0);
      const auto p = strength(0.7, g);
      for (int n = 1; n <= 3; ++n)
        EXPECT_LT(rel(order_term(n, g, p).value, r_n(n, g, p).value), 1e-10) << beta << ' ' << u0 << ' ' << n;
    }
}

TEST(OrderTerm, ZeroTurbulenceAndSign) {
  const auto g = BeamGeometry{}.with_beta(1.0);
  for (int n = 1; n <= 3; ++n) {
    EXPECT_EQ(order_term(n, g, strength(0.0)).value, 0.0);
    const double v = order_term(n, g, strength(1.0)).value;
    EXPECT_EQ(std::signbit(v), n % 2 == 1) << n;
  }
  EXPECT_THROW(order_term(4, g, strength(1.0)), DomainError);
}

TEST(OrderTerm, PositionDependence) {
  const auto g = BeamGeometry{}.with_beta(0.8);
  const auto p = strength(1.0, g);
  const auto t = order_term(2, g, p);
  const Vec2 x{0.7 * g.w0, -0.4 * g.w0};
  EXPECT_LT(rel(t.value_at(x), r_n_value(2, g, turb::kappa_from_k(turb::strength_k(g, p)), x)), 1e-10);
}

TEST(SeriesTerm, KappaDoublingScalesByPowerOfTwo) {
  const auto g = BeamGeometry{}.with_beta(0.9).with_u0(0.3);
  for (int n = 0; n <= 5; ++n)
    EXPECT_LT(rel(r_n_value(n, g, 2.4, g.x0), std::pow(2.0, n) * r_n_value(n, g, 1.2, g.x0)), 1e-13) << n;
  EXPECT_THROW(r_n_value(-1, g, 1.0, g.x0), DomainError);
}

TEST(SeriesTerm, PlaneIntegralVanishes) {
  const auto g = BeamGeometry{}.with_beta(1.0);
  oracle::QuadratureSpec spec;
  for (int n = 1; n <= 4; ++n)
    EXPECT_LE(std::abs(oracle::order_plane_integral(n, g, 0.8, spec).value), 1e-6 * g.zeta0 * g.zeta0) << n;
}

TEST(Distribution, FreeSpaceIsExact) {
  const auto g = BeamGeometry{}.with_beta(1.0).with_u0(0.5);
  const auto r = avg_n_series(g, strength(0.0, g));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.truncation_order, 0);
  EXPECT_EQ(r.density, mu_squared(g));
  EXPECT_EQ(avg_n_approx(g, strength(0.0, g)).density, mu_squared(g));
}

TEST(Distribution, SmallBroadeningSeriesMatchesApproximation) {
  const double beta = 1.0;
  const auto g = BeamGeometry{}.with_beta(beta);
  const auto p = params_for_kappa(kappa_for_xi(0.05, beta), g);
  const auto s = avg_n_series(g, p);
  const auto a = avg_n_approx(g, p);
  EXPECT_TRUE(s.converged);
  EXPECT_NEAR(xi(beta, s.kappa), 0.05, 1e-12);
  EXPECT_LT(rel(s.density, a.density), 1e-2);
}

TEST(Distribution, DivergentSeriesIsFlagged) {
  const auto g = BeamGeometry{}.with_beta(3.0);
  const auto r = avg_n_series(g, strength(10.0, g), 12);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.truncation_order, 12);
  EXPECT_THROW(avg_n_series(g, strength(1.0, g), 26), DomainError);
}

TEST(Distribution, ConvergedDensityIsNonNegative) {
  for (double beta : {0.2, 0.7, 1.5})
    for (double u0 : {0.0, 1.0, 2.0, 3.0}) {
      const auto g = BeamGeometry{}.with_beta(beta).with_u0(u0);
      const auto r = avg_n_series(g, strength(0.3, g), 25);
      if (r.converged) {
        EXPECT_GE(r.density, 0.0) << beta << ' ' << u0;
      }
    }
}

TEST(Distribution, ApproximationPeakAndBroadening) {
  const auto g = BeamGeometry{}.with_beta(1.0);
  const auto p = strength(1.0, g);
  const auto a = avg_n_approx(g, p);
  EXPECT_NEAR(xi(1.0, a.kappa), 2.186, 1e-3);
  EXPECT_LT(rel(a.density, mu_squared(g) / (1.0 + xi(1.0, a.kappa))), 1e-13);
  EXPECT_GT(avg_n_approx(g.with_u0(3.0), p).density, 0.0);
}

TEST(Distribution, ConservationAtModerateBroadening) {
  oracle::QuadratureSpec spec;
  for (double target : {0.1, 0.5}) {
    const auto g = BeamGeometry{}.with_beta(1.0);
    const auto p = params_for_kappa(kappa_for_xi(target, 1.0), g);
    EXPECT_LT(rel(oracle::conservation_numeric(avg_n_truncated(g, p, 3), spec).value, 1.0), 1e-3);
    EXPECT_LT(rel(oracle::conservation_numeric(avg_n_approx(g, p), spec).value, 1.0), 1e-9);
  }
}

TEST(Width, Law) {
  EXPECT_NEAR(width_ratio(1.0, 0.0), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(width_ratio(0.0, 5.0), 1.0);
  EXPECT_NEAR(width_ratio(1.0, turb::kappa_from_k(1.0)), 2.524197, 1e-6);
  EXPECT_NEAR(width(1.0, 0.0, 0.02), 0.02 * std::sqrt(2.0), 1e-15);
  EXPECT_THROW(width_ratio(-1.0, 0.0), DomainError);
}
