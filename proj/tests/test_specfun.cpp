#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "scintilla/specfun.hpp"

using namespace scintilla;
using specfun::kummer_m;
using specfun::laguerre;
using specfun::laguerre_scaled;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Gamma, SmallIntegers) {
  EXPECT_EQ(specfun::gamma(1.0), 1.0);
  EXPECT_EQ(specfun::gamma(2.0), 1.0);
  EXPECT_EQ(specfun::gamma(6.0), 120.0);
}

// Reference digits from a 50-digit evaluation.
TEST(Gamma, FractionalArguments) {
  EXPECT_LT(rel(specfun::gamma(2.0 / 3.0), 1.354117939426400417), 1e-14);
  EXPECT_LT(rel(specfun::gamma(11.0 / 6.0), 0.9406558582567716), 1e-14);
  EXPECT_LT(rel(specfun::gamma(0.5), std::sqrt(std::numbers::pi)), 1e-14);
  EXPECT_LT(rel(specfun::gamma(-0.5), -2.0 * std::sqrt(std::numbers::pi)), 1e-14);
  EXPECT_LT(rel(specfun::gamma(-1.0 / 6.0), std::tgamma(-1.0 / 6.0)), 1e-13);
}

TEST(Gamma, AgreesWithLibmOverRange) {
  for (double x = -5.75; x < 170.0; x += 0.37) EXPECT_LT(rel(specfun::gamma(x), std::tgamma(x)), 5e-13) << x;
}

TEST(Gamma, PolesAndOverflow) {
  EXPECT_THROW(specfun::gamma(0.0), DomainError);
  EXPECT_THROW(specfun::gamma(-3.0), DomainError);
  EXPECT_THROW(specfun::gamma(172.0), OverflowError);
  EXPECT_NO_THROW(specfun::gamma(171.0));
}

TEST(Kummer, TruncatingCases) {
  EXPECT_EQ(kummer_m(0.0, 1.0, 7.3), 1.0);
  EXPECT_DOUBLE_EQ(kummer_m(-1.0, 1.0, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(kummer_m(-2.0, 1.0, 2.0), 1.0 - 4.0 + 2.0);
}

TEST(Kummer, FractionalParameter) {
  EXPECT_LT(rel(kummer_m(-5.0 / 6.0, 1.0, 1.0), 0.12674671865673131), 1e-13);
  EXPECT_DOUBLE_EQ(kummer_m(-5.0 / 6.0, 1.0, 0.0), 1.0);
}

TEST(Kummer, ExponentialSpecialCase) {
  for (double x : {-20.0, -1.5, 0.0, 3.0, 25.0}) EXPECT_LT(rel(kummer_m(1.0, 1.0, x), std::exp(x)), 1e-13) << x;
}

TEST(Kummer, DomainErrors) {
  EXPECT_THROW(kummer_m(0.5, 0.0, 1.0), DomainError);
  EXPECT_THROW(kummer_m(0.5, -2.0, 1.0), DomainError);
  EXPECT_THROW(kummer_m(0.5, 1.0, 31.0), DomainError);
}

TEST(Laguerre, IntegerOrders) {
  EXPECT_DOUBLE_EQ(laguerre({1.0}, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(laguerre({2.0}, 1.0), 0.5 * (1.0 - 4.0 + 2.0));
  EXPECT_EQ(laguerre({5.0 / 6.0}, 0.0), 1.0);
  EXPECT_THROW(laguerre({0.5}, -1.0), DomainError);
  EXPECT_THROW(laguerre({0.5}, 30.5), DomainError);
}

TEST(Laguerre, ScaledReferenceValues) {
  const LaguerreOrder nu{5.0 / 6.0};
  EXPECT_LT(rel(laguerre_scaled(nu, 0.5), 0.34817861861752635), 1e-13);
  EXPECT_LT(rel(laguerre_scaled(nu, 5.0), -0.037018563282899241), 1e-12);
  EXPECT_LT(rel(laguerre_scaled(nu, 40.0), -0.00018924710405046407), 1e-10);
  EXPECT_LT(rel(laguerre_scaled(nu, 200.0), -9.206222804904229e-6), 1e-9);
  EXPECT_THROW(laguerre_scaled(nu, 5001.0), DomainError);
}

TEST(Laguerre, ScaledContinuousAcrossSeriesBoundary) {
  for (double nu : {5.0 / 6.0, 5.0 / 3.0, 2.5}) {
    const double below = laguerre_scaled({nu}, std::nextafter(30.0, 0.0));
    const double above = laguerre_scaled({nu}, std::nextafter(30.0, 31.0));
    EXPECT_LT(std::abs(below - above), 1e-12 * std::abs(below)) << nu;
  }
}

TEST(Laguerre, ScaledIntegratesToZero) {
  // int_0^inf e^{-t} L_nu(t) dt = 0 for nu > 0; trapezoid on [0, 60] plus
  // the frozen tail beyond 60.
  const LaguerreOrder nu{5.0 / 6.0};
  const int n = 240000;
  const double h = 60.0 / n;
  CompensatedSum s;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    s.add(w * laguerre_scaled(nu, i * h));
  }
  const double total = s.value() * h + (-0.0060821412240526116);
  EXPECT_LT(std::abs(total), 1e-7);
}

TEST(CompensatedSum, RecoversCancelledDigits) {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  EXPECT_NEAR(s.value(), 1e-13, 1e-25);
}
