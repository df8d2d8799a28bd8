#pragma once

// Real-argument special functions: Gamma, Kummer M and fractional Laguerre.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "scintilla/error.hpp"

namespace scintilla {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) noexcept {
    add(v);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Real order of a Laguerre function. Orders produced by the photon-number
/// series are nu = 5n/6 for n >= 0.
struct LaguerreOrder {
  double nu = 0.0;

  static LaguerreOrder series_order(int n) { return {5.0 * n / 6.0}; }
};

namespace specfun {

/// Largest argument for which gamma() is finite in double precision.
inline constexpr double gamma_overflow_threshold = 171.6243769563027;

/// Upper limit of the series domain of kummer_m() and laguerre().
inline constexpr double series_x_max = 30.0;

/// Upper limit of laguerre_scaled().
inline constexpr double scaled_x_max = 5000.0;

namespace detail {

// Lanczos approximation, g = 7, n = 9.
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coef{
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_gamma(double x) {
  // Valid for x >= 0.5.
  const double xm = x - 1.0;
  double a = lanczos_coef[0];
  const double t = xm + lanczos_g + 0.5;
  for (std::size_t i = 1; i < lanczos_coef.size(); ++i)
    a += lanczos_coef[i] / (xm + static_cast<double>(i));
  // Split the power to stay finite up to the overflow threshold.
  const double p = std::pow(t, 0.5 * (xm + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * p * (p * std::exp(-t)) * a;
}

inline bool is_nonpositive_integer(double x) {
  return x <= 0.0 && x == std::floor(x);
}

}  // namespace detail

/// Gamma function. Throws DomainError at poles and OverflowError above
/// gamma_overflow_threshold.
inline double gamma(double x) {
  if (!std::isfinite(x))
    throw DomainError("gamma: non-finite argument");
  if (detail::is_nonpositive_integer(x))
    throw DomainError("gamma: pole at non-positive integer " + std::to_string(x));
  if (x > gamma_overflow_threshold)
    throw OverflowError("gamma: argument above overflow threshold");
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    const double s = std::sin(std::numbers::pi * x);
    return std::numbers::pi / (s * detail::lanczos_gamma(1.0 - x));
  }
  if (x == std::floor(x) && x <= 23.0) {
    double f = 1.0;
    for (int i = 2; i < static_cast<int>(x); ++i) f *= i;
    return f;
  }
  return detail::lanczos_gamma(x);
}

/// Confluent hypergeometric function M(a, b, x) = sum_m (a)_m x^m / ((b)_m m!).
/// Direct compensated series for 0 <= x <= 30; Kummer's transformation
/// M(a,b,x) = e^x M(b-a,b,-x) for -30 <= x < 0.
inline double kummer_m(double a, double b, double x) {
  if (detail::is_nonpositive_integer(b))
    throw DomainError("kummer_m: b is a non-positive integer");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(x))
    throw DomainError("kummer_m: non-finite argument");
  if (std::abs(x) > series_x_max)
    throw DomainError("kummer_m: |x| beyond series domain " + std::to_string(series_x_max));
  if (x < 0.0) return std::exp(x) * kummer_m(b - a, b, -x);

  CompensatedSum sum;
  double term = 1.0;
  double magnitude = 1.0;
  sum.add(term);
  const bool terminates = detail::is_nonpositive_integer(a);
  constexpr int max_terms = 2000;
  for (int m = 0; m < max_terms; ++m) {
    term *= (a + m) * x / ((b + m) * (m + 1.0));
    if (term == 0.0) return sum.value();
    sum.add(term);
    magnitude += std::abs(term);
    // relative to the summed magnitudes so that cancellation near a zero of
    // M does not stall the test
    const bool past_peak = (m + 1.0) > std::abs(a) && (m + 1.0) > x;
    const double eps = std::numeric_limits<double>::epsilon() * 1e-2;
    if (past_peak && std::abs(term) <= eps * std::max(std::abs(sum.value()), eps * magnitude))
      return sum.value();
  }
  if (terminates) return sum.value();
  throw DomainError("kummer_m: series did not converge");
}

/// Laguerre function L_nu(x) = M(-nu, 1, x) for 0 <= x <= 30.
inline double laguerre(LaguerreOrder order, double x) {
  if (x < 0.0) throw DomainError("laguerre: negative argument");
  if (x > series_x_max)
    throw DomainError("laguerre: argument beyond x_max " + std::to_string(series_x_max));
  return kummer_m(-order.nu, 1.0, x);
}

/// e^{-x} L_nu(x) for 0 <= x <= 5000. Beyond the series domain of laguerre()
/// the terms are summed with a running log-scale; the exponential growth of
/// L_nu for non-integer nu is absorbed by the prefactor.
inline double laguerre_scaled(LaguerreOrder order, double x) {
  if (x < 0.0) throw DomainError("laguerre_scaled: negative argument");
  if (x > scaled_x_max)
    throw DomainError("laguerre_scaled: argument beyond " + std::to_string(scaled_x_max));
  if (x <= series_x_max) return std::exp(-x) * laguerre(order, x);

  const double nu = order.nu;
  const bool polynomial = nu == std::floor(nu);
  // log|t_m| with t_0 = e^{-x}; t_{m+1}/t_m = (m - nu) x / (m+1)^2.
  double log_mag = -x;
  double sign = 1.0;
  const double log_x = std::log(x);
  CompensatedSum sum;
  sum.add(std::exp(log_mag));
  const int max_terms = static_cast<int>(x + 40.0 * std::sqrt(x) + nu + 100.0);
  for (int m = 0; m < max_terms; ++m) {
    const double f = m - nu;
    if (f == 0.0) {
      if (polynomial) return sum.value();
      break;
    }
    if (f < 0.0) sign = -sign;
    log_mag += std::log(std::abs(f)) + log_x - 2.0 * std::log(m + 1.0);
    const double term = sign * std::exp(log_mag);
    sum.add(term);
    if (m + 1.0 > x && m + 1.0 > nu &&
        std::abs(term) <= std::numeric_limits<double>::epsilon() * 1e-2 * std::abs(sum.value()))
      return sum.value();
  }
  throw DomainError("laguerre_scaled: series did not converge");
}

}  // namespace specfun
}  // namespace scintilla
