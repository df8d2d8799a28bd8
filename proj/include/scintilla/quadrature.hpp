#pragma once

// One-dimensional quadrature helpers: Gauss-Legendre rules, the spectral
// integration matrix on Gauss-Legendre collocation nodes, and globally
// adaptive Gauss-Kronrod integration.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "scintilla/error.hpp"
#include "scintilla/specfun.hpp"

namespace scintilla::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b], nodes ascending.
inline Rule gauss_legendre(int n, double a = -1.0, double b = 1.0) {
  if (n < 1) throw DomainError("gauss_legendre: n must be positive");
  Rule r;
  r.nodes.reserve(n);
  r.weights.reserve(n);
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x;
  for (double z : zeros) {
    x.push_back(z);
    if (z != 0.0) x.push_back(-z);
  }
  std::sort(x.begin(), x.end());
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (double t : x) {
    const double dp = boost::math::legendre_p_prime(n, t);
    r.nodes.push_back(mid + half * t);
    r.weights.push_back(half * 2.0 / ((1.0 - t * t) * dp * dp));
  }
  return r;
}

/// Lagrange basis polynomial l_j of the given nodes evaluated at t.
inline double lagrange_basis(const std::vector<double>& nodes, std::size_t j, double t) {
  double v = 1.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (i != j) v *= (t - nodes[i]) / (nodes[j] - nodes[i]);
  return v;
}

/// Row-major matrix S with S[i*n + j] = integral of l_j from a to nodes[i].
/// Applying S to samples of f at the nodes integrates the interpolant of f
/// from a up to each node.
inline std::vector<double> spectral_integration_matrix(const Rule& rule, double a) {
  const std::size_t n = rule.nodes.size();
  std::vector<double> s(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Rule sub = gauss_legendre(static_cast<int>(n), a, rule.nodes[i]);
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p)
        acc += sub.weights[p] * lagrange_basis(rule.nodes, j, sub.nodes[p]);
      s[i * n + j] = acc;
    }
  }
  return s;
}

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

template <class F>
Interval gk15(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double k = wk[0] * fc;
  double g = wg[0] * fc;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double s = f(mid - half * x[i]) + f(mid + half * x[i]);
    k += wk[i] * s;
    if (i % 2 == 0) g += wg[i / 2] * s;
  }
  return {a, b, k * half, std::abs((k - g) * half)};
}

}  // namespace detail

/// Globally adaptive 15-point Gauss-Kronrod quadrature on a finite interval.
/// Stops when the summed error estimate is below max(abs_tol, rel_tol*|I|).
template <class F>
Estimate integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                            double abs_tol = 0.0, int max_intervals = 2000) {
  std::vector<detail::Interval> heap;
  heap.push_back(detail::gk15(f, a, b));
  Estimate e;
  e.evaluations = 15;
  auto totals = [&] {
    CompensatedSum v, er;
    for (const auto& iv : heap) {
      v.add(iv.value);
      er.add(iv.error);
    }
    e.value = v.value();
    e.error = er.value();
  };
  totals();
  while (e.error > std::max(abs_tol, rel_tol * std::abs(e.value)) &&
         static_cast<int>(heap.size()) < max_intervals) {
    std::pop_heap(heap.begin(), heap.end());
    const auto worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    heap.push_back(detail::gk15(f, worst.a, mid));
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(detail::gk15(f, mid, worst.b));
    std::push_heap(heap.begin(), heap.end());
    e.evaluations += 30;
    totals();
  }
  return e;
}

/// Integral over [a, inf) through x = a + t/(1-t).
template <class F>
Estimate integrate_to_infinity(F&& f, double a, double rel_tol = 1e-10,
                               double abs_tol = 0.0, int max_intervals = 2000) {
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double u = 1.0 - t;
    return f(a + t / u) / (u * u);
  };
  return integrate_adaptive(g, 0.0, 1.0, rel_tol, abs_tol, max_intervals);
}

}  // namespace scintilla::quad
