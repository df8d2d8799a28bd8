#pragma once

// Adaptive cubature on hyper-rectangles with the degree-7/5 Genz-Malik rule
// pair, and a stratified Monte Carlo estimator for the same regions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "scintilla/specfun.hpp"

namespace scintilla::cubature {

template <std::size_t D>
using Point = std::array<double, D>;

struct Result {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  bool converged = false;
};

template <std::size_t D>
struct Box {
  Point<D> center;
  Point<D> half;
  double value = 0.0;
  double error = 0.0;
  std::size_t split_axis = 0;

  bool operator<(const Box& o) const { return error < o.error; }
};

namespace detail {

template <std::size_t D, class F>
void genz_malik_rule(F& f, Box<D>& box) {
  static_assert(D >= 2, "Genz-Malik rule needs at least two dimensions");
  constexpr double dim = static_cast<double>(D);
  const double lambda2 = std::sqrt(9.0 / 70.0);
  const double lambda4 = std::sqrt(9.0 / 10.0);
  const double lambda5 = std::sqrt(9.0 / 19.0);
  const double w1 = (12824.0 - 9120.0 * dim + 400.0 * dim * dim) / 19683.0;
  const double w2 = 980.0 / 6561.0;
  const double w3 = (1820.0 - 400.0 * dim) / 19683.0;
  const double w4 = 200.0 / 19683.0;
  const double w5 = 6859.0 / 19683.0 / static_cast<double>(1u << D);
  const double e1 = (729.0 - 950.0 * dim + 50.0 * dim * dim) / 729.0;
  const double e2 = 245.0 / 486.0;
  const double e3 = (265.0 - 100.0 * dim) / 1458.0;
  const double e4 = 25.0 / 729.0;
  const double ratio = (lambda2 * lambda2) / (lambda4 * lambda4);

  double volume = 1.0;
  for (std::size_t d = 0; d < D; ++d) volume *= 2.0 * box.half[d];

  const double f0 = f(box.center);
  double sum2 = 0.0, sum3 = 0.0, sum4 = 0.0, sum5 = 0.0;
  double best_diff = -1.0;
  std::size_t best_axis = 0;
  for (std::size_t d = 0; d < D; ++d) {
    Point<D> p = box.center;
    p[d] = box.center[d] - lambda2 * box.half[d];
    const double a2 = f(p);
    p[d] = box.center[d] + lambda2 * box.half[d];
    const double b2 = f(p);
    p[d] = box.center[d] - lambda4 * box.half[d];
    const double a4 = f(p);
    p[d] = box.center[d] + lambda4 * box.half[d];
    const double b4 = f(p);
    sum2 += a2 + b2;
    sum3 += a4 + b4;
    const double diff = std::abs((a2 + b2 - 2.0 * f0) - ratio * (a4 + b4 - 2.0 * f0));
    if (diff > best_diff * (1.0 + 1e-12)) {
      best_diff = diff;
      best_axis = d;
    }
  }
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = i + 1; j < D; ++j) {
      for (int si : {-1, 1}) {
        for (int sj : {-1, 1}) {
          Point<D> p = box.center;
          p[i] += si * lambda4 * box.half[i];
          p[j] += sj * lambda4 * box.half[j];
          sum4 += f(p);
        }
      }
    }
  }
  for (unsigned mask = 0; mask < (1u << D); ++mask) {
    Point<D> p = box.center;
    for (std::size_t d = 0; d < D; ++d)
      p[d] += ((mask >> d) & 1u ? 1.0 : -1.0) * lambda5 * box.half[d];
    sum5 += f(p);
  }
  const double r7 = volume * (w1 * f0 + w2 * sum2 + w3 * sum3 + w4 * sum4 + w5 * sum5);
  const double r5 = volume * (e1 * f0 + e2 * sum2 + e3 * sum3 + e4 * sum4);
  box.value = r7;
  box.error = std::abs(r7 - r5);
  box.split_axis = best_axis;
}

template <std::size_t D>
constexpr long rule_points() {
  return 1 + 4 * static_cast<long>(D) + 2 * static_cast<long>(D) * (static_cast<long>(D) - 1) +
         (1L << D);
}

}  // namespace detail

/// Adaptive Genz-Malik cubature of f over the box [lower, upper]. Regions are
/// bisected along the axis with the largest fourth difference until the total
/// error estimate is below max(abs_tol, rel_tol*|I|) or max_evals is reached.
/// The result is deterministic.
template <std::size_t D, class F>
Result genz_malik(F&& f, const Point<D>& lower, const Point<D>& upper, double rel_tol,
                  double abs_tol = 0.0, long max_evals = 2'000'000) {
  std::vector<Box<D>> heap;
  Box<D> root;
  for (std::size_t d = 0; d < D; ++d) {
    root.center[d] = 0.5 * (lower[d] + upper[d]);
    root.half[d] = 0.5 * (upper[d] - lower[d]);
  }
  detail::genz_malik_rule(f, root);
  heap.push_back(root);
  Result res;
  res.evaluations = detail::rule_points<D>();
  double total = root.value;
  double total_err = root.error;
  auto recompute = [&] {
    CompensatedSum v, e;
    for (const auto& b : heap) {
      v.add(b.value);
      e.add(b.error);
    }
    total = v.value();
    total_err = e.value();
  };
  long since_recompute = 0;
  while (true) {
    if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) {
      res.converged = true;
      break;
    }
    if (res.evaluations + 2 * detail::rule_points<D>() > max_evals) break;
    std::pop_heap(heap.begin(), heap.end());
    Box<D> worst = heap.back();
    heap.pop_back();
    Box<D> lo = worst, hi = worst;
    const std::size_t ax = worst.split_axis;
    lo.half[ax] = hi.half[ax] = 0.5 * worst.half[ax];
    lo.center[ax] = worst.center[ax] - lo.half[ax];
    hi.center[ax] = worst.center[ax] + hi.half[ax];
    detail::genz_malik_rule(f, lo);
    detail::genz_malik_rule(f, hi);
    res.evaluations += 2 * detail::rule_points<D>();
    total += lo.value + hi.value - worst.value;
    total_err += lo.error + hi.error - worst.error;
    heap.push_back(lo);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(hi);
    std::push_heap(heap.begin(), heap.end());
    if (++since_recompute == 256) {
      recompute();
      since_recompute = 0;
    }
  }
  recompute();
  res.value = total;
  res.error = total_err;
  if (!res.converged) res.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
  return res;
}

/// Stratified Monte Carlo over [lower, upper] with `strata` cells per axis and
/// `per_cell` uniform samples in each cell. The standard error is returned as
/// the error estimate. Reproducible for a fixed seed.
template <std::size_t D, class F>
Result stratified_monte_carlo(F&& f, const Point<D>& lower, const Point<D>& upper,
                              int strata, int per_cell, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  long cells = 1;
  for (std::size_t d = 0; d < D; ++d) cells *= strata;
  double cell_volume = 1.0;
  Point<D> width;
  for (std::size_t d = 0; d < D; ++d) {
    width[d] = (upper[d] - lower[d]) / strata;
    cell_volume *= width[d];
  }
  CompensatedSum total;
  double variance = 0.0;
  Result res;
  for (long c = 0; c < cells; ++c) {
    long rem = c;
    Point<D> corner;
    for (std::size_t d = 0; d < D; ++d) {
      corner[d] = lower[d] + (rem % strata) * width[d];
      rem /= strata;
    }
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < per_cell; ++i) {
      Point<D> p;
      for (std::size_t d = 0; d < D; ++d) p[d] = corner[d] + uniform() * width[d];
      const double v = f(p);
      s += v;
      s2 += v * v;
    }
    const double mean = s / per_cell;
    const double var = per_cell > 1 ? (s2 / per_cell - mean * mean) * per_cell / (per_cell - 1.0) : 0.0;
    total.add(mean * cell_volume);
    variance += var / per_cell * cell_volume * cell_volume;
    res.evaluations += per_cell;
  }
  res.value = total.value();
  res.error = std::sqrt(std::max(variance, 0.0));
  res.converged = true;
  return res;
}

}  // namespace scintilla::cubature
