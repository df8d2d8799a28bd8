#pragma once

// Evolution of the first and second moments through the turbulent path.
//
// The second moments obey linear equations dM/dz = G(z) M. Back-substitution
// gives M(L) = sum_j T_j with
//   T_j = int_{0<z_j<...<z_1<L} G(z_1) ... G(z_j) M(0),
// which expands into the 2^j V0 contractions with binomial Lambda
// counterterms. Each nested integral is evaluated by collocation on
// Gauss-Legendre nodes: T_j at the nodes is the spectral integral of
// G T_{j-1}, so order j costs j * z_quad_points generator applications.

#include <cmath>
#include <vector>

#include "scintilla/error.hpp"
#include "scintilla/kernelgrid.hpp"
#include "scintilla/quadrature.hpp"
#include "scintilla/turbmodel.hpp"

namespace scintilla::moments {

struct MomentSeriesConfig {
  int max_order = 1;
  int z_quad_points = 16;
  double tolerance = 1e-6;

  static constexpr int max_supported_order = 4;

  void validate() const {
    if (max_order < 0) throw DomainError("MomentSeriesConfig: max_order must be >= 0");
    if (max_order > max_supported_order)
      throw CostGuardError("MomentSeriesConfig: max_order above " + std::to_string(max_supported_order));
    if (z_quad_points < 8) throw DomainError("MomentSeriesConfig: z_quad_points must be >= 8");
  }
};

/// First moment after distance L: M1(0) exp(-Lambda k^2 L / 2).
inline TransverseField m1_evolve(const TransverseField& m1_initial, double big_l, const BeamGeometry& geom,
                                 const TurbulenceParams& params) {
  if (big_l < 0.0) throw DomainError("m1_evolve: L must be >= 0");
  if (params.cn2 == 0.0 || big_l == 0.0) return m1_initial;
  TransverseField out = m1_initial;
  out *= std::exp(-0.5 * turb::lambda_const(params) * geom.k * geom.k * big_l);
  return out;
}

/// Series terms T_0 .. T_max_order, kept separate.
struct MomentSeries {
  std::vector<TwoPointKernel> terms;
  TwoPointKernel initial;

  int order() const noexcept { return static_cast<int>(terms.size()) - 1; }
  TwoPointKernel total() const {
    TwoPointKernel s = terms.front();
    for (std::size_t j = 1; j < terms.size(); ++j) s += terms[j];
    return s;
  }
};

namespace detail {

template <class Generator>
MomentSeries back_substitute(const TwoPointKernel& m0, double big_l, const MomentSeriesConfig& cfg,
                             Generator&& gen) {
  cfg.validate();
  MomentSeries out{{m0}, m0};
  if (cfg.max_order == 0) return out;
  const auto rule = quad::gauss_legendre(cfg.z_quad_points, 0.0, big_l);
  const auto s = quad::spectral_integration_matrix(rule, 0.0);
  const std::size_t q = rule.nodes.size();
  std::vector<TwoPointKernel> previous(q, m0);
  for (int j = 1; j <= cfg.max_order; ++j) {
    std::vector<TwoPointKernel> applied;
    applied.reserve(q);
    for (std::size_t l = 0; l < q; ++l) applied.push_back(gen(previous[l], rule.nodes[l]));
    TwoPointKernel term = TwoPointKernel::zero(m0.grid());
    for (std::size_t l = 0; l < q; ++l) term.add_scaled(applied[l], rule.weights[l]);
    out.terms.push_back(term);
    if (j == cfg.max_order) break;
    for (std::size_t i = 0; i < q; ++i) {
      TwoPointKernel acc = TwoPointKernel::zero(m0.grid());
      for (std::size_t l = 0; l < q; ++l) acc.add_scaled(applied[l], s[i * q + l]);
      previous[i] = std::move(acc);
    }
  }
  return out;
}

}  // namespace detail

/// Terms of the Hermitian moment series on the weights' lattice.
inline MomentSeries ma_series_terms(const TwoPointKernel& ma0, double big_l, const MomentSeriesConfig& cfg,
                                    const SpectralWeights& weights, double k) {
  require_same_grid(ma0.grid(), weights.grid());
  if (big_l < 0.0) throw DomainError("ma_series: L must be >= 0");
  return detail::back_substitute(ma0, big_l, cfg, [&](const TwoPointKernel& m, double z) {
    return hermitian_generator(weights, m, z, k);
  });
}

/// Terms of the symmetric moment series.
inline MomentSeries mb_series_terms(const TwoPointKernel& mb0, double big_l, const MomentSeriesConfig& cfg,
                                    const SpectralWeights& weights, double k) {
  require_same_grid(mb0.grid(), weights.grid());
  if (big_l < 0.0) throw DomainError("mb_series: L must be >= 0");
  return detail::back_substitute(mb0, big_l, cfg, [&](const TwoPointKernel& m, double z) {
    return symmetric_generator(weights, m, z, k);
  });
}

/// Hermitian moment at L truncated at cfg.max_order.
inline TwoPointKernel ma_series(const TwoPointKernel& ma0, double big_l, const MomentSeriesConfig& cfg,
                                const BeamGeometry& geom, const TurbulenceParams& params) {
  cfg.validate();
  if (params.cn2 == 0.0) return ma0;
  const SpectralWeights w(ma0.grid(), params);
  return ma_series_terms(ma0, big_l, cfg, w, geom.k).total();
}

/// Symmetric moment at L truncated at cfg.max_order.
inline TwoPointKernel mb_series(const TwoPointKernel& mb0, double big_l, const MomentSeriesConfig& cfg,
                                const BeamGeometry& geom, const TurbulenceParams& params) {
  cfg.validate();
  if (params.cn2 == 0.0) return mb0;
  const SpectralWeights w(mb0.grid(), params);
  return mb_series_terms(mb0, big_l, cfg, w, geom.k).total();
}

struct PhotonCount {
  double value = 0.0;
  double detector_trace = 0.0;
  bool detector_normalized = false;
};

/// <n> = tr{Ma ⋄ D} - tr{D} / 2. The detector is flagged when its trace
/// differs from 1 by more than 1e-3.
inline PhotonCount average_n(const TwoPointKernel& ma, const TwoPointKernel& detector) {
  require_same_grid(ma.grid(), detector.grid());
  PhotonCount r;
  r.detector_trace = detector.trace().real();
  r.detector_normalized = std::abs(r.detector_trace - 1.0) <= 1e-3;
  r.value = trace_product(ma, detector).real() - 0.5 * r.detector_trace;
  return r;
}

/// Relative change of the moment trace between input and truncated output.
inline double trace_preservation_check(const MomentSeries& series) {
  cplx change{};
  for (std::size_t j = 1; j < series.terms.size(); ++j) change += series.terms[j].trace();
  const double scale = std::abs(series.initial.trace());
  if (change == cplx{}) return 0.0;
  return std::abs(change) / (scale > 0.0 ? scale : 1.0);
}

/// First-order term of tr{Ma(L) ⋄ D} for Ma(0) = zeta zeta* and D = M M*:
/// int_0^L k^2 sum_q W(q) (|S_q(z)|^2 - |S_0|^2) dz with
/// S_q(z) = sum_k w M*(k) zeta(k - q) e^{i(z/k) q.k}.
/// Cost is O(n^2 * taps) per z node.
inline double order1_detector_trace(const SpectralWeights& weights, const TransverseField& zeta,
                                    const TransverseField& mode, double big_l, double k, int z_points = 16) {
  require_same_grid(weights.grid(), zeta.grid);
  require_same_grid(weights.grid(), mode.grid);
  const auto& g = zeta.grid;
  const std::size_t n = g.size();
  const double w = g.weight();
  const auto& taps = weights.taps();
  std::vector<cplx> mz(n);
  cplx s0{};
  for (std::size_t i = 0; i < n; ++i) {
    mz[i] = std::conj(mode.values[i]) * w;
    s0 += mz[i] * zeta.values[i];
  }
  const double s0sq = std::norm(s0);
  std::vector<std::vector<std::uint32_t>> shifts;
  shifts.reserve(taps.size());
  for (const auto& tap : taps) shifts.push_back(scintilla::detail::shift_table(g, tap.di, tap.dj));

  const auto rule = quad::gauss_legendre(z_points, 0.0, big_l);
  std::vector<double> per_node(rule.nodes.size());
  const int side = g.n_side();
  for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
    const double s = rule.nodes[l] / k;
    std::vector<double> contrib(taps.size());
    parallel_for(0, taps.size(), [&](std::size_t t) {
      const auto& tap = taps[t];
      std::vector<cplx> px(side), py(side);
      for (int i = 0; i < side; ++i) {
        px[i] = std::polar(1.0, s * tap.qx * g.coord(i));
        py[i] = std::polar(1.0, s * tap.qy * g.coord(i));
      }
      cplx acc{};
      const auto& sh = shifts[t];
      for (int i = 0; i < side; ++i) {
        cplx row{};
        for (int j = 0; j < side; ++j) {
          const std::size_t idx = g.index(i, j);
          row += mz[idx] * zeta.values[sh[idx]] * py[j];
        }
        acc += row * px[i];
      }
      contrib[t] = tap.weight * (std::norm(acc) - s0sq);
    });
    CompensatedSum sum;
    for (double c : contrib) sum.add(c);
    per_node[l] = k * k * sum.value();
  }
  CompensatedSum total;
  for (std::size_t l = 0; l < rule.nodes.size(); ++l) total.add(rule.weights[l] * per_node[l]);
  return total.value();
}

}  // namespace scintilla::moments
