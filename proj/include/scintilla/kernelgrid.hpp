#pragma once

// Discretized transverse-wavevector space.
//
// Fields and two-point kernels are sampled on an n x n periodic lattice of
// wavevectors k = (i - n/2, j - n/2) * dk. The measure d^2k/(2pi)^2 becomes
// the fixed weight (dk/2pi)^2 per sample. Kernels hold an optional diagonal
// part in operator-coefficient form (the identity has coefficient 1) and an
// optional dense part holding sampled kernel values.
//
// The four-point turbulence kernel is never stored. Its delta-resolved
// action on a two-point kernel is a sum over lattice transfer vectors q with
// weights W(q) that integrate the spectrum over each lattice cell, corrected
// by the cell's first and second moments and completed by the analytic mass
// outside the lattice window.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "scintilla/error.hpp"
#include "scintilla/parallel.hpp"
#include "scintilla/quadrature.hpp"
#include "scintilla/turbmodel.hpp"

namespace scintilla {

using cplx = std::complex<double>;

class WavevectorGrid {
public:
  WavevectorGrid(int n_side, double k_max) : n_(n_side), k_max_(k_max) {
    if (n_side < 16 || n_side % 2 != 0)
      throw DomainError("WavevectorGrid: n_side must be even and >= 16");
    if (!(k_max > 0.0)) throw DomainError("WavevectorGrid: k_max must be > 0");
  }

  /// Default lattice for a beam of waist w0: k_max = extent / w0.
  static WavevectorGrid for_waist(double w0, int n_side = 64, double extent = 8.0) {
    return WavevectorGrid(n_side, extent / w0);
  }

  int n_side() const noexcept { return n_; }
  double k_max() const noexcept { return k_max_; }
  double spacing() const noexcept { return 2.0 * k_max_ / n_; }
  /// (dk / 2pi)^2
  double weight() const noexcept {
    const double s = spacing() / (2.0 * std::numbers::pi);
    return s * s;
  }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }

  double coord(int i) const noexcept { return (i - n_ / 2) * spacing(); }
  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(ix) * n_ + static_cast<std::size_t>(iy);
  }
  int wrap(int i) const noexcept {
    const int r = i % n_;
    return r < 0 ? r + n_ : r;
  }
  Vec2 point(std::size_t idx) const noexcept {
    return {coord(static_cast<int>(idx / n_)), coord(static_cast<int>(idx % n_))};
  }

  bool operator==(const WavevectorGrid& o) const noexcept {
    return n_ == o.n_ && k_max_ == o.k_max_;
  }

private:
  int n_;
  double k_max_;
};

inline void require_same_grid(const WavevectorGrid& a, const WavevectorGrid& b) {
  if (!(a == b)) throw GridMismatchError("operands are defined on different wavevector grids");
}

/// Complex function sampled on the lattice.
struct TransverseField {
  WavevectorGrid grid;
  std::vector<cplx> values;

  explicit TransverseField(WavevectorGrid g) : grid(g), values(g.size(), cplx{}) {}

  template <class F>
  static TransverseField sample(const WavevectorGrid& g, F&& f) {
    TransverseField out(g);
    for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = f(g.point(i));
    return out;
  }

  TransverseField conj() const {
    TransverseField out = *this;
    for (auto& v : out.values) v = std::conj(v);
    return out;
  }
  /// int |f|^2 d^2k/(2pi)^2
  double norm_squared() const {
    CompensatedSum s;
    for (const auto& v : values) s.add(std::norm(v));
    return s.value() * grid.weight();
  }
  TransverseField& operator*=(cplx c) {
    for (auto& v : values) v *= c;
    return *this;
  }
};

class TwoPointKernel {
public:
  explicit TwoPointKernel(WavevectorGrid g) : grid_(g) {}

  static TwoPointKernel zero(const WavevectorGrid& g) { return TwoPointKernel(g); }

  /// c * 1, with 1(k1,k2) = (2pi)^2 delta(k1 - k2).
  static TwoPointKernel identity(const WavevectorGrid& g, cplx c = 1.0) {
    TwoPointKernel k(g);
    k.diag_.assign(g.size(), c);
    return k;
  }
  static TwoPointKernel diagonal(const WavevectorGrid& g, std::vector<cplx> coeffs) {
    if (coeffs.size() != g.size()) throw GridMismatchError("diagonal: coefficient count");
    TwoPointKernel k(g);
    k.diag_ = std::move(coeffs);
    return k;
  }
  /// a(k1) conj(b(k2)), a Hermitian moment when a == b.
  static TwoPointKernel outer(const TransverseField& a, const TransverseField& b) {
    require_same_grid(a.grid, b.grid);
    TwoPointKernel k(a.grid);
    const std::size_t n = a.grid.size();
    k.dense_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) k.dense_[i * n + j] = a.values[i] * std::conj(b.values[j]);
    return k;
  }
  /// a(k1) b(k2), a symmetric moment when a == b.
  static TwoPointKernel outer_symmetric(const TransverseField& a, const TransverseField& b) {
    require_same_grid(a.grid, b.grid);
    TwoPointKernel k(a.grid);
    const std::size_t n = a.grid.size();
    k.dense_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) k.dense_[i * n + j] = a.values[i] * b.values[j];
    return k;
  }
  static TwoPointKernel from_dense(const WavevectorGrid& g, std::vector<cplx> values) {
    if (values.size() != g.size() * g.size()) throw GridMismatchError("from_dense: value count");
    TwoPointKernel k(g);
    k.dense_ = std::move(values);
    return k;
  }

  const WavevectorGrid& grid() const noexcept { return grid_; }
  bool has_diagonal() const noexcept { return !diag_.empty(); }
  bool has_dense() const noexcept { return !dense_.empty(); }
  const std::vector<cplx>& diagonal_coefficients() const noexcept { return diag_; }
  const std::vector<cplx>& dense_values() const noexcept { return dense_; }
  std::vector<cplx>& dense_values() noexcept { return dense_; }

  /// Sampled kernel value; diagonal coefficients contribute c / weight.
  cplx value(std::size_t i, std::size_t j) const {
    cplx v = has_dense() ? dense_[i * grid_.size() + j] : cplx{};
    if (has_diagonal() && i == j) v += diag_[i] / grid_.weight();
    return v;
  }

  /// Copy with the diagonal part folded into the dense part.
  TwoPointKernel densified() const {
    TwoPointKernel k(grid_);
    const std::size_t n = grid_.size();
    k.dense_ = has_dense() ? dense_ : std::vector<cplx>(n * n);
    if (has_diagonal())
      for (std::size_t i = 0; i < n; ++i) k.dense_[i * n + i] += diag_[i] / grid_.weight();
    return k;
  }

  TwoPointKernel& operator+=(const TwoPointKernel& o) {
    require_same_grid(grid_, o.grid_);
    if (o.has_diagonal()) {
      if (!has_diagonal()) diag_.assign(grid_.size(), cplx{});
      for (std::size_t i = 0; i < diag_.size(); ++i) diag_[i] += o.diag_[i];
    }
    if (o.has_dense()) {
      if (!has_dense()) dense_.assign(o.dense_.size(), cplx{});
      for (std::size_t i = 0; i < dense_.size(); ++i) dense_[i] += o.dense_[i];
    }
    return *this;
  }
  TwoPointKernel& operator*=(cplx c) {
    for (auto& v : diag_) v *= c;
    for (auto& v : dense_) v *= c;
    return *this;
  }
  /// this += c * o
  void add_scaled(const TwoPointKernel& o, cplx c) {
    TwoPointKernel t = o;
    t *= c;
    *this += t;
  }
  friend TwoPointKernel operator+(TwoPointKernel a, const TwoPointKernel& b) { return a += b; }
  friend TwoPointKernel operator-(TwoPointKernel a, const TwoPointKernel& b) {
    a.add_scaled(b, -1.0);
    return a;
  }
  friend TwoPointKernel operator*(cplx c, TwoPointKernel a) { return a *= c; }

  /// Largest |value(k1,k2)|.
  double max_abs() const {
    double m = 0.0;
    const std::size_t n = grid_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (has_dense())
        for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs(value(i, j)));
      else if (has_diagonal())
        m = std::max(m, std::abs(value(i, i)));
    }
    return m;
  }
  /// max |K(k1,k2) - conj(K(k2,k1))|
  double hermiticity_defect() const {
    double m = 0.0;
    const std::size_t n = grid_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (has_diagonal()) m = std::max(m, std::abs(diag_[i].imag()) / grid_.weight());
      if (has_dense())
        for (std::size_t j = i; j < n; ++j)
          m = std::max(m, std::abs(dense_[i * n + j] - std::conj(dense_[j * n + i])));
    }
    return m;
  }
  /// max |K(k1,k2) - K(k2,k1)|
  double symmetry_defect() const {
    double m = 0.0;
    const std::size_t n = grid_.size();
    if (has_dense())
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          m = std::max(m, std::abs(dense_[i * n + j] - dense_[j * n + i]));
    return m;
  }

  /// tr{K} = int K(k,k) d^2k/(2pi)^2
  cplx trace() const {
    cplx s{};
    const std::size_t n = grid_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (has_diagonal()) s += diag_[i];
      if (has_dense()) s += grid_.weight() * dense_[i * n + i];
    }
    return s;
  }

private:
  WavevectorGrid grid_;
  std::vector<cplx> diag_;
  std::vector<cplx> dense_;
};

// Diamond contractions: one shared wavevector integrated with the lattice
// weight.

/// a ⋄ b for two fields.
inline cplx diamond(const TransverseField& a, const TransverseField& b) {
  require_same_grid(a.grid, b.grid);
  cplx s{};
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s * a.grid.weight();
}

/// K ⋄ f
inline TransverseField diamond(const TwoPointKernel& k, const TransverseField& f) {
  require_same_grid(k.grid(), f.grid);
  TransverseField out(f.grid);
  const std::size_t n = f.grid.size();
  const double w = f.grid.weight();
  for (std::size_t i = 0; i < n; ++i) {
    cplx s{};
    if (k.has_dense()) {
      const cplx* row = k.dense_values().data() + i * n;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * f.values[j];
      s *= w;
    }
    if (k.has_diagonal()) s += k.diagonal_coefficients()[i] * f.values[i];
    out.values[i] = s;
  }
  return out;
}

/// f ⋄ K
inline TransverseField diamond(const TransverseField& f, const TwoPointKernel& k) {
  require_same_grid(k.grid(), f.grid);
  TransverseField out(f.grid);
  const std::size_t n = f.grid.size();
  const double w = f.grid.weight();
  if (k.has_dense()) {
    for (std::size_t i = 0; i < n; ++i) {
      const cplx* row = k.dense_values().data() + i * n;
      const cplx fi = f.values[i] * w;
      for (std::size_t j = 0; j < n; ++j) out.values[j] += fi * row[j];
    }
  }
  if (k.has_diagonal())
    for (std::size_t j = 0; j < n; ++j) out.values[j] += f.values[j] * k.diagonal_coefficients()[j];
  return out;
}

/// A ⋄ B
inline TwoPointKernel diamond(const TwoPointKernel& a, const TwoPointKernel& b) {
  require_same_grid(a.grid(), b.grid());
  const auto& g = a.grid();
  const std::size_t n = g.size();
  TwoPointKernel out(g);
  if (a.has_diagonal() && b.has_diagonal()) {
    std::vector<cplx> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a.diagonal_coefficients()[i] * b.diagonal_coefficients()[i];
    out += TwoPointKernel::diagonal(g, std::move(d));
  }
  if (a.has_dense() || b.has_dense()) {
    std::vector<cplx> dense(n * n);
    const double w = g.weight();
    if (a.has_dense() && b.has_dense()) {
      const auto& av = a.dense_values();
      const auto& bv = b.dense_values();
      parallel_for(0, n, [&](std::size_t i) {
        for (std::size_t l = 0; l < n; ++l) {
          const cplx ail = av[i * n + l] * w;
          for (std::size_t j = 0; j < n; ++j) dense[i * n + j] += ail * bv[l * n + j];
        }
      });
    }
    if (a.has_dense() && b.has_diagonal())
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          dense[i * n + j] += a.dense_values()[i * n + j] * b.diagonal_coefficients()[j];
    if (a.has_diagonal() && b.has_dense())
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          dense[i * n + j] += a.diagonal_coefficients()[i] * b.dense_values()[i * n + j];
    out += TwoPointKernel::from_dense(g, std::move(dense));
  }
  return out;
}

/// tr{A ⋄ B} = sum w^2 A(k1,k2) B(k2,k1)
inline cplx trace_product(const TwoPointKernel& a, const TwoPointKernel& b) {
  require_same_grid(a.grid(), b.grid());
  const auto& g = a.grid();
  const std::size_t n = g.size();
  const double w = g.weight();
  cplx s{};
  if (a.has_dense() && b.has_dense()) {
    cplx t{};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t += a.dense_values()[i * n + j] * b.dense_values()[j * n + i];
    s += t * (w * w);
  }
  if (a.has_diagonal() && b.has_dense())
    for (std::size_t i = 0; i < n; ++i) s += a.diagonal_coefficients()[i] * b.dense_values()[i * n + i] * w;
  if (a.has_dense() && b.has_diagonal())
    for (std::size_t i = 0; i < n; ++i) s += b.diagonal_coefficients()[i] * a.dense_values()[i * n + i] * w;
  if (a.has_diagonal() && b.has_diagonal())
    for (std::size_t i = 0; i < n; ++i)
      s += a.diagonal_coefficients()[i] * b.diagonal_coefficients()[i] / w;
  return s;
}

// Propagation kernels for one realization of the refractive-index
// fluctuation, given as its transverse Fourier transform N(q).

using IndexSpectrum = std::function<cplx(const Vec2&)>;

/// k N(k1 - k2) - 1(k1,k2) |k2|^2 / 2k
inline TwoPointKernel comoving_kernel(const WavevectorGrid& g, const IndexSpectrum& n_hat, double k) {
  const std::size_t n = g.size();
  std::vector<cplx> dense(n * n);
  std::vector<cplx> diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 k1 = g.point(i);
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 k2 = g.point(j);
      dense[i * n + j] = k * n_hat({k1[0] - k2[0], k1[1] - k2[1]});
    }
    diag[i] = -norm2(k1) / (2.0 * k);
  }
  return TwoPointKernel::from_dense(g, std::move(dense)) + TwoPointKernel::diagonal(g, std::move(diag));
}

/// k N(k1 - k2) exp[i z (|k1|^2 - |k2|^2) / 2k]
inline TwoPointKernel fixed_frame_kernel(const WavevectorGrid& g, const IndexSpectrum& n_hat, double k,
                                         double z) {
  const std::size_t n = g.size();
  std::vector<cplx> dense(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 k1 = g.point(i);
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 k2 = g.point(j);
      const double ph = z * (norm2(k1) - norm2(k2)) / (2.0 * k);
      dense[i * n + j] = k * n_hat({k1[0] - k2[0], k1[1] - k2[1]}) * std::polar(1.0, ph);
    }
  }
  return TwoPointKernel::from_dense(g, std::move(dense));
}

/// Delta-resolved density of the four-point kernel,
/// 2 pi^2 k^2 Phi(|k1-k2|^2) exp[(iz/2k)(|k1|^2 - |k2|^2 + |k3|^2 - |k4|^2)]
/// with k4 = k1 - k2 + k3.
inline cplx v0_phase_density(const Vec2& k1, const Vec2& k2, const Vec2& k3, double z,
                             const BeamGeometry& geom, const TurbulenceParams& params) {
  if (z < 0.0) throw DomainError("v0_phase_density: z must be >= 0");
  const Vec2 q{k1[0] - k2[0], k1[1] - k2[1]};
  const Vec2 k4{q[0] + k3[0], q[1] + k3[1]};
  const double phase = z / (2.0 * geom.k) * (norm2(k1) - norm2(k2) + norm2(k3) - norm2(k4));
  const double amp = 2.0 * std::numbers::pi * std::numbers::pi * geom.k * geom.k * turb::psd_q(norm2(q), params);
  return amp * std::polar(1.0, phase);
}

/// Lattice transfer-vector weights W(q) approximating Phi(|q|^2) d^2q/(2pi)^2.
class SpectralWeights {
public:
  struct Tap {
    int di;
    int dj;
    double qx;
    double qy;
    double weight;
  };

  SpectralWeights(const WavevectorGrid& g, const TurbulenceParams& p) : grid_(g) {
    p.validate();
    build(p);
  }

  const WavevectorGrid& grid() const noexcept { return grid_; }
  /// Taps with q != 0.
  const std::vector<Tap>& taps() const noexcept { return taps_; }
  /// Weight of the q = 0 tap.
  double center_weight() const noexcept { return center_; }
  /// Mass of the spectrum outside the lattice window, spread over all bins.
  double outside_mass() const noexcept { return outside_; }
  /// Sum of all weights, the lattice value of Lambda.
  double total() const noexcept {
    CompensatedSum s;
    s.add(center_);
    for (const auto& t : taps_) s.add(t.weight);
    return s.value();
  }

private:
  void build(const TurbulenceParams& p) {
    const int n = grid_.n_side();
    const int half = n / 2;
    const double h = grid_.spacing();
    const double pref = p.n_vk * p.cn2 / (4.0 * std::numbers::pi * std::numbers::pi);
    const double k0sq = p.kappa0 * p.kappa0;
    const int span = half + 1;
    const int side = 2 * span + 1;
    std::vector<double> acc(static_cast<std::size_t>(side) * side, 0.0);
    auto at = [&](int i, int j) -> double& {
      return acc[static_cast<std::size_t>(i + span) * side + static_cast<std::size_t>(j + span)];
    };

    const quad::Rule gl = quad::gauss_legendre(24);
    // Moments of the spectrum over [cx-h/2, cx+h/2] x [cy-h/2, cy+h/2]
    // about (qx, qy): 1, dx, dy, dx^2, dy^2, dx dy.
    std::function<void(double, double, double, double, double, int, std::array<double, 6>&)> moments =
        [&](double cx, double cy, double w, double qx, double qy, int depth, std::array<double, 6>& m) {
          if (depth > 0) {
            for (double sx : {-0.25, 0.25})
              for (double sy : {-0.25, 0.25}) moments(cx + sx * w, cy + sy * w, 0.5 * w, qx, qy, depth - 1, m);
            return;
          }
          const double hw = 0.5 * w;
          for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
            const double x = cx + hw * gl.nodes[a];
            const double dx = x - qx;
            for (std::size_t b = 0; b < gl.nodes.size(); ++b) {
              const double y = cy + hw * gl.nodes[b];
              const double dy = y - qy;
              const double f = gl.weights[a] * gl.weights[b] * hw * hw * std::pow(x * x + y * y + k0sq, -11.0 / 6.0);
              m[0] += f;
              m[1] += f * dx;
              m[2] += f * dy;
              m[3] += f * dx * dx;
              m[4] += f * dy * dy;
              m[5] += f * dx * dy;
            }
          }
        };

    for (int i = -half; i <= half; ++i) {
      for (int j = -half; j <= half; ++j) {
        if (i == 0 && j == 0) continue;
        const int ring = std::max(std::abs(i), std::abs(j));
        const int depth = ring <= 2 ? 3 : (ring <= 5 ? 1 : 0);
        std::array<double, 6> m{};
        const double qx = i * h, qy = j * h;
        moments(qx, qy, h, qx, qy, depth, m);
        for (auto& v : m) v *= pref;
        at(i, j) += m[0];
        // first moments: central differences
        at(i + 1, j) += m[1] / (2.0 * h);
        at(i - 1, j) -= m[1] / (2.0 * h);
        at(i, j + 1) += m[2] / (2.0 * h);
        at(i, j - 1) -= m[2] / (2.0 * h);
        // second moments: three-point stencils
        at(i + 1, j) += 0.5 * m[3] / (h * h);
        at(i - 1, j) += 0.5 * m[3] / (h * h);
        at(i, j) -= m[3] / (h * h);
        at(i, j + 1) += 0.5 * m[4] / (h * h);
        at(i, j - 1) += 0.5 * m[4] / (h * h);
        at(i, j) -= m[4] / (h * h);
        for (int sx : {-1, 1})
          for (int sy : {-1, 1}) at(i + sx, j + sy) += m[5] * sx * sy / (4.0 * h * h);
      }
    }

    // Central cell in polar form: radial integrals are analytic and the
    // angular integral runs over one octant, where R = (h/2) / cos(theta).
    const quad::Rule oct = quad::gauss_legendre(48, 0.0, std::numbers::pi / 4.0);
    const double k0_13 = std::cbrt(p.kappa0);
    double mass_c = 0.0, second_c = 0.0, outside = 0.0;
    const double rho_out = (half + 0.5) * h;
    for (std::size_t a = 0; a < oct.nodes.size(); ++a) {
      const double c = std::cos(oct.nodes[a]);
      const double r = 0.5 * h / c;
      const double s = r * r + k0sq;
      // int_0^R r s^{-11/6} dr
      mass_c += oct.weights[a] * 0.6 * (std::pow(p.kappa0, -5.0 / 3.0) - std::pow(s, -5.0 / 6.0));
      // int_0^R r^3 s^{-11/6} dr
      second_c += oct.weights[a] * (0.5 * (6.0 * std::pow(s, 1.0 / 6.0) + 1.2 * k0sq * std::pow(s, -5.0 / 6.0)) -
                                    3.6 * k0_13);
      const double ro = rho_out / c;
      outside += oct.weights[a] * 0.6 * std::pow(ro * ro + k0sq, -5.0 / 6.0);
    }
    mass_c *= 8.0 * pref;
    const double m2x = 0.5 * 8.0 * pref * second_c;  // int Phi x^2 over the cell
    outside *= 8.0 * pref;
    at(1, 0) += 0.5 * m2x / (h * h);
    at(-1, 0) += 0.5 * m2x / (h * h);
    at(0, 1) += 0.5 * m2x / (h * h);
    at(0, -1) += 0.5 * m2x / (h * h);
    at(0, 0) += mass_c - 2.0 * m2x / (h * h);

    outside_ = outside;
    const double per_bin = outside / (static_cast<double>(n) * n);
    for (int i = -half; i < half; ++i)
      for (int j = -half; j < half; ++j) at(i, j) += per_bin;

    center_ = at(0, 0);
    for (int i = -span; i <= span; ++i) {
      for (int j = -span; j <= span; ++j) {
        if (i == 0 && j == 0) continue;
        const double w = at(i, j);
        if (w != 0.0) taps_.push_back({i, j, i * h, j * h, w});
      }
    }
  }

  WavevectorGrid grid_;
  std::vector<Tap> taps_;
  double center_ = 0.0;
  double outside_ = 0.0;
};

namespace detail {

// Per-tap phase vectors exp(i s q.k) over the lattice.
inline std::vector<cplx> tap_phases(const SpectralWeights& w, double s) {
  const auto& g = w.grid();
  const std::size_t n = g.size();
  const int side = g.n_side();
  std::vector<cplx> out(w.taps().size() * n);
  std::vector<cplx> px(side), py(side);
  for (std::size_t t = 0; t < w.taps().size(); ++t) {
    const auto& tap = w.taps()[t];
    for (int i = 0; i < side; ++i) {
      px[i] = std::polar(1.0, s * tap.qx * g.coord(i));
      py[i] = std::polar(1.0, s * tap.qy * g.coord(i));
    }
    cplx* o = out.data() + t * n;
    for (int i = 0; i < side; ++i)
      for (int j = 0; j < side; ++j) o[g.index(i, j)] = px[i] * py[j];
  }
  return out;
}

// Lattice index of k - (di, dj) dk, periodic.
inline std::vector<std::uint32_t> shift_table(const WavevectorGrid& g, int di, int dj) {
  const int side = g.n_side();
  std::vector<std::uint32_t> out(g.size());
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      out[g.index(i, j)] = static_cast<std::uint32_t>(g.index(g.wrap(i - di), g.wrap(j - dj)));
  return out;
}

// sum over taps of W e^{i(z/k) q.(k1-k2)} M(k1-q, k2-q), optionally minus
// W M(k1,k2) per tap.
inline TwoPointKernel a_type_sum(const SpectralWeights& w, const TwoPointKernel& m, double z, double k,
                                 bool subtract) {
  const auto& g = m.grid();
  const std::size_t n = g.size();
  TwoPointKernel out(g);
  if (m.has_diagonal()) {
    // diagonal in, diagonal out: the phase vanishes on k1 = k2
    std::vector<cplx> d(n, cplx{});
    const auto& c = m.diagonal_coefficients();
    for (const auto& tap : w.taps()) {
      const auto sh = shift_table(g, tap.di, tap.dj);
      for (std::size_t i = 0; i < n; ++i) d[i] += tap.weight * (subtract ? c[sh[i]] - c[i] : c[sh[i]]);
    }
    out += TwoPointKernel::diagonal(g, std::move(d));
  }
  if (m.has_dense()) {
    const auto& taps = w.taps();
    const auto phases = tap_phases(w, z / k);
    std::vector<std::vector<std::uint32_t>> shifts;
    shifts.reserve(taps.size());
    for (const auto& tap : taps) shifts.push_back(shift_table(g, tap.di, tap.dj));
    const auto& mv = m.dense_values();
    std::vector<cplx> dense(n * n, cplx{});
    parallel_for(0, n, [&](std::size_t i) {
      cplx* row = dense.data() + i * n;
      for (std::size_t t = 0; t < taps.size(); ++t) {
        const cplx* ph = phases.data() + t * n;
        const auto& sh = shifts[t];
        const cplx a = taps[t].weight * ph[i];
        const cplx* mrow = mv.data() + static_cast<std::size_t>(sh[i]) * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += a * std::conj(ph[j]) * mrow[sh[j]];
      }
      if (subtract) {
        double tot = 0.0;
        for (const auto& tap : taps) tot += tap.weight;
        const cplx* mrow = mv.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] -= tot * mrow[j];
      }
    });
    out += TwoPointKernel::from_dense(g, std::move(dense));
  }
  return out;
}

// sum over taps of W e^{i(z/k)(q.(k1-k2) - |q|^2)} M(k1-q, k2+q)
inline TwoPointKernel b_type_sum(const SpectralWeights& w, const TwoPointKernel& m, double z, double k) {
  const auto& g = m.grid();
  const std::size_t n = g.size();
  const TwoPointKernel md = m.has_diagonal() ? m.densified() : m;
  if (!md.has_dense()) return TwoPointKernel(g);
  const auto& taps = w.taps();
  const auto phases = tap_phases(w, z / k);
  std::vector<std::vector<std::uint32_t>> minus, plus;
  for (const auto& tap : taps) {
    minus.push_back(shift_table(g, tap.di, tap.dj));
    plus.push_back(shift_table(g, -tap.di, -tap.dj));
  }
  const auto& mv = md.dense_values();
  std::vector<cplx> dense(n * n, cplx{});
  parallel_for(0, n, [&](std::size_t i) {
    cplx* row = dense.data() + i * n;
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const cplx* ph = phases.data() + t * n;
      const double q2 = taps[t].qx * taps[t].qx + taps[t].qy * taps[t].qy;
      const cplx a = taps[t].weight * ph[i] * std::polar(1.0, -z / k * q2);
      const cplx* mrow = mv.data() + static_cast<std::size_t>(minus[t][i]) * n;
      const auto& sp = plus[t];
      for (std::size_t j = 0; j < n; ++j) row[j] += a * std::conj(ph[j]) * mrow[sp[j]];
    }
    const cplx* mrow = mv.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += w.center_weight() * mrow[j];
  });
  return TwoPointKernel::from_dense(g, std::move(dense));
}

}  // namespace detail

/// Hermitian-type contraction V0(z) ⋄⋄a M:
/// (k1,k2) -> (k^2/2) sum_q W(q) e^{i(z/k) q.(k1-k2)} M(k1-q, k2-q).
inline TwoPointKernel contract_a(const SpectralWeights& w, const TwoPointKernel& m, double z, double k) {
  require_same_grid(w.grid(), m.grid());
  TwoPointKernel out = detail::a_type_sum(w, m, z, k, false);
  out.add_scaled(m, w.center_weight());
  out *= 0.5 * k * k;
  return out;
}

/// Symmetric-type contraction V0(z) ⋄⋄b M:
/// (k1,k2) -> (k^2/2) sum_q W(q) e^{i(z/k)(q.(k1-k2) - |q|^2)} M(k1-q, k2+q).
inline TwoPointKernel contract_b(const SpectralWeights& w, const TwoPointKernel& m, double z, double k) {
  require_same_grid(w.grid(), m.grid());
  TwoPointKernel out = detail::b_type_sum(w, m, z, k);
  out *= 0.5 * k * k;
  return out;
}

/// Right-hand side of the Hermitian moment equation, 2 V0 ⋄⋄a M - k^2 Lambda M,
/// with Lambda the lattice total so that the q = 0 terms cancel identically.
inline TwoPointKernel hermitian_generator(const SpectralWeights& w, const TwoPointKernel& m, double z, double k) {
  require_same_grid(w.grid(), m.grid());
  TwoPointKernel out = detail::a_type_sum(w, m, z, k, true);
  out *= k * k;
  return out;
}

/// Right-hand side of the symmetric moment equation, -(2 V0 ⋄⋄b M + k^2 Lambda M).
inline TwoPointKernel symmetric_generator(const SpectralWeights& w, const TwoPointKernel& m, double z, double k) {
  require_same_grid(w.grid(), m.grid());
  TwoPointKernel out = detail::b_type_sum(w, m, z, k);
  out.add_scaled(m.has_diagonal() ? m.densified() : m, w.total());
  out *= -k * k;
  return out;
}

/// V1 = (1/2) Lambda k^2 1.
inline TwoPointKernel v1_kernel(const WavevectorGrid& g, const BeamGeometry& geom, const TurbulenceParams& params) {
  const double lambda = params.cn2 == 0.0 ? 0.0 : turb::lambda_const(params);
  return TwoPointKernel::identity(g, 0.5 * lambda * geom.k * geom.k);
}

// Binary kernel dump: 32-byte header followed by n^4 complex64 values,
// row-major over (k1, k2), little-endian.
//   bytes 0-7   magic "SCNTKRN1"
//   bytes 8-11  uint32 n_side
//   bytes 12-15 uint32 reserved (0)
//   bytes 16-23 float64 k_max
//   bytes 24-31 reserved (0)

inline constexpr char kernel_magic[8] = {'S', 'C', 'N', 'T', 'K', 'R', 'N', '1'};

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  is.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!is) throw std::runtime_error("kernel dump: truncated stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline void write_kernel(std::ostream& os, const TwoPointKernel& k) {
  const auto& g = k.grid();
  os.write(kernel_magic, 8);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n_side()));
  detail::put_le<std::uint32_t>(os, 0);
  detail::put_le<double>(os, g.k_max());
  detail::put_le<std::uint64_t>(os, 0);
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx v = k.value(i, j);
      detail::put_le<float>(os, static_cast<float>(v.real()));
      detail::put_le<float>(os, static_cast<float>(v.imag()));
    }
}

inline TwoPointKernel read_kernel(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kernel_magic, 8) != 0) throw std::runtime_error("kernel dump: bad magic");
  const auto n_side = detail::get_le<std::uint32_t>(is);
  (void)detail::get_le<std::uint32_t>(is);
  const auto k_max = detail::get_le<double>(is);
  (void)detail::get_le<std::uint64_t>(is);
  WavevectorGrid g(static_cast<int>(n_side), k_max);
  const std::size_t n = g.size();
  std::vector<cplx> values(n * n);
  for (auto& v : values) {
    const float re = detail::get_le<float>(is);
    const float im = detail::get_le<float>(is);
    v = {re, im};
  }
  return TwoPointKernel::from_dense(g, std::move(values));
}

inline void write_kernel(const std::string& path, const TwoPointKernel& k) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_kernel(os, k);
}

}  // namespace scintilla
