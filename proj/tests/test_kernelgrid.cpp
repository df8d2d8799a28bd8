#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "scintilla/coherentdist.hpp"
#include "scintilla/kernelgrid.hpp"
#include "scintilla/oracle.hpp"

using namespace scintilla;

namespace {

BeamGeometry unit_beam() {
  BeamGeometry g;
  g.k = 1.0;
  g.w0 = 1.0;
  return g;
}

TurbulenceParams unit_turbulence(double cn2 = 1e-3) {
  TurbulenceParams p;
  p.cn2 = cn2;
  p.kappa0 = 1e-3;
  return p;
}

std::size_t origin(const WavevectorGrid& g) { return g.index(g.n_side() / 2, g.n_side() / 2); }

}  // namespace

TEST(Grid, Geometry) {
  const WavevectorGrid g(16, 4.0);
  EXPECT_EQ(g.size(), 256u);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
  EXPECT_DOUBLE_EQ(g.coord(8), 0.0);
  EXPECT_EQ(g.wrap(-1), 15);
  EXPECT_THROW(WavevectorGrid(15, 1.0), DomainError);
  EXPECT_THROW(WavevectorGrid(16, 0.0), DomainError);
}

TEST(Diamond, IdentityActsAsIdentity) {
  const auto g = WavevectorGrid::for_waist(1.0, 16);
  const auto f = coherent::sample_zeta(g, unit_beam());
  const auto one = TwoPointKernel::identity(g);
  const auto left = diamond(one, f), right = diamond(f, one);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_LT(std::abs(left.values[i] - f.values[i]), 1e-14 * std::abs(f.values[origin(g)]));
    EXPECT_LT(std::abs(right.values[i] - f.values[i]), 1e-14 * std::abs(f.values[origin(g)]));
  }
  // the dense form of the identity behaves the same way
  const auto dense = diamond(one.densified(), f);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT(std::abs(dense.values[i] - f.values[i]), 1e-12);
}

TEST(Diamond, DetectorAndBeamNormalization) {
  BeamGeometry b = unit_beam().with_beta(0.5).with_u0(0.7);
  b.zeta0 = 3.0;
  const auto g = WavevectorGrid::for_waist(1.0, 48);
  const auto mode = coherent::sample_detector(g, b, 1.0);
  EXPECT_NEAR(diamond(mode.conj(), mode).real(), 1.0, 1e-3);
  EXPECT_NEAR(coherent::detector_kernel(mode).trace().real(), 1.0, 1e-3);
  const auto zeta = coherent::sample_zeta(g, b);
  EXPECT_NEAR(zeta.norm_squared(), 9.0, 9e-3);
}

TEST(Diamond, KernelProductWithIdentity) {
  const auto g = WavevectorGrid::for_waist(1.0, 16);
  const auto z = coherent::sample_zeta(g, unit_beam());
  const auto m = TwoPointKernel::outer(z, z);
  const auto p = diamond(TwoPointKernel::identity(g), m);
  const double scale = m.max_abs();
  for (std::size_t i = 0; i < g.size() * g.size(); ++i)
    EXPECT_LT(std::abs(p.dense_values()[i] - m.dense_values()[i]), 1e-12 * scale);
}

TEST(Diamond, MismatchedGridsThrow) {
  const WavevectorGrid a(16, 4.0), b(16, 5.0);
  EXPECT_THROW(diamond(TransverseField(a), TransverseField(b)), GridMismatchError);
  EXPECT_THROW(TwoPointKernel::identity(a) + TwoPointKernel::identity(b), GridMismatchError);
}

TEST(Kernel, HermitianAndSymmetricMoments) {
  BeamGeometry b = unit_beam().with_u0(0.4);
  const auto g = WavevectorGrid::for_waist(1.0, 16);
  const auto mode = coherent::sample_detector(g, b, 1.0);
  const auto herm = TwoPointKernel::outer(mode, mode);
  EXPECT_LT(herm.hermiticity_defect(), 1e-15 * herm.max_abs());
  EXPECT_GT(herm.symmetry_defect(), 0.1 * herm.max_abs());
  const auto sym = TwoPointKernel::outer_symmetric(mode, mode);
  EXPECT_EQ(sym.symmetry_defect(), 0.0);
}

TEST(PhaseDensity, ZeroTransferAndSymmetry) {
  const BeamGeometry b = unit_beam();
  const auto p = unit_turbulence();
  const Vec2 k1{0.3, -0.2}, k3{-0.5, 0.9};
  const cplx same = v0_phase_density(k1, k1, k3, 2.0, b, p);
  EXPECT_NEAR(same.real(), 2.0 * std::numbers::pi * std::numbers::pi * turb::psd_q(0.0, p), 1e-9 * same.real());
  EXPECT_NEAR(same.imag(), 0.0, 1e-12 * same.real());

  const Vec2 k2{0.1, 0.4};
  const Vec2 k4{k1[0] - k2[0] + k3[0], k1[1] - k2[1] + k3[1]};
  const cplx a = v0_phase_density(k1, k2, k3, 1.7, b, p);
  const cplx swapped = v0_phase_density(k3, k4, k1, 1.7, b, p);
  EXPECT_LT(std::abs(a - swapped), 1e-13 * std::abs(a));
  EXPECT_EQ(v0_phase_density(k1, k2, k3, 1.0, b, unit_turbulence(0.0)), cplx{});
  EXPECT_THROW(v0_phase_density(k1, k2, k3, -1.0, b, p), DomainError);
}

TEST(SpectralWeights, TotalIsLambda) {
  const auto p = unit_turbulence();
  const SpectralWeights w(WavevectorGrid::for_waist(1.0, 32), p);
  EXPECT_LT(std::abs(w.total() / turb::lambda_const(p) - 1.0), 1e-12);
}

TEST(ContractA, IdentityGivesContractedKernel) {
  const auto geom = unit_beam();
  const auto p = unit_turbulence();
  const auto g = WavevectorGrid::for_waist(1.0, 64);
  const SpectralWeights w(g, p);
  const auto out = contract_a(w, TwoPointKernel::identity(g), 0.8, geom.k);
  const auto v1 = v1_kernel(g, geom, p);
  const double scale = 0.5 * geom.k * geom.k * turb::lambda_const(p);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    worst = std::max(worst, std::abs(out.diagonal_coefficients()[i] - v1.diagonal_coefficients()[i]));
  EXPECT_LE(worst, 1e-2 * scale);
  EXPECT_FALSE(out.has_dense());
}

TEST(ContractA, ZeroInputAndZeroTurbulence) {
  const auto g = WavevectorGrid::for_waist(1.0, 16);
  const SpectralWeights w(g, unit_turbulence());
  EXPECT_EQ(contract_a(w, TwoPointKernel::zero(g), 0.5, 1.0).max_abs(), 0.0);
  EXPECT_EQ(contract_b(w, TwoPointKernel::zero(g), 0.5, 1.0).max_abs(), 0.0);
  const auto z = coherent::sample_zeta(g, unit_beam());
  const SpectralWeights none(g, unit_turbulence(0.0));
  EXPECT_EQ(contract_b(none, TwoPointKernel::outer_symmetric(z, z), 0.5, 1.0).max_abs(), 0.0);
  EXPECT_EQ(v1_kernel(g, unit_beam(), unit_turbulence(0.0)).max_abs(), 0.0);
}

TEST(ContractA, GaussianMomentMatchesQuadrature) {
  const auto geom = unit_beam();
  auto p = unit_turbulence();
  const auto g = WavevectorGrid::for_waist(1.0, 32);
  const SpectralWeights w(g, p);
  const auto z = coherent::sample_zeta(g, geom);
  const double zpos = 0.6;
  const auto grid_value = contract_a(w, TwoPointKernel::outer(z, z), zpos, geom.k);
  oracle::QuadratureSpec spec;
  spec.rel_tol = 1e-8;
  spec.outer_scale_limit = false;
  const int c = g.n_side() / 2;
  for (auto [di, dj] : {std::pair{0, 0}, std::pair{2, -1}}) {
    const std::size_t i = g.index(c + di, c), j = g.index(c, c + dj);
    const auto ref = oracle::contract_a_numeric(oracle::GaussianInput::zeta_zeta_conj, g.point(i), g.point(j), zpos,
                                                geom, p, spec);
    const cplx v = grid_value.value(i, j);
    EXPECT_LT(std::abs(v - ref.value), 1e-3 * std::abs(ref.value)) << di << ',' << dj;
  }
}

TEST(ContractB, GaussianMomentMatchesQuadrature) {
  const auto geom = unit_beam();
  auto p = unit_turbulence();
  const auto g = WavevectorGrid::for_waist(1.0, 32);
  const SpectralWeights w(g, p);
  const auto z = coherent::sample_zeta(g, geom);
  const double zpos = 0.6;
  const auto grid_value = contract_b(w, TwoPointKernel::outer_symmetric(z, z), zpos, geom.k);
  oracle::QuadratureSpec spec;
  spec.rel_tol = 1e-8;
  spec.outer_scale_limit = false;
  const int c = g.n_side() / 2;
  for (auto [di, dj] : {std::pair{0, 0}, std::pair{1, 1}}) {
    const std::size_t i = g.index(c + di, c), j = g.index(c, c + dj);
    const auto ref = oracle::contract_b_numeric(oracle::GaussianInput::zeta_zeta, g.point(i), g.point(j), zpos,
                                                geom, p, spec);
    const cplx v = grid_value.value(i, j);
    EXPECT_LT(std::abs(v - ref.value), 1e-3 * std::abs(ref.value)) << di << ',' << dj;
  }
}

TEST(ContractA, RefinementConverges) {
  const auto geom = unit_beam();
  const auto p = unit_turbulence();
  cplx previous{};
  double change = 0.0;
  for (int n : {16, 32}) {
    const auto g = WavevectorGrid::for_waist(1.0, n);
    const SpectralWeights w(g, p);
    const auto z = coherent::sample_zeta(g, geom);
    const std::size_t o = origin(g);
    const cplx v = contract_a(w, TwoPointKernel::outer(z, z), 0.6, geom.k).value(o, o);
    if (n > 16) change = std::abs(v - previous) / std::abs(v);
    previous = v;
  }
  EXPECT_LT(change, 1e-3);
}

TEST(ContractedKernel, TraceWithNormalizedDetector) {
  const auto geom = unit_beam().with_u0(0.3);
  const auto p = unit_turbulence();
  const auto g = WavevectorGrid::for_waist(1.0, 48);
  const auto d = coherent::detector_kernel(coherent::sample_detector(g, geom, 1.0));
  const cplx t = trace_product(v1_kernel(g, geom, p), d);
  const double expect = 0.5 * turb::lambda_const(p) * geom.k * geom.k;
  EXPECT_LT(std::abs(t - expect), 1e-3 * expect);
}

TEST(Propagation, FrameKernelsAgreeAtOrigin) {
  const auto g = WavevectorGrid::for_waist(1.0, 16);
  const IndexSpectrum n_hat = [](const Vec2& q) { return cplx{std::exp(-norm2(q)), 0.0}; };
  const auto co = comoving_kernel(g, n_hat, 2.0);
  const auto fixed = fixed_frame_kernel(g, n_hat, 2.0, 0.0);
  const std::size_t i = g.index(3, 5), j = g.index(7, 2);
  EXPECT_LT(std::abs(co.value(i, j) - fixed.value(i, j)), 1e-14);
  // the kinetic term sits on the diagonal only
  const double k2 = norm2(g.point(i));
  EXPECT_NEAR((co.value(i, i) - fixed.value(i, i)).real(), -k2 / 4.0 / g.weight(), 1e-9 / g.weight());
}

TEST(Dump, RoundTrip) {
  const auto g = WavevectorGrid::for_waist(1.0, 16);
  const auto z = coherent::sample_detector(g, unit_beam().with_u0(0.5), 1.0);
  const auto m = TwoPointKernel::outer(z, z) + TwoPointKernel::identity(g, 0.5);
  std::stringstream buf;
  write_kernel(buf, m);
  EXPECT_EQ(buf.str().size(), 32u + 8u * g.size() * g.size());
  EXPECT_EQ(buf.str().substr(0, 8), "SCNTKRN1");
  const auto back = read_kernel(buf);
  EXPECT_EQ(back.grid(), g);
  for (std::size_t i = 0; i < g.size(); i += 7)
    for (std::size_t j = 0; j < g.size(); j += 5)
      EXPECT_LT(std::abs(back.value(i, j) - m.value(i, j)), 1e-6 * std::abs(m.value(i, j)) + 1e-7);
}

TEST(Dump, RejectsBadInput) {
  std::stringstream bad("NOTAKRNL00000000000000000000000000");
  EXPECT_THROW(read_kernel(bad), std::runtime_error);
  std::stringstream truncated;
  write_kernel(truncated, TwoPointKernel::identity(WavevectorGrid(16, 1.0)));
  std::stringstream cut(truncated.str().substr(0, 1000));
  EXPECT_THROW(read_kernel(cut), std::runtime_error);
}
