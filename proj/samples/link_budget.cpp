// Mean photon number collected on axis by a small receiver after a
// horizontal path, with and without turbulence.

#include <cstdio>

#include "scintilla/coherentdist.hpp"
#include "scintilla/turbmodel.hpp"

int main() {
  using namespace scintilla;

  BeamGeometry beam;
  beam.w0 = 0.02;
  beam.zeta0 = 1e4;  // 1e8 photons per pulse

  TurbulenceParams air;
  air.cn2 = 1e-14;

  std::printf("%8s %8s %12s %14s %14s %10s\n", "L[m]", "beta", "rytov_var", "free[1/m2]", "turb[1/m2]", "w/w0");
  for (double length : {250.0, 500.0, 1000.0, 2000.0, 4000.0}) {
    BeamGeometry g = beam;
    g.big_l = length;
    TurbulenceParams none = air;
    none.cn2 = 0.0;
    const auto free = coherent::avg_n_series(g, none);
    const auto turb = coherent::avg_n_series(g, air);
    const auto approx = coherent::avg_n_approx(g, air);
    std::printf("%8.0f %8.3f %12.4g %14.6g %14.6g %10.4f%s\n", length, g.beta(), turb::rytov_variance(g, air),
                free.density, turb.converged ? turb.density : approx.density, approx.width / g.w0,
                turb.converged ? "" : "  (approximate)");
  }
  return 0;
}
