// SPDX-License-Identifier: Apache-2.0
//
// Two equal sources under a Gaussian PSF: how far does each measurement fall
// short of the quantum limit on the separation, and what does a short
// Monte-Carlo run of the SLIVER and SPADE estimators give at L = 100?
#include <cstdio>

#include "qloc/qloc.hpp"

int main() {
  const double sigma = 1.0;
  const qloc::Psf psf = qloc::Psf::gaussian(sigma);

  std::printf("%6s %10s %12s %10s %10s\n", "dX/s", "quantum", "direct", "sliver", "spade");
  for (double dx : {0.1, 0.25, 0.5, 1.0, 2.0}) {
    const auto cfg = qloc::SourceConfig::equal({dx * sigma, 0.0}, 1.0, 1);
    const double unit = 4.0 * sigma * sigma / cfg.photons();
    const double quantum = qloc::separation_bounds(qloc::qfi(cfg, psf))[0];
    const double direct = qloc::crb_2x2(qloc::cfi_direct(psf, cfg))[0];
    const double sliver = qloc::crb_2x2(qloc::sliver_fi(psf, cfg))[0];
    const double spade = qloc::crb_2x2(qloc::spade_fi(sigma, cfg.eps_tot()))[0];
    std::printf("%6.2f %10.4f %12.4f %10.4f %10.4f\n", dx, quantum / unit, direct / unit, sliver / unit,
                spade / unit);
  }

  qloc::MCConfig mc;
  mc.sigma = sigma;
  mc.grid_dx = {0.1, 0.5, 2.0};
  mc.grid_dy = {0.0};
  mc.L = 100;
  mc.runs = 20000;
  mc.seed = 2024;
  for (auto scheme : {qloc::Scheme::Sliver, qloc::Scheme::Spade}) {
    mc.scheme = scheme;
    const qloc::MCResult res = qloc::run_mc(mc);
    std::printf("\n%s, L = %llu: MSE(dX) / (4 s^2 / L)\n", qloc::to_string(scheme).c_str(),
                static_cast<unsigned long long>(mc.L));
    for (const auto& p : res.points) {
      std::printf("  dX = %.2f  mse = %.3f +- %.3f  crb = %.3f\n", p.dx, p.mse_dx / p.qcrb, p.stderr_dx / p.qcrb,
                  p.crb_dx / p.qcrb);
    }
  }
  return 0;
}
