// SPDX-License-Identifier: Apache-2.0
//
// Classical Fisher information of ideal spatially-resolved direct imaging
// for the separation vector (d_X, d_Y), with the centroid known.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "qloc/errors.hpp"
#include "qloc/fisher.hpp"
#include "qloc/psf.hpp"
#include "qloc/qbound.hpp"

namespace qloc {

/// Mean photon-arrival density Lambda(x, y) = (|psi_1|^2 + |psi_2|^2) / 2.
inline double intensity(const Psf& psf, const SourceConfig& cfg, double x, double y) {
  const double hx = 0.5 * cfg.separation.x;
  const double hy = 0.5 * cfg.separation.y;
  const double u = x - cfg.centroid.x;
  const double v = y - cfg.centroid.y;
  return 0.5 * (std::norm(psf.value(u + hx, v + hy)) + std::norm(psf.value(u - hx, v - hy)));
}

/// Exact direct-imaging FI over (dX, dY) by trapezoid quadrature.
/// Zero at coincident sources; points with Lambda < 1e-300 contribute nothing.
inline FisherMatrix cfi_direct(const Psf& psf, const SourceConfig& cfg) {
  cfg.validate();
  const double dx = cfg.separation.x;
  const double dy = cfg.separation.y;
  if (dx == 0.0 && dy == 0.0) return FisherMatrix::zero(separation_labels());

  // dI/dx = 2 Re(psi* dpsi/dx); dLambda/d(dX) = [I_x(r + d/2) - I_x(r - d/2)] / 4.
  auto grad_i = [&psf](double x, double y) {
    const cdouble p = psf.value(x, y);
    return std::pair<double, double>{2.0 * std::real(std::conj(p) * psf.deriv_x(x, y)),
                                     2.0 * std::real(std::conj(p) * psf.deriv_y(x, y))};
  };
  const QuadratureRule rule = psf.default_rule(dx, dy);
  const UniformAxis ax{cfg.centroid.x, rule.half_width, rule.n};
  const UniformAxis ay{cfg.centroid.y, rule.half_width, rule.n};
  CompensatedSum<double> j11, j22, j12;
  for (std::size_t j = 0; j < rule.n; ++j) {
    const double v = ay.node(j) - cfg.centroid.y;
    double r11 = 0.0, r22 = 0.0, r12 = 0.0;
    for (std::size_t i = 0; i < rule.n; ++i) {
      const double u = ax.node(i) - cfg.centroid.x;
      const cdouble p1 = psf.value(u + 0.5 * dx, v + 0.5 * dy);
      const cdouble p2 = psf.value(u - 0.5 * dx, v - 0.5 * dy);
      const double lam = 0.5 * (std::norm(p1) + std::norm(p2));
      if (lam < 1e-300) continue;
      const auto [g1x, g1y] = grad_i(u + 0.5 * dx, v + 0.5 * dy);
      const auto [g2x, g2y] = grad_i(u - 0.5 * dx, v - 0.5 * dy);
      const double a = 0.25 * (g1x - g2x);
      const double b = 0.25 * (g1y - g2y);
      const double w = ax.weight(i) / lam;
      r11 += w * a * a;
      r22 += w * b * b;
      r12 += w * a * b;
    }
    const double w = ay.weight(j);
    j11.add(w * r11);
    j22.add(w * r22);
    j12.add(w * r12);
  }
  const double scale = cfg.photons() * ax.spacing() * ay.spacing();
  Eigen::Matrix2d m;
  m << j11.value(), j12.value(), j12.value(), j22.value();
  return {separation_labels(), scale * m};
}

/// Second-derivative moments of the intensity PSF I = |psi|^2:
/// kappa1 = int I_xx^2 / I, kappa1_y = int I_yy^2 / I, kappa2 = int I_xy^2 / I,
/// kappa3 = int I_xx I_yy / I.
struct IntensityMoments {
  double kappa1 = 0.0;
  double kappa1_y = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;
};

inline IntensityMoments intensity_moments(const Psf& psf) {
  IntensityMoments k;
  if (psf.is_gaussian()) {
    const double s2 = psf.sigma() * psf.sigma();
    const QuadratureRule rule = psf.default_rule();
    // For the Gaussian, I_xx / I = x^2/s^4 - 1/s^2 and I_xy / I = x y / s^4.
    auto moments = [&](double x, double y) {
      const double i = std::norm(psf.value(x, y));
      const double axx = x * x / (s2 * s2) - 1.0 / s2;
      const double ayy = y * y / (s2 * s2) - 1.0 / s2;
      const double axy = x * y / (s2 * s2);
      return std::array<double, 4>{axx * axx * i, ayy * ayy * i, axy * axy * i, axx * ayy * i};
    };
    k.kappa1 = integrate_2d([&](double x, double y) { return moments(x, y)[0]; }, rule.half_width, rule.n);
    k.kappa1_y = integrate_2d([&](double x, double y) { return moments(x, y)[1]; }, rule.half_width, rule.n);
    k.kappa2 = integrate_2d([&](double x, double y) { return moments(x, y)[2]; }, rule.half_width, rule.n);
    k.kappa3 = integrate_2d([&](double x, double y) { return moments(x, y)[3]; }, rule.half_width, rule.n);
    return k;
  }

  // Sampled: 4th-order finite differences of I on the PSF's own grid.
  const ComplexGrid& g = *psf.grid();
  const std::size_t n = g.n;
  const double h = g.spacing();
  std::vector<cdouble> inten(n * n);
  for (std::size_t q = 0; q < n * n; ++q) inten[q] = std::norm(g.values[q]);
  const long ln = static_cast<long>(n);
  auto at = [&](long ix, long iy) -> double {
    if (ix < 0 || iy < 0 || ix >= ln || iy >= ln) return 0.0;
    return inten[static_cast<std::size_t>(iy * ln + ix)].real();
  };
  auto second = [&](long ix, long iy, long ux, long uy) {
    return (-at(ix - 2 * ux, iy - 2 * uy) + 16.0 * at(ix - ux, iy - uy) - 30.0 * at(ix, iy) +
            16.0 * at(ix + ux, iy + uy) - at(ix + 2 * ux, iy + 2 * uy)) /
           (12.0 * h * h);
  };
  const auto ix_grid = detail::central_difference(inten, n, h, 0);
  const auto ixy_grid = detail::central_difference(ix_grid, n, h, 1);
  std::vector<std::array<double, 4>> terms(n * n);
  for (long iy = 0; iy < ln; ++iy) {
    for (long ix = 0; ix < ln; ++ix) {
      const double i = at(ix, iy);
      auto& t = terms[static_cast<std::size_t>(iy * ln + ix)];
      if (i < 1e-300) {
        t = {0.0, 0.0, 0.0, 0.0};
        continue;
      }
      const double ixx = second(ix, iy, 1, 0);
      const double iyy = second(ix, iy, 0, 1);
      const double ixy = ixy_grid[static_cast<std::size_t>(iy * ln + ix)].real();
      t = {ixx * ixx / i, iyy * iyy / i, ixy * ixy / i, ixx * iyy / i};
    }
  }
  k.kappa1 = detail::grid_sum(n, h, [&](std::size_t q) { return cdouble(terms[q][0]); }).real();
  k.kappa1_y = detail::grid_sum(n, h, [&](std::size_t q) { return cdouble(terms[q][1]); }).real();
  k.kappa2 = detail::grid_sum(n, h, [&](std::size_t q) { return cdouble(terms[q][2]); }).real();
  k.kappa3 = detail::grid_sum(n, h, [&](std::size_t q) { return cdouble(terms[q][3]); }).real();
  return k;
}

/// Small-separation direct-imaging FI and its inverse diagonal.
struct DirectFI {
  FisherMatrix fi;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;
  double kappa1_y = 0.0;
  /// |d| <= 0.3 sigma_eff; an empirical threshold, not an error bound.
  bool expansion_valid = false;
  /// {J^-1}_11 and {J^-1}_22 of the expansion.
  double crb_dx = 0.0;
  double crb_dy = 0.0;
};

/// Second-order expansion of the direct-imaging FI:
///   J11 = N/16 (dX^2 kappa1 + dY^2 kappa2)
///   J22 = N/16 (dX^2 kappa2 + dY^2 kappa1_y)
///   J12 = N/16 dX dY (kappa2 + kappa3)
/// For a circular PSF kappa3 = kappa1 - 2 kappa2, so J12 = N/16 dX dY (kappa1 - kappa2)
/// and the inverse is
///   {J^-1}11 = (16/N) (dX^2 kappa2 + dY^2 kappa1) / ((dX^2 + dY^2)^2 kappa1 kappa2).
/// Throws DegenerateInverseError where the expansion has no inverse (d = 0).
inline DirectFI cfi_direct_small(const Psf& psf, const SourceConfig& cfg) {
  cfg.validate();
  const IntensityMoments k = intensity_moments(psf);
  const double dx = cfg.separation.x;
  const double dy = cfg.separation.y;
  const double c = cfg.photons() / 16.0;
  Eigen::Matrix2d m;
  m(0, 0) = c * (dx * dx * k.kappa1 + dy * dy * k.kappa2);
  m(1, 1) = c * (dx * dx * k.kappa2 + dy * dy * k.kappa1_y);
  m(0, 1) = m(1, 0) = c * dx * dy * (k.kappa2 + k.kappa3);

  DirectFI out{FisherMatrix(separation_labels(), m), k.kappa1, k.kappa2, k.kappa3, k.kappa1_y};
  out.expansion_valid = std::hypot(dx, dy) <= 0.3 * psf.rms_width();
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
  const double scale = std::max(m(0, 0) * m(1, 1), std::numeric_limits<double>::min());
  if ((dx == 0.0 && dy == 0.0) || !(det > 1e-12 * scale)) {
    throw DegenerateInverseError("cfi_direct_small: expansion is not invertible at this separation");
  }
  out.crb_dx = m(1, 1) / det;
  out.crb_dy = m(0, 0) / det;
  return out;
}

}  // namespace qloc
