// SPDX-License-Identifier: Apache-2.0
//
// Two-stage image-inversion interferometer: the field is split into its
// antisymmetric part about the y axis (port 1) and the symmetric remainder,
// which is split again about the x axis into antisymmetric (port 2) and
// symmetric (port 3) parts, each ending on a bucket detector.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "qloc/errors.hpp"
#include "qloc/fisher.hpp"
#include "qloc/psf.hpp"
#include "qloc/qbound.hpp"
#include "qloc/rng.hpp"

namespace qloc {

/// Per-shot outcome probabilities: no click, then a click on port 1, 2 or 3.
struct SliverProbs {
  double p0 = 1.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;

  [[nodiscard]] double click_mass() const { return p1 + p2 + p3; }
};

/// Click totals over L postselected (one-photon) shots.
struct SliverRecord {
  std::uint64_t g1 = 0;
  std::uint64_t g2 = 0;
  std::uint64_t g3 = 0;
  std::uint64_t L = 0;

  [[nodiscard]] bool consistent() const { return g1 + g2 + g3 == L; }
};

namespace detail {

inline void require_sliver_geometry(const Psf& psf, const SourceConfig& cfg) {
  if (!psf.reflection_symmetric()) {
    throw SymmetryError("SLIVER needs a PSF symmetric under reflection about both axes");
  }
  if (cfg.centroid.x != 0.0 || cfg.centroid.y != 0.0) {
    throw std::invalid_argument("SLIVER model assumes the centroid is aligned with the optical axis");
  }
}

inline SliverProbs sliver_probs_from(double eps_tot, double delta, double delta_x, double delta_y) {
  SliverProbs p;
  p.p1 = std::max(0.0, 0.5 * eps_tot * (1.0 - delta_x));
  p.p2 = std::max(0.0, 0.25 * eps_tot * (1.0 + delta_x - delta_y - delta));
  p.p3 = std::max(0.0, 0.25 * eps_tot * (1.0 + delta_x + delta_y + delta));
  p.p0 = 1.0 - eps_tot;
  return p;
}

/// num / den, or 0 when the outcome probability (den) vanishes.
inline double guarded_ratio(double num, double den) { return den > 1e-15 ? num / den : 0.0; }

/// u / (e^u - 1), tending to 1 at u = 0.
inline double u_over_expm1(double u) { return u == 0.0 ? 1.0 : u / std::expm1(u); }

}  // namespace detail

/// Outcome probabilities
///   P(1) = eps/2 (1 - delta_x)
///   P(2) = eps/4 (1 + delta_x - delta_y - delta)
///   P(3) = eps/4 (1 + delta_x + delta_y + delta),  P(0) = 1 - eps.
/// Valid for unequal strengths: with the centroid on axis each source
/// contributes the same overlaps, so only eps_tot = eps1 + eps2 enters.
inline SliverProbs sliver_probs(const Psf& psf, const SourceConfig& cfg) {
  cfg.validate();
  detail::require_sliver_geometry(psf, cfg);
  const double dx = cfg.separation.x;
  const double dy = cfg.separation.y;
  return detail::sliver_probs_from(cfg.eps_tot(), overlap_delta(psf, dx, dy).real(),
                                   overlap_delta(psf, dx, 0.0).real(), overlap_delta(psf, 0.0, dy).real());
}

enum class SliverFiPath {
  Auto,     ///< closed form for the Gaussian, general expression otherwise
  General,  ///< always the general expression in terms of overlaps and their gradients
};

/// Classical FI of the three click outcomes for (dX, dY).
///
/// General path: with A = 1 - delta_x, B = 1 + delta_x - delta_y - delta,
/// C = 1 + delta_x + delta_y + delta and primes denoting d/d(dX) or d/d(dY),
///   J11 = eps/2 delta_x'^2 / A + eps/4 (delta_x' - delta')^2 / B + eps/4 (delta_x' + delta')^2 / C
///   J22 = eps/4 (delta_y' + delta')^2 (1/B + 1/C)
///   J12 = eps/4 (delta_y' + delta') [(delta_x' + delta')/C - (delta_x' - delta')/B]
/// Terms whose outcome probability vanishes (denominator <= 1e-15) are dropped.
///
/// Gaussian path: J11 = eps delta_x'^2 / (1 - delta_x^2),
/// J22 = eps (1 + delta_x)/2 delta_y'^2 / (1 - delta_y^2), J12 = 0, evaluated
/// without cancellation. Both paths give zero information for a component
/// that is exactly zero.
inline FisherMatrix sliver_fi(const Psf& psf, const SourceConfig& cfg, SliverFiPath path = SliverFiPath::Auto) {
  cfg.validate();
  detail::require_sliver_geometry(psf, cfg);
  const double eps = cfg.eps_tot();
  const double dx = cfg.separation.x;
  const double dy = cfg.separation.y;
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();

  if (path == SliverFiPath::Auto && psf.is_gaussian()) {
    const double s2 = psf.sigma() * psf.sigma();
    const double ux = dx * dx / (4.0 * s2);
    const double uy = dy * dy / (4.0 * s2);
    const double delta_x = std::exp(-0.5 * ux);
    // delta_x'^2 / (1 - delta_x^2) = (1 / 4 s^2) u / (e^u - 1)
    if (dx != 0.0) m(0, 0) = eps / (4.0 * s2) * detail::u_over_expm1(ux);
    if (dy != 0.0) m(1, 1) = eps * 0.5 * (1.0 + delta_x) / (4.0 * s2) * detail::u_over_expm1(uy);
    return {separation_labels(), m};
  }

  const double delta = overlap_delta(psf, dx, dy).real();
  const double delta_x = overlap_delta(psf, dx, 0.0).real();
  const double delta_y = overlap_delta(psf, 0.0, dy).real();
  const auto [g_x, g_y] = overlap_gamma(psf, dx, dy);
  const double ddelta_dx = g_x.real();
  const double ddelta_dy = g_y.real();
  const double ddx = overlap_gamma(psf, dx, 0.0).first.real();
  const double ddy = overlap_gamma(psf, 0.0, dy).second.real();

  const double a = 1.0 - delta_x;
  const double b = 1.0 + delta_x - delta_y - delta;
  const double c = 1.0 + delta_x + delta_y + delta;
  const double minus_x = ddx - ddelta_dx;
  const double plus_x = ddx + ddelta_dx;
  const double plus_y = ddy + ddelta_dy;
  using detail::guarded_ratio;
  m(0, 0) = 0.5 * eps * guarded_ratio(ddx * ddx, a) + 0.25 * eps * guarded_ratio(minus_x * minus_x, b) +
            0.25 * eps * guarded_ratio(plus_x * plus_x, c);
  m(1, 1) = 0.25 * eps * (guarded_ratio(plus_y * plus_y, b) + guarded_ratio(plus_y * plus_y, c));
  m(0, 1) = m(1, 0) = 0.25 * eps * (guarded_ratio(plus_x * plus_y, c) - guarded_ratio(minus_x * plus_y, b));
  return {separation_labels(), m};
}

/// Draws L one-photon outcomes from (p1, p2, p3) / (p1 + p2 + p3) by inverse CDF.
inline SliverRecord sliver_sample(const SliverProbs& probs, std::uint64_t L, CounterRng& rng) {
  if (L == 0) throw std::invalid_argument("sliver_sample: L must be >= 1");
  const double mass = probs.click_mass();
  if (!(mass > 0.0)) throw ZeroMassError("sliver_sample: no click probability to condition on");
  const double c1 = probs.p1 / mass;
  const double c12 = (probs.p1 + probs.p2) / mass;
  const bool only1 = probs.p2 == 0.0 && probs.p3 == 0.0;
  const bool no3 = probs.p3 == 0.0;
  SliverRecord rec{0, 0, 0, L};
  for (std::uint64_t l = 0; l < L; ++l) {
    const double u = rng.uniform();
    if (u < c1 || only1) {
      ++rec.g1;
    } else if (u < c12 || no3) {
      ++rec.g2;
    } else {
      ++rec.g3;
    }
  }
  return rec;
}

/// Maximum-likelihood separation estimates for the circular Gaussian PSF:
///   dX = 2 sigma sqrt(-2 ln(1 - 2 G1 / L))            if 2 G1 / L < 1, else 2 sigma
///   dY = 2 sigma sqrt(-2 ln(1 - 2 G2 / (L - G1)))     if that ratio < 1, else 2 sigma
/// The fallback 2 sigma is an arbitrary value for the rare records where the
/// likelihood has no interior maximum (including L = G1).
inline Vec2 sliver_ml(const SliverRecord& rec, double sigma) {
  if (rec.L == 0 || !rec.consistent()) throw std::invalid_argument("sliver_ml: inconsistent record");
  const double L = static_cast<double>(rec.L);
  Vec2 est{2.0 * sigma, 2.0 * sigma};
  const double fx = 2.0 * static_cast<double>(rec.g1) / L;
  if (fx < 1.0) est.x = 2.0 * sigma * std::sqrt(-2.0 * std::log1p(-fx));
  const std::uint64_t rest = rec.L - rec.g1;
  if (rest > 0) {
    const double fy = 2.0 * static_cast<double>(rec.g2) / static_cast<double>(rest);
    if (fy < 1.0) est.y = 2.0 * sigma * std::sqrt(-2.0 * std::log1p(-fy));
  }
  return est;
}

}  // namespace qloc
