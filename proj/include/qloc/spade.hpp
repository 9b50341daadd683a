// SPDX-License-Identifier: Apache-2.0
//
// Hermite-Gaussian mode sorting for the circular Gaussian PSF. A photon from
// either source lands in mode (q, r) with probability
// exp(-Q - R) Q^q R^r / (q! r!), Q = dX^2 / 16 sigma^2, R = dY^2 / 16 sigma^2.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qloc/fisher.hpp"
#include "qloc/qbound.hpp"
#include "qloc/rng.hpp"

namespace qloc {

struct SpadeRecord {
  /// Mode indices (q_l, r_l) of each detected photon; empty when the sampler
  /// was asked for totals only.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> modes;
  std::uint64_t hx = 0;
  std::uint64_t hy = 0;
  std::uint64_t L = 0;
};

namespace detail {

inline void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be finite and positive");
}

/// Mean mode index along one axis, (d / 4 sigma)^2.
inline double spade_mean(double d, double sigma) {
  const double t = d / (4.0 * sigma);
  return t * t;
}

inline double log_poisson(std::uint64_t k, double mean) {
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -mean + static_cast<double>(k) * std::log(mean) - log_factorial(k);
}

}  // namespace detail

/// eps_tot Poisson(q; Q) Poisson(r; R), evaluated in log space.
inline double spade_prob(std::uint64_t q, std::uint64_t r, Vec2 d, double sigma, double eps_tot) {
  detail::require_sigma(sigma);
  if (eps_tot == 0.0) return 0.0;
  const double lp = detail::log_poisson(q, detail::spade_mean(d.x, sigma)) +
                    detail::log_poisson(r, detail::spade_mean(d.y, sigma));
  return eps_tot * std::exp(lp);
}

/// diag(eps_tot / 4 sigma^2, eps_tot / 4 sigma^2) for every separation.
inline FisherMatrix spade_fi(double sigma, double eps_tot) {
  detail::require_sigma(sigma);
  const double v = eps_tot / (4.0 * sigma * sigma);
  return {separation_labels(), Eigen::Matrix2d{{v, 0.0}, {0.0, v}}};
}

/// L independent photons, q ~ Poisson(Q) and r ~ Poisson(R). The q and r
/// draws come from two child streams split off `rng`, so the q sequence for a
/// given generator state does not depend on dY (and r not on dX).
inline SpadeRecord spade_sample(Vec2 d, double sigma, std::uint64_t L, CounterRng& rng, bool keep_modes = true) {
  detail::require_sigma(sigma);
  if (L == 0) throw std::invalid_argument("spade_sample: L must be >= 1");
  const PoissonSampler draw_q(detail::spade_mean(d.x, sigma));
  const PoissonSampler draw_r(detail::spade_mean(d.y, sigma));
  CounterRng rng_q = rng.split();
  CounterRng rng_r = rng.split();
  SpadeRecord rec;
  rec.L = L;
  if (keep_modes) rec.modes.reserve(L);
  for (std::uint64_t l = 0; l < L; ++l) {
    const std::uint64_t q = draw_q(rng_q);
    const std::uint64_t r = draw_r(rng_r);
    rec.hx += q;
    rec.hy += r;
    if (keep_modes) rec.modes.emplace_back(static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(r));
  }
  return rec;
}

/// (4 sigma sqrt(H_X / L), 4 sigma sqrt(H_Y / L)).
inline Vec2 spade_ml(const SpadeRecord& rec, double sigma) {
  if (rec.L == 0) throw std::invalid_argument("spade_ml: L must be >= 1");
  const double L = static_cast<double>(rec.L);
  return {4.0 * sigma * std::sqrt(static_cast<double>(rec.hx) / L),
          4.0 * sigma * std::sqrt(static_cast<double>(rec.hy) / L)};
}

}  // namespace qloc
