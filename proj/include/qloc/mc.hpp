// SPDX-License-Identifier: Apache-2.0
//
// Conditioned Monte-Carlo MSE sweeps for the SLIVER and SPADE ML estimators.
//
// Run `r` at grid column `ix` (the index into grid_dx) draws from the stream
// (seed, ix << 32 | r). Every dY row of a column therefore reuses the same
// random numbers, so results for different dY are paired. Runs are summed in
// fixed blocks of kBlockRuns and blocks are combined in order, which makes the
// output independent of the number of worker threads.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qloc/psf.hpp"
#include "qloc/qbound.hpp"
#include "qloc/quadrature.hpp"
#include "qloc/rng.hpp"
#include "qloc/sliver.hpp"
#include "qloc/spade.hpp"

namespace qloc {

enum class Scheme { Sliver, Spade };

inline std::string to_string(Scheme s) { return s == Scheme::Sliver ? "sliver" : "spade"; }

inline Scheme parse_scheme(const std::string& s) {
  if (s == "sliver") return Scheme::Sliver;
  if (s == "spade") return Scheme::Spade;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected sliver or spade)");
}

struct MCConfig {
  Scheme scheme = Scheme::Sliver;
  double sigma = 1.0;
  /// Separations in the same length unit as sigma.
  std::vector<double> grid_dx;
  std::vector<double> grid_dy{0.0};
  std::uint64_t L = 100;
  std::uint64_t runs = 100000;
  std::uint64_t seed = 0;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned workers = 0;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("MCConfig: sigma must be positive");
    if (grid_dx.empty() || grid_dy.empty()) throw std::invalid_argument("MCConfig: grids must be non-empty");
    for (const auto* g : {&grid_dx, &grid_dy}) {
      for (double v : *g) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("MCConfig: grid values must be >= 0");
      }
    }
    if (L == 0) throw std::invalid_argument("MCConfig: L must be >= 1");
    if (runs == 0) throw std::invalid_argument("MCConfig: runs must be >= 1");
    if (runs > (std::uint64_t{1} << 32) || grid_dx.size() > (std::size_t{1} << 32)) {
      throw std::invalid_argument("MCConfig: runs and grid_dx size are limited to 2^32");
    }
  }
};

struct CrbReference {
  double crb_dx = 0.0;
  double crb_dy = 0.0;
  double qcrb = 0.0;
};

struct MCPoint {
  double dx = 0.0;
  double dy = 0.0;
  double mse_dx = 0.0;
  double mse_dy = 0.0;
  double bias_dx = 0.0;
  double bias_dy = 0.0;
  /// Standard error of mse_dx, mse_dy: sqrt(var(e^2) / runs).
  double stderr_dx = 0.0;
  double stderr_dy = 0.0;
  double crb_dx = 0.0;
  double crb_dy = 0.0;
  double qcrb = 0.0;
};

struct MCResult {
  MCConfig config;
  /// Row-major over (dy, dx): all of grid_dx for grid_dy[0] first.
  std::vector<MCPoint> points;
};

/// Classical bounds for L detected photons (the per-photon FI times L) and
/// the quantum bound 4 sigma^2 / L. A parameter carrying no information gets
/// +infinity.
inline CrbReference crb_reference(const MCConfig& cfg, Vec2 point) {
  const double L = static_cast<double>(cfg.L);
  CrbReference out;
  out.qcrb = 4.0 * cfg.sigma * cfg.sigma / L;
  FisherMatrix j;
  if (cfg.scheme == Scheme::Spade) {
    j = spade_fi(cfg.sigma, 1.0);
  } else {
    j = sliver_fi(Psf::gaussian(cfg.sigma), SourceConfig::equal(point, 1.0, 1));
  }
  const auto crb = crb_2x2(L * j);
  out.crb_dx = crb[0];
  out.crb_dy = crb[1];
  return out;
}

namespace detail {

inline constexpr std::uint64_t kBlockRuns = 1024;

/// Sums of e, e^2, e^4 for each component over one block of runs.
struct ErrorSums {
  double s1[2] = {0.0, 0.0};
  double s2[2] = {0.0, 0.0};
  double s4[2] = {0.0, 0.0};
};

inline ErrorSums run_block(const MCConfig& cfg, std::uint32_t column, Vec2 d, const SliverProbs& probs,
                           std::uint64_t first, std::uint64_t last) {
  ErrorSums acc;
  for (std::uint64_t run = first; run < last; ++run) {
    CounterRng rng(cfg.seed, CounterRng::stream_id(column, static_cast<std::uint32_t>(run)));
    Vec2 est;
    if (cfg.scheme == Scheme::Sliver) {
      est = sliver_ml(sliver_sample(probs, cfg.L, rng), cfg.sigma);
    } else {
      est = spade_ml(spade_sample(d, cfg.sigma, cfg.L, rng, false), cfg.sigma);
    }
    const double e[2] = {est.x - d.x, est.y - d.y};
    for (int c = 0; c < 2; ++c) {
      const double e2 = e[c] * e[c];
      acc.s1[c] += e[c];
      acc.s2[c] += e2;
      acc.s4[c] += e2 * e2;
    }
  }
  return acc;
}

}  // namespace detail

inline MCResult run_mc(const MCConfig& cfg) {
  cfg.validate();
  const std::size_t nx = cfg.grid_dx.size();
  const std::size_t npoints = nx * cfg.grid_dy.size();
  const std::uint64_t nblocks = (cfg.runs + detail::kBlockRuns - 1) / detail::kBlockRuns;

  std::vector<SliverProbs> probs(npoints);
  if (cfg.scheme == Scheme::Sliver) {
    const Psf psf = Psf::gaussian(cfg.sigma);
    for (std::size_t p = 0; p < npoints; ++p) {
      const Vec2 d{cfg.grid_dx[p % nx], cfg.grid_dy[p / nx]};
      probs[p] = sliver_probs(psf, SourceConfig::equal(d, 1.0, 1));
    }
  }

  const std::size_t ntasks = npoints * nblocks;
  std::vector<detail::ErrorSums> partial(ntasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t t = next++; t < ntasks; t = next++) {
        const std::size_t p = t / nblocks;
        const std::uint64_t b = t % nblocks;
        const Vec2 d{cfg.grid_dx[p % nx], cfg.grid_dy[p / nx]};
        const std::uint64_t first = b * detail::kBlockRuns;
        const std::uint64_t last = std::min(cfg.runs, first + detail::kBlockRuns);
        partial[t] = detail::run_block(cfg, static_cast<std::uint32_t>(p % nx), d, probs[p], first, last);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = ntasks;
    }
  };
  unsigned nworkers = cfg.workers != 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  nworkers = static_cast<unsigned>(std::min<std::size_t>(nworkers, ntasks));
  if (nworkers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (unsigned w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  MCResult result{cfg, {}};
  result.points.reserve(npoints);
  const double n = static_cast<double>(cfg.runs);
  for (std::size_t p = 0; p < npoints; ++p) {
    CompensatedSum<double> s1[2], s2[2], s4[2];
    for (std::uint64_t b = 0; b < nblocks; ++b) {
      const auto& part = partial[p * nblocks + b];
      for (int c = 0; c < 2; ++c) {
        s1[c].add(part.s1[c]);
        s2[c].add(part.s2[c]);
        s4[c].add(part.s4[c]);
      }
    }
    MCPoint pt;
    pt.dx = cfg.grid_dx[p % nx];
    pt.dy = cfg.grid_dy[p / nx];
    double mse[2], bias[2], se[2];
    for (int c = 0; c < 2; ++c) {
      mse[c] = s2[c].value() / n;
      bias[c] = s1[c].value() / n;
      const double var_e2 = cfg.runs > 1 ? std::max(0.0, (s4[c].value() - n * mse[c] * mse[c]) / (n - 1.0)) : 0.0;
      se[c] = std::sqrt(var_e2 / n);
    }
    pt.mse_dx = mse[0];
    pt.mse_dy = mse[1];
    pt.bias_dx = bias[0];
    pt.bias_dy = bias[1];
    pt.stderr_dx = se[0];
    pt.stderr_dy = se[1];
    const CrbReference ref = crb_reference(cfg, {pt.dx, pt.dy});
    pt.crb_dx = ref.crb_dx;
    pt.crb_dy = ref.crb_dy;
    pt.qcrb = ref.qcrb;
    result.points.push_back(pt);
  }
  return result;
}

}  // namespace qloc
