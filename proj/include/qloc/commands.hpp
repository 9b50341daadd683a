// SPDX-License-Identifier: Apache-2.0
//
// Table-producing sweeps behind the `qloc` command-line tool. Grid values are
// in units of the PSF width sigma (the RMS width for sampled PSFs).
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qloc/direct.hpp"
#include "qloc/errors.hpp"
#include "qloc/mc.hpp"
#include "qloc/psf.hpp"
#include "qloc/qbound.hpp"
#include "qloc/sliver.hpp"
#include "qloc/spade.hpp"
#include "qloc/table.hpp"

namespace qloc {

/// Bad command-line input (exit status 2), as opposed to a failure while
/// computing or writing results (exit status 1).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Command { Bounds, SliverFi, SpadeFi, Mc };

struct SweepSpec {
  Command command = Command::Bounds;
  /// `gaussian:sigma=<float>` or `file:<path>`.
  std::string psf = "gaussian:sigma=1";
  std::vector<double> grid_dx;
  std::vector<double> grid_dy{0.0};
  double eps_tot = 1.0;
  Scheme scheme = Scheme::Sliver;
  std::uint64_t L = 100;
  std::uint64_t runs = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

/// `start:stop:count` (count evenly spaced values, both ends included) or a
/// single number.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t begin = 0;
  for (std::size_t pos; (pos = text.find(':', begin)) != std::string::npos; begin = pos + 1) {
    parts.push_back(text.substr(begin, pos - begin));
  }
  parts.push_back(text.substr(begin));
  auto number = [&](const std::string& s) {
    try {
      return parse_number(s);
    } catch (const FormatError&) {
      throw UsageError("bad grid '" + text + "': expected start:stop:count");
    }
  };
  if (parts.size() == 1) return {number(parts[0])};
  if (parts.size() != 3) throw UsageError("bad grid '" + text + "': expected start:stop:count");
  const double start = number(parts[0]);
  const double stop = number(parts[1]);
  const double count = number(parts[2]);
  if (!(count >= 1.0) || count != std::floor(count) || count > 1e7) {
    throw UsageError("bad grid '" + text + "': count must be a positive integer");
  }
  const auto n = static_cast<std::size_t>(count);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  if (n > 1) out.back() = stop;
  return out;
}

inline Psf make_psf(const std::string& source) {
  const std::string gauss = "gaussian:sigma=";
  const std::string file = "file:";
  if (source.rfind(gauss, 0) == 0) {
    double sigma = 0.0;
    try {
      sigma = parse_number(source.substr(gauss.size()));
    } catch (const FormatError&) {
      throw UsageError("bad --psf '" + source + "'");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("--psf sigma must be positive");
    return Psf::gaussian(sigma);
  }
  if (source.rfind(file, 0) == 0 && source.size() > file.size()) return load_psf_csv(source.substr(file.size()));
  throw UsageError("bad --psf '" + source + "': expected gaussian:sigma=<float> or file:<path>");
}

namespace detail {

inline void require_grids(const SweepSpec& spec) {
  if (spec.grid_dx.empty() || spec.grid_dy.empty()) throw UsageError("grids must be non-empty");
  for (const auto* g : {&spec.grid_dx, &spec.grid_dy}) {
    for (double v : *g) {
      if (!std::isfinite(v)) throw UsageError("grid values must be finite");
    }
  }
}

inline void require_positive_eps(const SweepSpec& spec) {
  if (!(spec.eps_tot > 0.0 && spec.eps_tot <= 1.0)) throw UsageError("--eps-tot must be in (0, 1]");
}

inline Table table_head(const SweepSpec& spec, const std::string& command, const Psf& psf) {
  Table t;
  t.meta["command"] = command;
  t.meta["psf"] = spec.psf;
  t.meta["sigma"] = format_number(psf.sigma());
  return t;
}

}  // namespace detail

/// Variance bounds on dX, normalized by the quantum limit 4 sigma^2 / N:
/// the quantum bound, the direct-imaging bound from the small-separation
/// expansion, and the direct-imaging bound from the exact information.
inline Table cmd_bounds(const SweepSpec& spec) {
  detail::require_grids(spec);
  detail::require_positive_eps(spec);
  const Psf psf = make_psf(spec.psf);
  const double s = psf.sigma();
  Table t = detail::table_head(spec, "bounds", psf);
  t.meta["eps_tot"] = format_number(spec.eps_tot);
  t.meta["normalization"] = "variance bounds on dX divided by 4 sigma^2 / N";
  t.columns = {"dx_sigma", "dy_sigma", "qcrb_norm", "direct_crb_norm", "direct_crb_exact_norm"};
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (double dy : spec.grid_dy) {
    for (double dx : spec.grid_dx) {
      const SourceConfig cfg = SourceConfig::equal({dx * s, dy * s}, spec.eps_tot, 1);
      const double unit = 4.0 * s * s / cfg.photons();
      const double q = separation_bounds(qfi(cfg, psf))[0];
      double expansion = inf;
      try {
        expansion = cfi_direct_small(psf, cfg).crb_dx;
      } catch (const DegenerateInverseError&) {
      }
      const double exact = crb_2x2(cfi_direct(psf, cfg))[0];
      t.rows.push_back({dx, dy, q / unit, expansion / unit, exact / unit});
    }
  }
  return t;
}

/// SLIVER information normalized by eps_tot Delta k^2 (per axis).
inline Table cmd_sliver_fi(const SweepSpec& spec) {
  detail::require_grids(spec);
  detail::require_positive_eps(spec);
  const Psf psf = make_psf(spec.psf);
  const double s = psf.sigma();
  const PsfFunctionals f0 = functionals(psf, 0.0, 0.0);
  Table t = detail::table_head(spec, "sliver-fi", psf);
  t.meta["eps_tot"] = format_number(spec.eps_tot);
  t.meta["normalization"] = "J11 / (eps_tot dkx2), J22 / (eps_tot dky2), J12 / (eps_tot sqrt(dkx2 dky2))";
  t.columns = {"dx_sigma", "dy_sigma", "j11_norm", "j22_norm", "j12_norm"};
  for (double dy : spec.grid_dy) {
    for (double dx : spec.grid_dx) {
      const FisherMatrix j = sliver_fi(psf, SourceConfig::equal({dx * s, dy * s}, spec.eps_tot, 1));
      const double e = spec.eps_tot;
      t.rows.push_back({dx, dy, j(0, 0) / (e * f0.dkx2), j(1, 1) / (e * f0.dky2),
                        j(0, 1) / (e * std::sqrt(f0.dkx2 * f0.dky2))});
    }
  }
  return t;
}

inline double require_gaussian_sigma(const Psf& psf, const std::string& what) {
  if (!psf.is_gaussian()) throw UsageError(what + " is defined for the Gaussian PSF only");
  return psf.sigma();
}

/// SPADE information normalized by eps_tot / 4 sigma^2.
inline Table cmd_spade_fi(const SweepSpec& spec) {
  detail::require_grids(spec);
  detail::require_positive_eps(spec);
  const Psf psf = make_psf(spec.psf);
  const double s = require_gaussian_sigma(psf, "spade-fi");
  Table t = detail::table_head(spec, "spade-fi", psf);
  t.meta["eps_tot"] = format_number(spec.eps_tot);
  t.meta["normalization"] = "J / (eps_tot / 4 sigma^2)";
  t.columns = {"dx_sigma", "dy_sigma", "j11_norm", "j22_norm", "j12_norm"};
  const double unit = spec.eps_tot / (4.0 * s * s);
  const FisherMatrix j = spade_fi(s, spec.eps_tot);
  for (double dy : spec.grid_dy) {
    for (double dx : spec.grid_dx) t.rows.push_back({dx, dy, j(0, 0) / unit, j(1, 1) / unit, j(0, 1) / unit});
  }
  return t;
}

inline MCConfig mc_config(const SweepSpec& spec, double sigma) {
  MCConfig cfg;
  cfg.scheme = spec.scheme;
  cfg.sigma = sigma;
  for (double v : spec.grid_dx) cfg.grid_dx.push_back(v * sigma);
  cfg.grid_dy.clear();
  for (double v : spec.grid_dy) cfg.grid_dy.push_back(v * sigma);
  cfg.L = spec.L;
  cfg.runs = spec.runs;
  cfg.seed = spec.seed;
  cfg.workers = spec.workers;
  return cfg;
}

/// Monte-Carlo MSE of the ML estimators. Lengths are in units of sigma;
/// *_norm columns are divided by 4 sigma^2 / L.
inline Table cmd_mc(const SweepSpec& spec) {
  detail::require_grids(spec);
  const Psf psf = make_psf(spec.psf);
  const double s = require_gaussian_sigma(psf, "mc");
  const MCConfig cfg = mc_config(spec, s);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const MCResult res = run_mc(cfg);
  Table t = detail::table_head(spec, "mc", psf);
  t.meta["scheme"] = to_string(spec.scheme);
  t.meta["L"] = std::to_string(spec.L);
  t.meta["runs"] = std::to_string(spec.runs);
  t.meta["seed"] = std::to_string(spec.seed);
  t.meta["normalization"] = "dx_sigma, dy_sigma, bias_* in units of sigma; mse_*, stderr_*, crb_*, qcrb in "
                            "units of sigma^2; *_norm divided by 4 sigma^2 / L";
  t.columns = {"dx_sigma",    "dy_sigma",    "mse_dx",      "mse_dy",      "bias_dx", "bias_dy",
               "stderr_dx",   "stderr_dy",   "crb_dx",      "crb_dy",      "qcrb",    "mse_dx_norm",
               "mse_dy_norm", "crb_dx_norm", "crb_dy_norm", "L",           "runs"};
  const double s2 = s * s;
  const double unit = 4.0 * s2 / static_cast<double>(spec.L);
  for (const auto& p : res.points) {
    t.rows.push_back({p.dx / s, p.dy / s, p.mse_dx / s2, p.mse_dy / s2, p.bias_dx / s, p.bias_dy / s,
                      p.stderr_dx / s2, p.stderr_dy / s2, p.crb_dx / s2, p.crb_dy / s2, p.qcrb / s2,
                      p.mse_dx / unit, p.mse_dy / unit, p.crb_dx / unit, p.crb_dy / unit,
                      static_cast<double>(spec.L), static_cast<double>(spec.runs)});
  }
  return t;
}

inline Table run_command(const SweepSpec& spec) {
  switch (spec.command) {
    case Command::Bounds:
      return cmd_bounds(spec);
    case Command::SliverFi:
      return cmd_sliver_fi(spec);
    case Command::SpadeFi:
      return cmd_spade_fi(spec);
    case Command::Mc:
      return cmd_mc(spec);
  }
  throw std::logic_error("run_command: unknown command");
}

}  // namespace qloc
