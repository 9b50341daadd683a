// SPDX-License-Identifier: Apache-2.0
//
// Point-spread functions and the overlap/derivative functionals that feed the
// Fisher-information formulas.
//
// Two kinds are supported: the circular Gaussian (closed form everywhere) and
// a complex amplitude sampled on a square tensor grid centred at the origin.
// Sampled PSFs are interpolated with separable 4-point cubic Lagrange stencils
// and differentiated with 4th-order central differences on the grid; values
// outside the grid are zero.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qloc/errors.hpp"
#include "qloc/quadrature.hpp"

namespace qloc {

using cdouble = std::complex<double>;

/// Samples of a complex amplitude on [-half_width, half_width]^2, row-major
/// with y as the outer index.
struct ComplexGrid {
  double half_width = 0.0;
  std::size_t n = 0;
  std::vector<cdouble> values;

  [[nodiscard]] double spacing() const { return 2.0 * half_width / static_cast<double>(n - 1); }
  [[nodiscard]] double coord(std::size_t i) const {
    return -half_width + spacing() * static_cast<double>(i);
  }
  [[nodiscard]] const cdouble& at(std::size_t ix, std::size_t iy) const { return values[iy * n + ix]; }
  [[nodiscard]] cdouble& at(std::size_t ix, std::size_t iy) { return values[iy * n + ix]; }
};

/// Trapezoidal rule parameters for integrals over the image plane.
struct QuadratureRule {
  double half_width = 8.0;
  std::size_t n = 513;
};

inline constexpr std::size_t kDefaultQuadraturePoints = 513;
inline constexpr double kSymmetryTolerance = 1e-8;
inline constexpr double kNormRejectTolerance = 1e-3;
/// Absolute disagreement allowed between the h and 2h trapezoid sums of a
/// sampled overlap before the grid is declared too coarse.
inline constexpr double kConvergenceTolerance = 1e-7;

namespace detail {

/// Weights of the 4-point cubic Lagrange stencil {-1, 0, 1, 2} at fraction f.
inline std::array<double, 4> cubic_weights(double f) {
  return {-f * (f - 1.0) * (f - 2.0) / 6.0, (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
          -(f + 1.0) * f * (f - 2.0) / 2.0, (f + 1.0) * f * (f - 1.0) / 6.0};
}

/// Value of g at (x - shift) along one axis for all nodes, zero outside.
/// `stride` selects rows (1) or columns (n).
inline void shift_line(const cdouble* src, cdouble* dst, std::size_t n, std::size_t stride,
                       long base, const std::array<double, 4>& w) {
  const long ln = static_cast<long>(n);
  for (long i = 0; i < ln; ++i) {
    cdouble acc = 0.0;
    for (long k = 0; k < 4; ++k) {
      const long j = i - base + k - 1;
      if (j >= 0 && j < ln) acc += w[static_cast<std::size_t>(k)] * src[static_cast<std::size_t>(j) * stride];
    }
    dst[static_cast<std::size_t>(i) * stride] = acc;
  }
}

/// Grid of g(x_i - sx, y_j - sy) by separable cubic interpolation.
inline std::vector<cdouble> shifted(const std::vector<cdouble>& g, std::size_t n, double h, double sx,
                                    double sy) {
  // x_i - sx = x_{i - sx/h}; write sx/h = base + frac with frac in [0, 1) so the
  // stencil for node i is i - base - 1 .. i - base + 2 evaluated at 1 - frac.
  auto split = [h](double s) {
    const double t = -s / h;
    const double fl = std::floor(t);
    return std::pair<long, double>{-static_cast<long>(fl), t - fl};
  };
  const auto [bx, fx] = split(sx);
  const auto [by, fy] = split(sy);
  const auto wx = cubic_weights(fx);
  const auto wy = cubic_weights(fy);
  std::vector<cdouble> tmp(g.size());
  std::vector<cdouble> out(g.size());
  for (std::size_t row = 0; row < n; ++row) {
    shift_line(g.data() + row * n, tmp.data() + row * n, n, 1, bx, wx);
  }
  for (std::size_t col = 0; col < n; ++col) {
    shift_line(tmp.data() + col, out.data() + col, n, n, by, wy);
  }
  return out;
}

/// 4th-order central difference along x (axis 0) or y (axis 1), zero padded.
inline std::vector<cdouble> central_difference(const std::vector<cdouble>& g, std::size_t n, double h,
                                               int axis) {
  std::vector<cdouble> d(g.size());
  const long ln = static_cast<long>(n);
  auto get = [&](long ix, long iy) -> cdouble {
    if (ix < 0 || iy < 0 || ix >= ln || iy >= ln) return 0.0;
    return g[static_cast<std::size_t>(iy * ln + ix)];
  };
  for (long iy = 0; iy < ln; ++iy) {
    for (long ix = 0; ix < ln; ++ix) {
      const long ux = axis == 0 ? 1 : 0;
      const long uy = axis == 0 ? 0 : 1;
      d[static_cast<std::size_t>(iy * ln + ix)] =
          (get(ix - 2 * ux, iy - 2 * uy) - 8.0 * get(ix - ux, iy - uy) + 8.0 * get(ix + ux, iy + uy) -
           get(ix + 2 * ux, iy + 2 * uy)) /
          (12.0 * h);
    }
  }
  return d;
}

/// Trapezoid sum of f(i) over the grid nodes, optionally on the even-index subgrid.
template <class F>
cdouble grid_sum(std::size_t n, double h, F&& f, bool even_only = false) {
  const std::size_t step = even_only ? 2 : 1;
  const std::size_t last = even_only ? (n - 1) / 2 * 2 : n - 1;
  CompensatedSum<cdouble> total;
  for (std::size_t iy = 0; iy <= last; iy += step) {
    CompensatedSum<cdouble> row;
    const double wy = (iy == 0 || iy == last) ? 0.5 : 1.0;
    for (std::size_t ix = 0; ix <= last; ix += step) {
      const double wx = (ix == 0 || ix == last) ? 0.5 : 1.0;
      row.add(wx * f(iy * n + ix));
    }
    total.add(wy * row.value());
  }
  const double hh = h * static_cast<double>(step);
  return total.value() * (hh * hh);
}

}  // namespace detail

/// Inversion-symmetric point-spread function. Immutable; cheap to copy.
class Psf {
 public:
  static Psf gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw std::invalid_argument("gaussian PSF needs a positive finite sigma");
    }
    Psf p;
    p.kind_ = Gaussian{sigma};
    return p;
  }

  /// Wraps a sampled amplitude. Rejects grids whose norm is off by more than
  /// 1e-3 and renormalizes the rest.
  static Psf sampled(ComplexGrid grid) {
    if (grid.n < 5) throw std::invalid_argument("sampled PSF needs at least 5 points per axis");
    if (grid.values.size() != grid.n * grid.n) {
      throw std::invalid_argument("sampled PSF: value count does not match n*n");
    }
    if (!(grid.half_width > 0.0)) throw std::invalid_argument("sampled PSF: half_width must be positive");

    const double h = grid.spacing();
    const double norm =
        detail::grid_sum(grid.n, h, [&](std::size_t k) { return cdouble(std::norm(grid.values[k])); }).real();
    if (!(std::abs(norm - 1.0) <= kNormRejectTolerance)) {
      std::ostringstream msg;
      msg << "sampled PSF is not normalized: integral of |psi|^2 = " << norm;
      throw ToleranceError(msg.str());
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& v : grid.values) v *= scale;

    auto s = std::make_shared<SampledData>();
    s->dx = detail::central_difference(grid.values, grid.n, h, 0);
    s->dy = detail::central_difference(grid.values, grid.n, h, 1);

    double peak = 0.0;
    for (const auto& v : grid.values) peak = std::max(peak, std::abs(v));
    double inv_err = 0.0;
    double refl_err = 0.0;
    double mx2 = 0.0, my2 = 0.0;
    const std::size_t n = grid.n;
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        const cdouble v = grid.at(ix, iy);
        inv_err = std::max(inv_err, std::abs(v - grid.at(n - 1 - ix, n - 1 - iy)));
        refl_err = std::max(refl_err, std::abs(v - grid.at(ix, n - 1 - iy)));
      }
    }
    const cdouble m2 = detail::grid_sum(n, h, [&](std::size_t k) {
      const double x = grid.coord(k % n);
      const double y = grid.coord(k / n);
      return cdouble(x * x * std::norm(grid.values[k]), y * y * std::norm(grid.values[k]));
    });
    mx2 = m2.real();
    my2 = m2.imag();
    s->inversion_symmetric = inv_err <= kSymmetryTolerance * peak;
    s->reflection_symmetric = s->inversion_symmetric && refl_err <= kSymmetryTolerance * peak;
    s->rms_width = std::sqrt(std::max(mx2, my2));
    s->grid = std::move(grid);

    Psf p;
    p.kind_ = std::shared_ptr<const SampledData>(std::move(s));
    return p;
  }

  [[nodiscard]] bool is_gaussian() const { return std::holds_alternative<Gaussian>(kind_); }

  /// Gaussian width parameter; for sampled PSFs the RMS width of |psi|^2.
  [[nodiscard]] double sigma() const {
    if (const auto* g = std::get_if<Gaussian>(&kind_)) return g->sigma;
    return sampled_data().rms_width;
  }

  /// RMS width of the intensity along the wider axis.
  [[nodiscard]] double rms_width() const { return sigma(); }

  [[nodiscard]] const ComplexGrid* grid() const {
    if (is_gaussian()) return nullptr;
    return &sampled_data().grid;
  }

  [[nodiscard]] bool inversion_symmetric() const {
    return is_gaussian() || sampled_data().inversion_symmetric;
  }
  /// psi(x, y) = psi(x, -y) = psi(-x, -y).
  [[nodiscard]] bool reflection_symmetric() const {
    return is_gaussian() || sampled_data().reflection_symmetric;
  }

  [[nodiscard]] cdouble value(double x, double y) const {
    if (const auto* g = std::get_if<Gaussian>(&kind_)) {
      const double s2 = g->sigma * g->sigma;
      return std::sqrt(1.0 / (2.0 * std::numbers::pi * s2)) * std::exp(-(x * x + y * y) / (4.0 * s2));
    }
    const auto& s = sampled_data();
    return interpolate(s.grid.values, x, y);
  }

  /// d psi / dx
  [[nodiscard]] cdouble deriv_x(double x, double y) const {
    if (const auto* g = std::get_if<Gaussian>(&kind_)) {
      return value(x, y) * (-x / (2.0 * g->sigma * g->sigma));
    }
    return interpolate(sampled_data().dx, x, y);
  }

  /// d psi / dy
  [[nodiscard]] cdouble deriv_y(double x, double y) const {
    if (const auto* g = std::get_if<Gaussian>(&kind_)) {
      return value(x, y) * (-y / (2.0 * g->sigma * g->sigma));
    }
    return interpolate(sampled_data().dy, x, y);
  }

  /// Default trapezoid rule for integrals involving two copies of the PSF
  /// displaced by (dx, dy): W = 8 sigma_eff + max(|dx|, |dy|) / 2.
  [[nodiscard]] QuadratureRule default_rule(double dx = 0.0, double dy = 0.0) const {
    return {8.0 * rms_width() + 0.5 * std::max(std::abs(dx), std::abs(dy)), kDefaultQuadraturePoints};
  }

  // Grid-native views used by the functionals below.
  [[nodiscard]] const std::vector<cdouble>& grid_dx() const { return sampled_data().dx; }
  [[nodiscard]] const std::vector<cdouble>& grid_dy() const { return sampled_data().dy; }

 private:
  struct Gaussian {
    double sigma;
  };
  struct SampledData {
    ComplexGrid grid;
    std::vector<cdouble> dx, dy;
    double rms_width = 0.0;
    bool inversion_symmetric = false;
    bool reflection_symmetric = false;
  };

  Psf() = default;

  [[nodiscard]] const SampledData& sampled_data() const {
    return *std::get<std::shared_ptr<const SampledData>>(kind_);
  }

  [[nodiscard]] cdouble interpolate(const std::vector<cdouble>& g, double x, double y) const {
    const auto& grid = sampled_data().grid;
    const double w = grid.half_width;
    if (!(std::abs(x) <= w && std::abs(y) <= w)) return 0.0;
    const double h = grid.spacing();
    const long n = static_cast<long>(grid.n);
    const double tx = (x + w) / h;
    const double ty = (y + w) / h;
    const long ix = std::min(static_cast<long>(std::floor(tx)), n - 1);
    const long iy = std::min(static_cast<long>(std::floor(ty)), n - 1);
    const auto wx = detail::cubic_weights(tx - static_cast<double>(ix));
    const auto wy = detail::cubic_weights(ty - static_cast<double>(iy));
    cdouble acc = 0.0;
    for (long ky = 0; ky < 4; ++ky) {
      const long jy = iy + ky - 1;
      if (jy < 0 || jy >= n) continue;
      cdouble row = 0.0;
      for (long kx = 0; kx < 4; ++kx) {
        const long jx = ix + kx - 1;
        if (jx < 0 || jx >= n) continue;
        row += wx[static_cast<std::size_t>(kx)] * g[static_cast<std::size_t>(jy * n + jx)];
      }
      acc += wy[static_cast<std::size_t>(ky)] * row;
    }
    return acc;
  }

  std::variant<Gaussian, std::shared_ptr<const SampledData>> kind_;
};

/// Point evaluation of the amplitude.
inline cdouble eval(const Psf& psf, double x, double y) { return psf.value(x, y); }

/// Samples the circular Gaussian on a grid, e.g. to exercise the sampled code paths.
inline ComplexGrid sample_gaussian(double sigma, double half_width, std::size_t n) {
  const Psf g = Psf::gaussian(sigma);
  ComplexGrid grid{half_width, n, std::vector<cdouble>(n * n)};
  for (std::size_t iy = 0; iy < n; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) grid.at(ix, iy) = g.value(grid.coord(ix), grid.coord(iy));
  }
  return grid;
}

/// Default sampling of a Gaussian: [-8 sigma, 8 sigma]^2 with 513 points per axis.
inline Psf sampled_gaussian(double sigma, std::size_t n = kDefaultQuadraturePoints) {
  return Psf::sampled(sample_gaussian(sigma, 8.0 * sigma, n));
}

/// <psi_1|psi_2> = integral of psi*(x, y) psi(x - dx, y - dy).
inline cdouble overlap_delta(const Psf& psf, double dx, double dy) {
  if (psf.is_gaussian()) {
    const double s2 = psf.sigma() * psf.sigma();
    return std::exp(-(dx * dx + dy * dy) / (8.0 * s2));
  }
  const ComplexGrid& g = *psf.grid();
  const double h = g.spacing();
  const auto moved = detail::shifted(g.values, g.n, h, dx, dy);
  auto integrand = [&](std::size_t k) { return std::conj(g.values[k]) * moved[k]; };
  const cdouble fine = detail::grid_sum(g.n, h, integrand);
  const cdouble coarse = detail::grid_sum(g.n, h, integrand, true);
  if (std::abs(fine - coarse) > kConvergenceTolerance) {
    std::ostringstream msg;
    msg << "overlap quadrature did not converge (|I_h - I_2h| = " << std::abs(fine - coarse)
        << "); sample the PSF on a finer grid";
    throw ToleranceError(msg.str());
  }
  return fine;
}

/// The pair (gamma_X, gamma_Y): integral of psi*(x - dx, y - dy) times the
/// x- and y-derivative of psi(x, y). For inversion-symmetric PSFs both are
/// real and equal the gradient of overlap_delta with respect to (dx, dy).
inline std::pair<cdouble, cdouble> overlap_gamma(const Psf& psf, double dx, double dy) {
  if (psf.is_gaussian()) {
    const double s2 = psf.sigma() * psf.sigma();
    const double d = std::exp(-(dx * dx + dy * dy) / (8.0 * s2));
    return {-dx / (4.0 * s2) * d, -dy / (4.0 * s2) * d};
  }
  const ComplexGrid& g = *psf.grid();
  const double h = g.spacing();
  const auto moved = detail::shifted(g.values, g.n, h, dx, dy);
  const auto& gx = psf.grid_dx();
  const auto& gy = psf.grid_dy();
  const cdouble gam_x = detail::grid_sum(g.n, h, [&](std::size_t k) { return std::conj(moved[k]) * gx[k]; });
  const cdouble gam_y = detail::grid_sum(g.n, h, [&](std::size_t k) { return std::conj(moved[k]) * gy[k]; });
  return {gam_x, gam_y};
}

/// Overlap and derivative-moment functionals of a PSF at separation (dx, dy).
struct PsfFunctionals {
  double dkx2 = 0.0;     ///< integral |d psi/dx|^2
  double dky2 = 0.0;     ///< integral |d psi/dy|^2
  double gamma_x = 0.0;  ///< equals d delta / d dx
  double gamma_y = 0.0;  ///< equals d delta / d dy
  double alpha = 0.0;    ///< Re integral (d psi*/dx)(d psi/dy)
  double delta = 1.0;
  double delta_x = 1.0;  ///< overlap at (dx, 0)
  double delta_y = 1.0;  ///< overlap at (0, dy)
};

/// All eight functionals. Throws SymmetryError for PSFs that are not
/// inversion-symmetric; imaginary parts (zero by symmetry) are dropped.
inline PsfFunctionals functionals(const Psf& psf, double dx, double dy) {
  if (!psf.inversion_symmetric()) {
    throw SymmetryError("functionals: PSF is not inversion-symmetric, psi(x,y) != psi(-x,-y)");
  }
  PsfFunctionals f;
  f.delta = overlap_delta(psf, dx, dy).real();
  f.delta_x = overlap_delta(psf, dx, 0.0).real();
  f.delta_y = overlap_delta(psf, 0.0, dy).real();
  const auto [gx, gy] = overlap_gamma(psf, dx, dy);
  f.gamma_x = gx.real();
  f.gamma_y = gy.real();
  if (psf.is_gaussian()) {
    const double s = psf.sigma();
    f.dkx2 = f.dky2 = 1.0 / (4.0 * s * s);
    f.alpha = 0.0;
    return f;
  }
  const ComplexGrid& g = *psf.grid();
  const double h = g.spacing();
  const auto& ddx = psf.grid_dx();
  const auto& ddy = psf.grid_dy();
  f.dkx2 = detail::grid_sum(g.n, h, [&](std::size_t k) { return cdouble(std::norm(ddx[k])); }).real();
  f.dky2 = detail::grid_sum(g.n, h, [&](std::size_t k) { return cdouble(std::norm(ddy[k])); }).real();
  f.alpha = detail::grid_sum(g.n, h, [&](std::size_t k) { return std::conj(ddx[k]) * ddy[k]; }).real();
  return f;
}

// ---------------------------------------------------------------------------
// CSV persistence: "# half_width=<float> n=<int>" then n*n lines "re,im",
// y-outer / x-inner.

inline ComplexGrid read_psf_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("PSF csv: empty input");
  double half_width = 0.0;
  long n = 0;
  {
    std::istringstream hdr(line);
    std::string tok;
    hdr >> tok;
    if (tok != "#") throw FormatError("PSF csv: header must start with '# '");
    bool have_w = false, have_n = false;
    while (hdr >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      try {
        if (key == "half_width") {
          half_width = std::stod(val);
          have_w = true;
        } else if (key == "n") {
          n = std::stol(val);
          have_n = true;
        }
      } catch (const std::exception&) {
        throw FormatError("PSF csv: bad header value '" + tok + "'");
      }
    }
    if (!have_w || !have_n || n < 2 || !(half_width > 0.0)) {
      throw FormatError("PSF csv: header needs half_width>0 and n>=2");
    }
  }
  ComplexGrid grid{half_width, static_cast<std::size_t>(n), {}};
  grid.values.reserve(grid.n * grid.n);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError("PSF csv: line " + std::to_string(lineno) + " is not 're,im'");
    }
    try {
      std::size_t used_re = 0, used_im = 0;
      const std::string re_s = line.substr(0, comma);
      const std::string im_s = line.substr(comma + 1);
      const double re = std::stod(re_s, &used_re);
      const double im = std::stod(im_s, &used_im);
      grid.values.emplace_back(re, im);
    } catch (const std::exception&) {
      throw FormatError("PSF csv: line " + std::to_string(lineno) + " is not numeric");
    }
  }
  if (grid.values.size() != grid.n * grid.n) {
    throw FormatError("PSF csv: expected " + std::to_string(grid.n * grid.n) + " rows, got " +
                      std::to_string(grid.values.size()));
  }
  return grid;
}

inline void write_psf_csv(std::ostream& out, const ComplexGrid& grid) {
  out << "# half_width=" << std::setprecision(17) << grid.half_width << " n=" << grid.n << '\n';
  for (const auto& v : grid.values) out << v.real() << ',' << v.imag() << '\n';
}

inline Psf load_psf_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open PSF file '" + path + "'");
  return Psf::sampled(read_psf_csv(in));
}

}  // namespace qloc
