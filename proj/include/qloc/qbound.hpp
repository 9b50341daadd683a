// SPDX-License-Identifier: Apache-2.0
//
// Quantum Fisher information for the centroid and separation of two weak
// incoherent point sources, in closed form and by a brute-force numerical
// route (projected density matrix + symmetric logarithmic derivatives).
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "qloc/errors.hpp"
#include "qloc/fisher.hpp"
#include "qloc/psf.hpp"

namespace qloc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Two sources described by their centroid and separation (source 2 minus
/// source 1), per-shot photon arrival probabilities and the number of shots.
struct SourceConfig {
  Vec2 centroid{};
  Vec2 separation{};
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::uint64_t trials = 1;

  [[nodiscard]] double eps_tot() const { return eps1 + eps2; }
  /// Mean number of detected photons N = M (eps1 + eps2).
  [[nodiscard]] double photons() const { return static_cast<double>(trials) * eps_tot(); }

  void validate() const {
    if (!(eps1 >= 0.0 && eps2 >= 0.0) || eps1 + eps2 > 1.0) {
      throw std::invalid_argument("SourceConfig: need eps1, eps2 >= 0 and eps1 + eps2 <= 1");
    }
    if (trials == 0) throw std::invalid_argument("SourceConfig: trials must be positive");
  }

  /// Equal strengths with N = trials * eps_tot detected photons on average.
  static SourceConfig equal(Vec2 separation, double eps_tot, std::uint64_t trials, Vec2 centroid = {}) {
    return {centroid, separation, 0.5 * eps_tot, 0.5 * eps_tot, trials};
  }
};

inline const std::vector<std::string>& theta_labels() {
  static const std::vector<std::string> labels{"Xbar", "Ybar", "dX", "dY"};
  return labels;
}

inline const std::vector<std::string>& separation_labels() {
  static const std::vector<std::string> labels{"dX", "dY"};
  return labels;
}

namespace detail {

inline void require_equal_strengths(const SourceConfig& cfg) {
  const double scale = std::max({std::abs(cfg.eps1), std::abs(cfg.eps2), 1e-300});
  if (std::abs(cfg.eps1 - cfg.eps2) > 1e-12 * scale) {
    std::ostringstream msg;
    msg << "QFI closed form requires eps1 == eps2 (got " << cfg.eps1 << ", " << cfg.eps2 << ")";
    throw UnequalStrengthError(msg.str());
  }
}

}  // namespace detail

/// 4x4 QFI over (Xbar, Ybar, dX, dY) from functionals evaluated at cfg.separation.
inline FisherMatrix qfi(const SourceConfig& cfg, const PsfFunctionals& f) {
  cfg.validate();
  detail::require_equal_strengths(cfg);
  const double n = cfg.photons();
  Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
  k(0, 0) = 4.0 * (f.dkx2 - f.gamma_x * f.gamma_x);
  k(1, 1) = 4.0 * (f.dky2 - f.gamma_y * f.gamma_y);
  k(0, 1) = k(1, 0) = 4.0 * (f.alpha - f.gamma_x * f.gamma_y);
  k(2, 2) = f.dkx2;
  k(3, 3) = f.dky2;
  k(2, 3) = k(3, 2) = f.alpha;
  return {theta_labels(), n * k};
}

/// Convenience overload computing the functionals from the PSF.
inline FisherMatrix qfi(const SourceConfig& cfg, const Psf& psf) {
  return qfi(cfg, functionals(psf, cfg.separation.x, cfg.separation.y));
}

/// Variance bounds on (dX, dY) from a 4x4 QFI.
inline std::array<double, 2> separation_bounds(const FisherMatrix& k) {
  const auto b = qcr_bound(k, {k.index_of("dX"), k.index_of("dY")});
  return {b[0], b[1]};
}

/// Independent numerical QFI.
///
/// Builds rho = (1 - eps_tot)|vac><vac| + eps1|psi_1><psi_1| + eps2|psi_2><psi_2|
/// on an orthonormal basis spanning {psi_s, d psi_s / dX_s, d psi_s / dY_s}
/// (plus vacuum), differentiates it by central differences, forms the SLDs in
/// the eigenbasis of rho and returns M tr(rho (L_mu L_nu + L_nu L_mu) / 2).
///
/// Gram directions with eigenvalue below 1e-14 of the largest are treated as
/// exact linear dependencies (coincident sources); any retained direction with
/// condition above 1e12 raises IllConditionedError.
inline FisherMatrix qfi_numeric_oracle(const SourceConfig& cfg, const Psf& psf,
                                       std::size_t quadrature_points = kDefaultQuadraturePoints) {
  using Eigen::Index;
  using CMat = Eigen::MatrixXcd;
  cfg.validate();
  if (!psf.inversion_symmetric()) throw SymmetryError("qfi_numeric_oracle: PSF is not inversion-symmetric");
  if (cfg.eps_tot() == 0.0) return FisherMatrix::zero(theta_labels());

  const double step = 1e-4 * psf.rms_width();
  const std::array<double, 4> theta0{cfg.centroid.x, cfg.centroid.y, cfg.separation.x, cfg.separation.y};

  // Parameter points: 0 = base, 1 + 2 mu = theta + h e_mu, 2 + 2 mu = theta - h e_mu.
  constexpr int kPoints = 9;
  std::array<std::array<double, 4>, kPoints> thetas{};
  thetas[0] = theta0;
  for (int mu = 0; mu < 4; ++mu) {
    thetas[static_cast<std::size_t>(1 + 2 * mu)] = theta0;
    thetas[static_cast<std::size_t>(2 + 2 * mu)] = theta0;
    thetas[static_cast<std::size_t>(1 + 2 * mu)][static_cast<std::size_t>(mu)] += step;
    thetas[static_cast<std::size_t>(2 + 2 * mu)][static_cast<std::size_t>(mu)] -= step;
  }
  auto positions = [](const std::array<double, 4>& t) {
    return std::array<Vec2, 2>{Vec2{t[0] - 0.5 * t[2], t[1] - 0.5 * t[3]},
                               Vec2{t[0] + 0.5 * t[2], t[1] + 0.5 * t[3]}};
  };
  const auto src0 = positions(theta0);

  // Inner products on one fixed trapezoid grid: gram = <f_a|f_b>,
  // proj(a, 2p + s) = <f_a|psi_s(theta_p)>.
  constexpr int kRaw = 6;
  CMat gram = CMat::Zero(kRaw, kRaw);
  CMat proj = CMat::Zero(kRaw, 2 * kPoints);
  QuadratureRule rule = psf.default_rule(cfg.separation.x, cfg.separation.y);
  rule.half_width += 4.0 * step;
  rule.n = quadrature_points;
  const UniformAxis ax{cfg.centroid.x, rule.half_width, rule.n};
  const UniformAxis ay{cfg.centroid.y, rule.half_width, rule.n};
  Eigen::Matrix<cdouble, kRaw, 1> raw;
  Eigen::Matrix<cdouble, 2 * kPoints, 1> states;
  for (std::size_t j = 0; j < rule.n; ++j) {
    const double y = ay.node(j);
    CMat gram_row = CMat::Zero(kRaw, kRaw);
    CMat proj_row = CMat::Zero(kRaw, 2 * kPoints);
    for (std::size_t i = 0; i < rule.n; ++i) {
      const double x = ax.node(i);
      for (int s = 0; s < 2; ++s) {
        const double u = x - src0[static_cast<std::size_t>(s)].x;
        const double v = y - src0[static_cast<std::size_t>(s)].y;
        raw(s) = psf.value(u, v);
        raw(2 + 2 * s) = -psf.deriv_x(u, v);
        raw(3 + 2 * s) = -psf.deriv_y(u, v);
      }
      for (int p = 0; p < kPoints; ++p) {
        const auto src = positions(thetas[static_cast<std::size_t>(p)]);
        for (int s = 0; s < 2; ++s) {
          states(2 * p + s) = psf.value(x - src[static_cast<std::size_t>(s)].x, y - src[static_cast<std::size_t>(s)].y);
        }
      }
      const double w = ax.weight(i);
      gram_row.noalias() += w * raw.conjugate() * raw.transpose();
      proj_row.noalias() += w * raw.conjugate() * states.transpose();
    }
    const double w = ay.weight(j);
    gram += w * gram_row;
    proj += w * proj_row;
  }
  const double hh = ax.spacing() * ay.spacing();
  gram *= hh;
  proj *= hh;
  gram = (0.5 * (gram + gram.adjoint())).eval();

  Eigen::SelfAdjointEigenSolver<CMat> gram_eig(gram);
  const Eigen::VectorXd lam = gram_eig.eigenvalues();
  const double lam_max = lam.maxCoeff();
  std::vector<Index> keep;
  for (Index k = 0; k < lam.size(); ++k) {
    if (lam(k) <= 1e-14 * lam_max) continue;
    if (lam(k) < 1e-12 * lam_max) {
      std::ostringstream msg;
      msg << "qfi_numeric_oracle: basis Gram matrix condition " << lam_max / lam(k) << " exceeds 1e12";
      throw IllConditionedError(msg.str());
    }
    keep.push_back(k);
  }
  const Index r = static_cast<Index>(keep.size());
  // coeff = Lambda^{-1/2} V^dagger proj: coordinates of each psi_s(theta_p).
  CMat to_basis(r, kRaw);
  for (Index k = 0; k < r; ++k) {
    to_basis.row(k) = gram_eig.eigenvectors().col(keep[static_cast<std::size_t>(k)]).adjoint() /
                      std::sqrt(lam(keep[static_cast<std::size_t>(k)]));
  }
  const CMat coeff = to_basis * proj;

  // Vacuum is the extra basis vector 0.
  auto rho_at = [&](int p) {
    CMat rho = CMat::Zero(r + 1, r + 1);
    rho(0, 0) = 1.0 - cfg.eps_tot();
    const auto c1 = coeff.col(2 * p);
    const auto c2 = coeff.col(2 * p + 1);
    rho.bottomRightCorner(r, r) = cfg.eps1 * c1 * c1.adjoint() + cfg.eps2 * c2 * c2.adjoint();
    return rho;
  };

  CMat rho0 = rho_at(0);
  rho0 = (0.5 * (rho0 + rho0.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<CMat> rho_eig(rho0);
  const Eigen::VectorXd d = rho_eig.eigenvalues();
  const CMat& e = rho_eig.eigenvectors();

  std::array<CMat, 4> sld;
  for (int mu = 0; mu < 4; ++mu) {
    const CMat drho = (rho_at(1 + 2 * mu) - rho_at(2 + 2 * mu)) / (2.0 * step);
    const CMat a = e.adjoint() * drho * e;
    CMat l = CMat::Zero(r + 1, r + 1);
    for (Index m = 0; m <= r; ++m) {
      for (Index n = 0; n <= r; ++n) {
        const double denom = d(m) + d(n);
        if (denom > 1e-14) l(m, n) = 2.0 * a(m, n) / denom;
      }
    }
    sld[static_cast<std::size_t>(mu)] = l;
  }

  Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = mu; nu < 4; ++nu) {
      const CMat prod = sld[static_cast<std::size_t>(mu)] * sld[static_cast<std::size_t>(nu)];
      double acc = 0.0;
      for (Index m = 0; m <= r; ++m) acc += d(m) * prod(m, m).real();
      k(mu, nu) = k(nu, mu) = static_cast<double>(cfg.trials) * acc;
    }
  }
  return {theta_labels(), k};
}

}  // namespace qloc
