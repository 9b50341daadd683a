// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qloc/errors.hpp"

namespace qloc {

/// Symmetric information matrix with named parameters.
class FisherMatrix {
 public:
  FisherMatrix() = default;
  FisherMatrix(std::vector<std::string> labels, Eigen::MatrixXd values)
      : labels_(std::move(labels)), values_(std::move(values)) {
    if (values_.rows() != values_.cols() || static_cast<std::size_t>(values_.rows()) != labels_.size()) {
      throw std::invalid_argument("FisherMatrix: labels and matrix dimensions disagree");
    }
    values_ = 0.5 * (values_ + values_.transpose()).eval();
  }

  static FisherMatrix zero(std::vector<std::string> labels) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    return {std::move(labels), Eigen::MatrixXd::Zero(n, n)};
  }

  [[nodiscard]] std::size_t size() const { return labels_.size(); }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  [[nodiscard]] std::size_t index_of(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw std::out_of_range("FisherMatrix: no parameter '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  [[nodiscard]] double trace() const { return values_.trace(); }

  [[nodiscard]] Eigen::VectorXd eigenvalues() const {
    if (size() == 0) return {};
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(values_, Eigen::EigenvaluesOnly).eigenvalues();
  }

  /// Eigenvalues >= -1e-10 * trace.
  [[nodiscard]] bool is_psd() const {
    if (size() == 0) return true;
    const double tol = 1e-10 * std::max(std::abs(trace()), std::numeric_limits<double>::min());
    return eigenvalues().minCoeff() >= -tol;
  }

  [[nodiscard]] FisherMatrix block(std::span<const std::size_t> idx) const {
    std::vector<std::string> lab;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) {
      lab.push_back(labels_.at(idx[a]));
      for (std::size_t b = 0; b < idx.size(); ++b) {
        m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = (*this)(idx[a], idx[b]);
      }
    }
    return {std::move(lab), std::move(m)};
  }

  FisherMatrix& operator*=(double s) {
    values_ *= s;
    return *this;
  }

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd values_;
};

inline FisherMatrix operator*(double s, FisherMatrix m) {
  m *= s;
  return m;
}

namespace detail {

/// True when the smallest eigenvalue is above 1e-12 * trace.
inline bool well_conditioned(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return false;
  const double tr = m.trace();
  if (!(tr > 0.0)) return false;
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
  return ev.minCoeff() > 1e-12 * tr;
}

}  // namespace detail

/// Cramer-Rao variance bounds diag(K^-1) for the parameters in `which`.
///
/// When K as a whole is singular but the requested block is decoupled from
/// the rest (e.g. the separation block of a QFI whose centroid block
/// vanishes), the bounds come from the inverse of that block alone.
inline std::vector<double> qcr_bound(const FisherMatrix& k, std::span<const std::size_t> which) {
  if (which.empty()) return {};
  for (auto i : which) {
    if (i >= k.size()) throw std::out_of_range("qcr_bound: parameter index out of range");
  }
  const Eigen::MatrixXd& m = k.values();
  std::vector<double> out;
  out.reserve(which.size());
  if (detail::well_conditioned(m)) {
    const Eigen::MatrixXd inv = m.inverse();
    for (auto i : which) out.push_back(inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
    return out;
  }
  const FisherMatrix sub = k.block(which);
  const double tol = 1e-12 * std::max(std::abs(m.trace()), std::numeric_limits<double>::min());
  for (auto i : which) {
    for (std::size_t j = 0; j < k.size(); ++j) {
      if (std::find(which.begin(), which.end(), j) != which.end()) continue;
      if (std::abs(k(i, j)) > tol) {
        throw SingularMatrixError("qcr_bound: information matrix is singular and the requested "
                                  "parameters are coupled to the singular block");
      }
    }
  }
  if (!detail::well_conditioned(sub.values())) {
    throw SingularMatrixError("qcr_bound: requested block has an eigenvalue below 1e-12 * trace");
  }
  const Eigen::MatrixXd inv = sub.values().inverse();
  for (Eigen::Index a = 0; a < inv.rows(); ++a) out.push_back(inv(a, a));
  return out;
}

/// diag(J^-1) of a 2x2 information matrix, with +infinity for a parameter
/// that carries no information (singular J with that parameter uncoupled,
/// or coupled into a singular pair).
inline std::array<double, 2> crb_2x2(const FisherMatrix& j) {
  if (j.size() != 2) throw std::invalid_argument("crb_2x2: need a 2x2 matrix");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double a = j(0, 0), b = j(0, 1), c = j(1, 1);
  if (b == 0.0) return {a > 0.0 ? 1.0 / a : inf, c > 0.0 ? 1.0 / c : inf};
  const double det = a * c - b * b;
  if (!(det > 1e-12 * a * c)) return {inf, inf};
  return {c / det, a / det};
}

/// Bounds for every parameter of K.
inline std::vector<double> qcr_bound(const FisherMatrix& k) {
  std::vector<std::size_t> all(k.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return qcr_bound(k, all);
}

inline std::vector<double> qcr_bound(const FisherMatrix& k, std::initializer_list<std::size_t> which) {
  return qcr_bound(k, std::span<const std::size_t>(which.begin(), which.size()));
}

}  // namespace qloc
