// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <type_traits>

namespace qloc {

/// Neumaier-compensated running sum. Works for double and std::complex<double>.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    if constexpr (std::is_same_v<T, double>) {
      add_real(sum_, comp_, x);
    } else {
      double re = sum_.real(), ce = comp_.real();
      double im = sum_.imag(), ci = comp_.imag();
      add_real(re, ce, x.real());
      add_real(im, ci, x.imag());
      sum_ = T(re, im);
      comp_ = T(ce, ci);
    }
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  [[nodiscard]] T value() const { return sum_ + comp_; }

 private:
  static void add_real(double& s, double& c, double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }

  T sum_{};
  T comp_{};
};

/// Uniform 1-D node set on [center - half_width, center + half_width].
struct UniformAxis {
  double center = 0.0;
  double half_width = 1.0;
  std::size_t n = 2;

  [[nodiscard]] double spacing() const { return 2.0 * half_width / static_cast<double>(n - 1); }
  [[nodiscard]] double node(std::size_t i) const {
    return center - half_width + spacing() * static_cast<double>(i);
  }
  /// Trapezoid weight of node i (without the spacing factor).
  [[nodiscard]] double weight(std::size_t i) const { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }
};

/// Tensor-product trapezoidal rule on the square centred at (cx, cy).
/// `f(x, y)` may return double or std::complex<double>.
template <class F>
auto integrate_2d(F&& f, double half_width, std::size_t n, double cx = 0.0, double cy = 0.0) {
  if (n < 2 || !(half_width > 0.0)) {
    throw std::invalid_argument("integrate_2d: need n >= 2 and half_width > 0");
  }
  using T = decltype(f(0.0, 0.0));
  const UniformAxis ax{cx, half_width, n};
  const UniformAxis ay{cy, half_width, n};
  CompensatedSum<T> total;
  for (std::size_t j = 0; j < n; ++j) {
    const double y = ay.node(j);
    CompensatedSum<T> row;
    for (std::size_t i = 0; i < n; ++i) {
      row.add(ax.weight(i) * f(ax.node(i), y));
    }
    total.add(ay.weight(j) * row.value());
  }
  const double h = ax.spacing();
  return total.value() * (h * h);
}

}  // namespace qloc
