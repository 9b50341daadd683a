// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "qloc/qbound.hpp"
#include "qloc/spade.hpp"

namespace {

using qloc::Vec2;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// Brute-force normalization of the double series over q, r <= 60.
double series_total(Vec2 d, double sigma, double eps) {
  double total = 0.0;
  for (std::uint64_t q = 0; q <= 60; ++q) {
    for (std::uint64_t r = 0; r <= 60; ++r) total += qloc::spade_prob(q, r, d, sigma, eps);
  }
  return total;
}

TEST(SpadeProb, Examples) {
  const double eps = 0.01;
  EXPECT_DOUBLE_EQ(qloc::spade_prob(0, 0, {0, 0}, 1.0, eps), eps);
  EXPECT_EQ(qloc::spade_prob(1, 0, {0, 0}, 1.0, eps), 0.0);
  EXPECT_EQ(qloc::spade_prob(0, 3, {0, 0}, 1.0, eps), 0.0);
  EXPECT_NEAR(qloc::spade_prob(1, 0, {4, 0}, 1.0, 1.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(qloc::spade_prob(1, 0, {4, 0}, 1.0, 1.0), 0.367879, 1e-6);
  // Q = 1/16, R = 1/4: 7! 2! factorials in the denominator.
  const double q = 1.0 / 16, r = 0.25;
  EXPECT_LE(rel(qloc::spade_prob(7, 2, {1, 2}, 1.0, 0.5),
                0.5 * std::exp(-q - r) * std::pow(q, 7) * r * r / (5040.0 * 2.0)),
            1e-13);
  EXPECT_GT(qloc::spade_prob(400, 0, {80, 0}, 1.0, 1.0), 0.0);
}

TEST(SpadeProb, DoubleSeriesNormalization) {
  for (Vec2 d : {Vec2{0, 0}, Vec2{1, 2}, Vec2{4, 8}, Vec2{8, 8}, Vec2{3.3, 0.1}}) {
    EXPECT_NEAR(series_total(d, 1.0, 1.0), 1.0, 1e-12) << d.x << "," << d.y;
  }
  EXPECT_NEAR(series_total({2, 3}, 1.0, 0.25), 0.25, 1e-12);
}

TEST(SpadeFi, Constants) {
  const auto j = qloc::spade_fi(1.0, 1.0);
  EXPECT_DOUBLE_EQ(j(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(j(1, 1), 0.25);
  EXPECT_EQ(j(0, 1), 0.0);
  EXPECT_EQ(qloc::spade_fi(2.0, 0.0).values().norm(), 0.0);
  EXPECT_THROW(qloc::spade_fi(0.0, 1.0), std::invalid_argument);
}

TEST(SpadeFi, MatchesBruteForceCategoricalFi) {
  const double sigma = 1.0, eps = 1.0, h = 1e-5;
  const Vec2 d{1.0, 2.0};
  Eigen::Matrix2d j = Eigen::Matrix2d::Zero();
  for (std::uint64_t q = 0; q <= 60; ++q) {
    for (std::uint64_t r = 0; r <= 60; ++r) {
      const double p = qloc::spade_prob(q, r, d, sigma, eps);
      if (p < 1e-300) continue;
      const double a = (qloc::spade_prob(q, r, {d.x + h, d.y}, sigma, eps) -
                        qloc::spade_prob(q, r, {d.x - h, d.y}, sigma, eps)) / (2 * h);
      const double b = (qloc::spade_prob(q, r, {d.x, d.y + h}, sigma, eps) -
                        qloc::spade_prob(q, r, {d.x, d.y - h}, sigma, eps)) / (2 * h);
      j(0, 0) += a * a / p;
      j(1, 1) += b * b / p;
      j(0, 1) += a * b / p;
    }
  }
  const auto fi = qloc::spade_fi(sigma, eps);
  EXPECT_NEAR(j(0, 0), fi(0, 0), 1e-8);
  EXPECT_NEAR(j(1, 1), fi(1, 1), 1e-8);
  EXPECT_NEAR(j(0, 1), 0.0, 1e-8);
}

TEST(SpadeFi, EqualsQuantumSeparationBlock) {
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (Vec2 d : {Vec2{0, 0}, Vec2{0.3, 1.7}, Vec2{2, 2}}) {
      const auto cfg = qloc::SourceConfig::equal({d.x * sigma, d.y * sigma}, 0.02, 1);
      const auto k = qloc::qfi(cfg, qloc::Psf::gaussian(sigma));
      const auto j = qloc::spade_fi(sigma, cfg.eps_tot());
      EXPECT_DOUBLE_EQ(j(0, 0), k(2, 2));
      EXPECT_DOUBLE_EQ(j(1, 1), k(3, 3));
    }
  }
}

TEST(SpadeSample, Examples) {
  qloc::CounterRng rng(3);
  const auto z = qloc::spade_sample({0, 0}, 1.0, 7, rng);
  EXPECT_EQ(z.modes.size(), 7u);
  for (auto [q, r] : z.modes) {
    EXPECT_EQ(q, 0u);
    EXPECT_EQ(r, 0u);
  }
  EXPECT_EQ(z.hx, 0u);
  EXPECT_EQ(z.hy, 0u);

  qloc::CounterRng seeded(2024);
  const auto rec = qloc::spade_sample({4, 2}, 1.0, 1'000'000, seeded);
  std::uint64_t hx = 0, hy = 0;
  for (auto [q, r] : rec.modes) {
    hx += q;
    hy += r;
  }
  EXPECT_EQ(hx, rec.hx);
  EXPECT_EQ(hy, rec.hy);
  EXPECT_NEAR(double(rec.hx) / 1e6, 1.0, 0.003);
  EXPECT_NEAR(double(rec.hy) / 1e6, 0.25, 3 * std::sqrt(0.25 / 1e6));
}

TEST(SpadeSample, TotalsOnlyMatchesFullRecord) {
  qloc::CounterRng a(17, 4), b(17, 4);
  const auto full = qloc::spade_sample({1.5, 0.5}, 1.0, 500, a);
  const auto lean = qloc::spade_sample({1.5, 0.5}, 1.0, 500, b, false);
  EXPECT_TRUE(lean.modes.empty());
  EXPECT_EQ(full.hx, lean.hx);
  EXPECT_EQ(full.hy, lean.hy);
}

TEST(SpadeSample, XCountsIndependentOfDy) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    qloc::CounterRng a(seed), b(seed);
    const auto r0 = qloc::spade_sample({1.2, 0.0}, 1.0, 100, a);
    const auto r2 = qloc::spade_sample({1.2, 2.0}, 1.0, 100, b);
    EXPECT_EQ(r0.hx, r2.hx);
    EXPECT_EQ(r0.hy, 0u);
  }
}

TEST(SpadeMl, Examples) {
  qloc::SpadeRecord rec;
  rec.L = 100;
  const auto z = qloc::spade_ml(rec, 1.0);
  EXPECT_EQ(z.x, 0.0);
  EXPECT_EQ(z.y, 0.0);
  rec.hx = 25;
  EXPECT_DOUBLE_EQ(qloc::spade_ml(rec, 1.0).x, 2.0);

  // Exact means H = L Q invert to the true separation.
  const double sigma = 1.3;
  const Vec2 d{2.6, 5.2};
  rec.L = 1600;
  rec.hx = static_cast<std::uint64_t>(std::llround(1600 * d.x * d.x / (16 * sigma * sigma)));
  rec.hy = static_cast<std::uint64_t>(std::llround(1600 * d.y * d.y / (16 * sigma * sigma)));
  EXPECT_NEAR(qloc::spade_ml(rec, sigma).x, d.x, 1e-12);
  EXPECT_NEAR(qloc::spade_ml(rec, sigma).y, d.y, 1e-12);
}

}  // namespace
