// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qloc/mc.hpp"

namespace {

using qloc::MCConfig;
using qloc::Scheme;

MCConfig config(Scheme scheme, std::vector<double> dx, std::vector<double> dy, std::uint64_t L, std::uint64_t runs) {
  MCConfig c;
  c.scheme = scheme;
  c.sigma = 1.0;
  c.grid_dx = std::move(dx);
  c.grid_dy = std::move(dy);
  c.L = L;
  c.runs = runs;
  c.seed = 31337;
  c.workers = 1;
  return c;
}

void expect_identical(const qloc::MCResult& a, const qloc::MCResult& b) {
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].mse_dx, b.points[i].mse_dx);
    EXPECT_EQ(a.points[i].mse_dy, b.points[i].mse_dy);
    EXPECT_EQ(a.points[i].bias_dx, b.points[i].bias_dx);
    EXPECT_EQ(a.points[i].stderr_dy, b.points[i].stderr_dy);
  }
}

TEST(RunMc, SpadeAtCoincidenceIsExact) {
  const auto res = qloc::run_mc(config(Scheme::Spade, {0.0}, {0.0}, 37, 3000));
  EXPECT_EQ(res.points[0].mse_dx, 0.0);
  EXPECT_EQ(res.points[0].mse_dy, 0.0);
  EXPECT_EQ(res.points[0].stderr_dx, 0.0);
}

TEST(RunMc, ReproducibleAndWorkerIndependent) {
  for (Scheme s : {Scheme::Sliver, Scheme::Spade}) {
    MCConfig c = config(s, {0.1, 0.8, 2.0}, {0.0, 1.0}, 20, 5000);
    const auto a = qloc::run_mc(c);
    const auto b = qloc::run_mc(c);
    expect_identical(a, b);
    c.workers = 3;
    expect_identical(a, qloc::run_mc(c));
    c.workers = 8;
    expect_identical(a, qloc::run_mc(c));
  }
}

TEST(RunMc, DifferentSeedsDiffer) {
  MCConfig c = config(Scheme::Sliver, {1.0}, {0.5}, 50, 2000);
  const auto a = qloc::run_mc(c);
  c.seed += 1;
  EXPECT_NE(a.points[0].mse_dx, qloc::run_mc(c).points[0].mse_dx);
}

TEST(RunMc, MseDominatesSquaredBias) {
  const auto res = qloc::run_mc(config(Scheme::Sliver, {0.0, 0.3, 1.0, 3.0}, {0.0, 0.7}, 40, 4000));
  for (const auto& p : res.points) {
    EXPECT_GE(p.mse_dx, p.bias_dx * p.bias_dx);
    EXPECT_GE(p.mse_dy, p.bias_dy * p.bias_dy);
    EXPECT_GE(p.stderr_dx, 0.0);
  }
}

TEST(RunMc, PointOrderAndEcho) {
  const MCConfig c = config(Scheme::Spade, {0.5, 1.0, 1.5}, {0.0, 2.0}, 10, 100);
  const auto res = qloc::run_mc(c);
  ASSERT_EQ(res.points.size(), 6u);
  EXPECT_EQ(res.points[1].dx, 1.0);
  EXPECT_EQ(res.points[1].dy, 0.0);
  EXPECT_EQ(res.points[4].dy, 2.0);
  EXPECT_EQ(res.config.seed, c.seed);
  EXPECT_EQ(res.config.runs, c.runs);
}

TEST(RunMc, PairedSpadeRowsShareXErrors) {
  const auto res = qloc::run_mc(config(Scheme::Spade, {0.5, 1.5}, {0.0, 2.0}, 100, 3000));
  EXPECT_EQ(res.points[0].mse_dx, res.points[2].mse_dx);
  EXPECT_EQ(res.points[1].mse_dx, res.points[3].mse_dx);
}

TEST(RunMc, SliverAttainsBoundAtLargeSeparation) {
  const auto res = qloc::run_mc(config(Scheme::Sliver, {2.0}, {0.0}, 100, 100000));
  const double ratio = res.points[0].mse_dx / res.points[0].crb_dx;
  EXPECT_GE(ratio, 0.8);
  EXPECT_LE(ratio, 1.3);
}

TEST(RunMc, SliverSuperEfficientNearCoincidence) {
  const auto res = qloc::run_mc(config(Scheme::Sliver, {0.1}, {0.0}, 100, 20000));
  EXPECT_LT(res.points[0].mse_dx, res.points[0].crb_dx);
}

TEST(RunMc, RejectsInvalidConfig) {
  EXPECT_THROW(qloc::run_mc(config(Scheme::Sliver, {}, {0.0}, 10, 10)), std::invalid_argument);
  EXPECT_THROW(qloc::run_mc(config(Scheme::Sliver, {-1.0}, {0.0}, 10, 10)), std::invalid_argument);
  EXPECT_THROW(qloc::run_mc(config(Scheme::Sliver, {1.0}, {0.0}, 0, 10)), std::invalid_argument);
  EXPECT_THROW(qloc::run_mc(config(Scheme::Sliver, {1.0}, {0.0}, 10, 0)), std::invalid_argument);
}

TEST(CrbReference, Examples) {
  const double inf = std::numeric_limits<double>::infinity();
  const MCConfig spade = config(Scheme::Spade, {1.0}, {0.0}, 100, 1);
  for (qloc::Vec2 d : {qloc::Vec2{0, 0}, qloc::Vec2{3, 1}}) {
    const auto r = qloc::crb_reference(spade, d);
    EXPECT_DOUBLE_EQ(r.crb_dx, 0.04);
    EXPECT_DOUBLE_EQ(r.crb_dy, 0.04);
    EXPECT_DOUBLE_EQ(r.qcrb, 0.04);
  }
  const MCConfig sliver = config(Scheme::Sliver, {1.0}, {0.0}, 100, 1);
  const auto at0 = qloc::crb_reference(sliver, {0, 0});
  EXPECT_EQ(at0.crb_dx, inf);
  EXPECT_EQ(at0.crb_dy, inf);
  const auto near0 = qloc::crb_reference(sliver, {1e-4, 1e-4});
  EXPECT_NEAR(near0.crb_dx / 0.04, 1.0, 1e-6);
  EXPECT_NEAR(near0.crb_dy / 0.04, 1.0, 1e-6);
  const auto onaxis = qloc::crb_reference(sliver, {1.0, 0.0});
  EXPECT_TRUE(std::isfinite(onaxis.crb_dx));
  EXPECT_EQ(onaxis.crb_dy, inf);
}

}  // namespace
