// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random numbers for reproducible parallel Monte Carlo.
//
// A stream is addressed by (key, stream id, counter); the Philox4x32-10 block
// cipher maps each 128-bit (counter, stream id) pair to 128 random bits, so
// any draw of any stream can be produced without touching the others.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qloc {

/// Philox4x32 with 10 rounds.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Seedable, splittable random stream. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  /// Complete, serializable position of a stream.
  struct State {
    std::uint64_t key = 0;
    std::uint64_t stream = 0;
    std::uint64_t counter = 0;
    friend bool operator==(const State&, const State&) = default;
  };

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : state_{seed, stream, 0} {}
  explicit CounterRng(State s) : state_(s) {}

  /// Stream id of Monte-Carlo run `run` at grid point `point`.
  static std::uint64_t stream_id(std::uint32_t point, std::uint32_t run) {
    return (static_cast<std::uint64_t>(point) << 32) | run;
  }

  [[nodiscard]] State state() const { return state_; }

  /// Child stream keyed by the next 64-bit output of this one. Successive
  /// splits give unrelated children, and the child's draws never advance
  /// the parent.
  [[nodiscard]] CounterRng split() { return CounterRng(State{(*this)(), state_.stream, 0}); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t block = state_.counter >> 1;
    if (!cached_ || block != cached_block_) fill(block);
    return buf_[state_.counter++ & 1u];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  void fill(std::uint64_t block) {
    const auto out = philox4x32_10(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(state_.stream), static_cast<std::uint32_t>(state_.stream >> 32)},
        {static_cast<std::uint32_t>(state_.key), static_cast<std::uint32_t>(state_.key >> 32)});
    buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    cached_block_ = block;
    cached_ = true;
  }

  State state_;
  std::array<std::uint64_t, 2> buf_{};
  std::uint64_t cached_block_ = 0;
  bool cached_ = false;
};

/// ln(k!) from a table below 256 and a Stirling series above.
inline double log_factorial(std::uint64_t k) {
  static const auto table = [] {
    std::array<double, 256> t{};
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  if (k < table.size()) return table[k];
  const double x = static_cast<double>(k);
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return x * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi * x) +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

/// Exact Poisson variates: multiplication method below mean 30, Hormann's
/// transformed rejection (PTRS) above.
class PoissonSampler {
 public:
  explicit PoissonSampler(double mean) : mean_(mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("Poisson mean must be finite and >= 0");
    if (mean < 30.0) {
      exp_neg_mean_ = std::exp(-mean);
    } else {
      log_mean_ = std::log(mean);
      const double smu = std::sqrt(mean);
      b_ = 0.931 + 2.53 * smu;
      a_ = -0.059 + 0.02483 * b_;
      inv_alpha_ = 1.1239 + 1.1328 / (b_ - 3.4);
      vr_ = 0.9277 - 3.6224 / (b_ - 2.0);
    }
  }

  [[nodiscard]] double mean() const { return mean_; }

  std::uint64_t operator()(CounterRng& rng) const {
    if (mean_ == 0.0) return 0;
    if (mean_ < 30.0) {
      std::uint64_t k = 0;
      double prod = rng.uniform();
      while (prod > exp_neg_mean_) {
        ++k;
        prod *= rng.uniform();
      }
      return k;
    }
    for (;;) {
      const double u = rng.uniform() - 0.5;
      const double v = rng.uniform();
      const double us = 0.5 - std::abs(u);
      const double kd = std::floor((2.0 * a_ / us + b_) * u + mean_ + 0.43);
      if (us >= 0.07 && v <= vr_) return static_cast<std::uint64_t>(kd);
      if (kd < 0.0 || (us < 0.013 && v > us)) continue;
      const auto k = static_cast<std::uint64_t>(kd);
      if (std::log(v) + std::log(inv_alpha_) - std::log(a_ / (us * us) + b_) <=
          -mean_ + kd * log_mean_ - log_factorial(k)) {
        return k;
      }
    }
  }

 private:
  double mean_;
  double exp_neg_mean_ = 0.0;
  double log_mean_ = 0.0, a_ = 0.0, b_ = 0.0, inv_alpha_ = 0.0, vr_ = 0.0;
};

}  // namespace qloc
