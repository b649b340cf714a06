// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "loss_oracle.hpp"
#include "pgvoc/losses.hpp"

namespace pgvoc {
namespace {

using oracle::naive_losses;
using oracle::random_case;

double rel(double a, long double b) { return std::abs(a - static_cast<double>(b)) / std::max(1e-300, std::abs(static_cast<double>(b))); }

TEST(Losses, MatchNaiveOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t bins = 17 + 8 * (seed % 5), frames = 3 + seed % 7;
    const auto c = random_case(seed, bins, frames, 0.1);
    const auto v = losses(c.estimate, c.estimate_lambda, c.target, c.target_lambda);
    const auto o = naive_losses(c);
    EXPECT_LT(rel(v.magnitude, o[0]), 1e-10) << seed;
    EXPECT_LT(rel(v.cepstral, o[1]), 1e-10) << seed;
    EXPECT_LT(rel(v.offsets, o[2]), 1e-10) << seed;
    EXPECT_LT(rel(v.lambda, o[3]), 1e-10) << seed;
    EXPECT_LT(rel(v.total, o[0] + 0.1L * o[1] + o[2] + o[3]), 1e-10) << seed;
  }
}

TEST(Losses, ZeroAtEquality) {
  const auto c = random_case(4, 33, 5, 0.0);
  const auto v = losses(c.target, c.target_lambda, c.target, c.target_lambda);
  EXPECT_EQ(v.magnitude, 0.0);
  EXPECT_EQ(v.cepstral, 0.0);
  EXPECT_EQ(v.offsets, 0.0);
  EXPECT_EQ(v.lambda, 0.0);
  EXPECT_EQ(v.total, 0.0);
}

TEST(Losses, ConstantMagnitudeOffset) {
  auto c = random_case(5, 1025, 4, 0.0);
  c.estimate = c.target;
  c.estimate_lambda = c.target_lambda;
  for (double off : {0.25, -1.5, 3.0}) {
    auto e = c.estimate;
    for (double& v : e.magnitude.raw()) v += off;
    const auto v = losses(e, c.estimate_lambda, c.target, c.target_lambda);
    EXPECT_NEAR(v.magnitude, off * off, 1e-12);
    EXPECT_NEAR(v.cepstral, off * off, 1e-12);
    EXPECT_EQ(v.offsets, 0.0);
  }
}

TEST(Losses, OffsetMaskPartitionsBins) {
  auto c = random_case(6, 41, 6, 0.0);
  c.estimate = c.target;
  for (double& v : c.estimate.delta_m.raw()) v += 1.0;
  const auto only_m = losses(c.estimate, c.target_lambda, c.target, c.target_lambda);
  c.estimate = c.target;
  for (double& v : c.estimate.delta_n.raw()) v += 1.0;
  const auto only_n = losses(c.estimate, c.target_lambda, c.target, c.target_lambda);
  // A unit error on both channels charges every cell exactly once.
  c.estimate = c.target;
  for (double& v : c.estimate.delta_m.raw()) v += 1.0;
  for (double& v : c.estimate.delta_n.raw()) v += 1.0;
  const auto both = losses(c.estimate, c.target_lambda, c.target, c.target_lambda);
  double power = 0.0;
  for (double m : c.target.magnitude.raw()) power += m * m;
  power /= static_cast<double>(c.target.magnitude.size());
  EXPECT_GT(only_m.offsets, 0.0);
  EXPECT_GT(only_n.offsets, 0.0);
  EXPECT_NEAR(only_m.offsets + only_n.offsets, both.offsets, 1e-12);
  EXPECT_NEAR(both.offsets, power, 1e-12);
}

TEST(Losses, ThresholdAndWeightsComeFromConfig) {
  const auto c = random_case(7, 25, 4, 0.2);
  LossConfig cfg;
  cfg.weights = {0.0, 0.0, 2.0, 0.0};
  const auto v = losses(c.estimate, c.estimate_lambda, c.target, c.target_lambda, cfg);
  EXPECT_DOUBLE_EQ(v.total, 2.0 * v.offsets);
  cfg.lambda_threshold = 1.0;  // nothing is sinusoidal: only delta_n counts
  auto e = c.estimate;
  e.delta_m = c.target.delta_m;
  EXPECT_DOUBLE_EQ(losses(e, c.estimate_lambda, c.target, c.target_lambda, cfg).offsets,
                   losses(c.estimate, c.estimate_lambda, c.target, c.target_lambda, cfg).offsets);
  cfg.weights[1] = -1.0;
  EXPECT_THROW(losses(c.estimate, c.estimate_lambda, c.target, c.target_lambda, cfg), ValidationError);
}

TEST(Losses, GridMismatchThrows) {
  const auto a = random_case(8, 17, 4, 0.1);
  const auto b = random_case(8, 17, 5, 0.1);
  EXPECT_THROW(losses(a.estimate, a.estimate_lambda, b.target, b.target_lambda), ValidationError);
  EXPECT_THROW(losses(a.estimate, b.estimate_lambda, a.target, a.target_lambda), ValidationError);
}

TEST(DctBasis, OrthonormalRows) {
  const auto basis = dct_basis(20, 64);
  for (std::size_t p = 0; p < 20; ++p)
    for (std::size_t q = 0; q < 20; ++q) {
      double dot = 0.0;
      for (std::size_t k = 0; k < 64; ++k) dot += basis(k, p) * basis(k, q);
      EXPECT_NEAR(dot, p == q ? 1.0 : 0.0, 1e-12);
    }
}

TEST(DctBasis, ConstantFrameHasOnlyCoefficientZero) {
  const std::size_t bins = 1025;
  const auto basis = dct_basis(20, bins);
  for (double c : {1.0, -2.5}) {
    double energy = 0.0;
    for (std::size_t q = 0; q < 20; ++q) {
      double coef = 0.0;
      for (std::size_t k = 0; k < bins; ++k) coef += basis(k, q) * c;
      if (q == 0) EXPECT_NEAR(coef * coef, c * c * bins, 1e-9);
      else energy += coef * coef;
    }
    EXPECT_LT(energy, 1e-18);
  }
}

}  // namespace
}  // namespace pgvoc
