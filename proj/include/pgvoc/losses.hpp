// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "pgvoc/error.hpp"
#include "pgvoc/grid.hpp"
#include "pgvoc/phase_gradient.hpp"

namespace pgvoc {

struct LossConfig {
  std::array<double, 4> weights{1.0, 0.1, 1.0, 1.0};
  std::size_t cepstral_count = 20;
  double lambda_threshold = 0.5;

  void validate() const {
    for (double w : weights) require(w >= 0.0, "loss weights must be non-negative");
    require(cepstral_count > 0, "cepstral count must be positive");
  }

  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

struct LossValues {
  double magnitude = 0.0;  ///< L1
  double cepstral = 0.0;   ///< L2
  double offsets = 0.0;    ///< L3
  double lambda = 0.0;     ///< L4
  double total = 0.0;
};

/// First `count` rows of the orthonormal DCT-II basis of length `size`.
inline Grid<double> dct_basis(std::size_t count, std::size_t size) {
  Grid<double> basis(size, count);
  const double n = static_cast<double>(size);
  for (std::size_t q = 0; q < count; ++q) {
    const double scale = q == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t k = 0; k < size; ++k)
      basis(k, q) = scale * std::cos(std::numbers::pi * static_cast<double>(q) * (2.0 * k + 1.0) / (2.0 * n));
  }
  return basis;
}

/// Training losses of an estimated triple (+ lambda) against a target.
/// Every term is averaged over the bins x frames grid; the cepstral term
/// sums the retained coefficients of each frame and divides by the same
/// grid size, so a constant magnitude offset c yields c^2 in both L1 and L2.
/// Offsets and lambda errors are weighted by the target power M^2; the
/// target lambda selects delta_m (above threshold) or delta_n.
inline LossValues losses(const SpectralTriple& estimate, const ComponentMap& estimate_lambda,
                         const SpectralTriple& target, const ComponentMap& target_lambda, const LossConfig& cfg = {}) {
  cfg.validate();
  require_same_shape(estimate.magnitude, target.magnitude, "estimate vs target magnitude");
  require_same_shape(estimate.delta_m, target.magnitude, "estimate delta_m");
  require_same_shape(estimate.delta_n, target.magnitude, "estimate delta_n");
  require_same_shape(target.delta_m, target.magnitude, "target delta_m");
  require_same_shape(target.delta_n, target.magnitude, "target delta_n");
  require_same_shape(estimate_lambda.lambda, target.magnitude, "estimate lambda");
  require_same_shape(target_lambda.lambda, target.magnitude, "target lambda");

  const std::size_t bins = target.bins(), frames = target.frames();
  const double cells = static_cast<double>(bins * frames);
  require(cells > 0.0, "loss needs a non-empty grid");
  const std::size_t coeffs = std::min(cfg.cepstral_count, bins);
  const auto basis = dct_basis(coeffs, bins);

  LossValues v;
  std::vector<double> diff(bins);
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t m = 0; m < bins; ++m) {
      const double mt = target.magnitude(m, n);
      const double d = estimate.magnitude(m, n) - mt;
      diff[m] = d;
      v.magnitude += d * d;
      const double power = mt * mt;
      const double off = target_lambda.lambda(m, n) > cfg.lambda_threshold
                             ? estimate.delta_m(m, n) - target.delta_m(m, n)
                             : estimate.delta_n(m, n) - target.delta_n(m, n);
      v.offsets += power * off * off;
      const double dl = estimate_lambda.lambda(m, n) - target_lambda.lambda(m, n);
      v.lambda += power * dl * dl;
    }
    // DCT is linear, so DCT(M_hat) - DCT(M) = DCT(M_hat - M).
    for (std::size_t q = 0; q < coeffs; ++q) {
      const auto row = basis.frame(q);
      double c = 0.0;
      for (std::size_t m = 0; m < bins; ++m) c += row[m] * diff[m];
      v.cepstral += c * c;
    }
  }
  v.magnitude /= cells;
  v.cepstral /= cells;
  v.offsets /= cells;
  v.lambda /= cells;
  v.total = cfg.weights[0] * v.magnitude + cfg.weights[1] * v.cepstral + cfg.weights[2] * v.offsets +
            cfg.weights[3] * v.lambda;
  return v;
}

}  // namespace pgvoc
