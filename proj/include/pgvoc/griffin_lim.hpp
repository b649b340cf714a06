// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "pgvoc/audio.hpp"
#include "pgvoc/error.hpp"
#include "pgvoc/mel.hpp"
#include "pgvoc/random.hpp"
#include "pgvoc/stft.hpp"

namespace pgvoc {

struct GlaConfig {
  std::size_t iterations = 500;
  double momentum = 0.99;
  std::uint64_t rng_seed = 0;

  void validate() const { require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)"); }

  friend bool operator==(const GlaConfig&, const GlaConfig&) = default;
};

struct GlaResult {
  AudioBuffer audio;
  /// Spectral convergence || |stft(x_i)| - M || / ||M|| of the estimate before
  /// each iteration, followed by the value for the returned audio
  /// (iterations + 1 entries).
  std::vector<double> convergence;
};

inline double spectral_convergence(const Grid<std::complex<double>>& estimate, const Grid<double>& target) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = std::sqrt(std::norm(estimate.raw()[i])) - target.raw()[i];
    num += d * d;
    den += target.raw()[i] * target.raw()[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

/// Fast Griffin-Lim: alternate the magnitude and consistency projections with
/// an inertial extrapolation of the consistent spectrogram. momentum = 0
/// gives the classic algorithm.
inline GlaResult griffin_lim(const MagnitudeSpectrogram& target, const GlaConfig& config,
                             std::optional<std::size_t> length = {}) {
  config.validate();
  require(all_finite(target.values), "magnitude contains non-finite values");
  const StftConfig& cfg = target.config;
  require(target.bins() == cfg.bins(), "grid mismatch: magnitude bins differ from config");
  const std::size_t bins = target.bins(), frames = target.frames();
  const std::size_t len = length.value_or(default_signal_length(frames, cfg));
  require(len > cfg.frame_size / 2, "target too short for centred resynthesis");
  const OverlapAdd synthesize(cfg, frames, len);
  const auto& window = synthesize.window();
  const auto& mag = target.values.raw();
  double energy = 0.0;
  for (double v : mag) energy += v * v;

  Grid<std::complex<double>> spec(bins, frames);
  for (std::size_t n = 0; n < frames; ++n) {
    StreamRng rng(config.rng_seed, n);
    for (std::size_t m = 0; m < bins; ++m) spec(m, n) = std::polar(target.values(m, n), rng.phase());
  }

  GlaResult result;
  result.convergence.reserve(config.iterations + 1);
  Grid<std::complex<double>> previous;
  std::vector<double> signal;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    signal = synthesize(spec);
    auto consistent = stft_grid(signal, cfg, window);
    if (previous.empty()) previous = consistent;
    const auto& c = consistent.raw();
    const auto& p = previous.raw();
    auto& s = spec.raw();
    double err = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double d = std::sqrt(std::norm(c[i])) - mag[i];
      err += d * d;
      const std::complex<double> t = c[i] + config.momentum * (c[i] - p[i]);
      const double a = std::sqrt(std::norm(t));
      s[i] = a > 0.0 ? t * (mag[i] / a) : std::complex<double>(0.0);
    }
    result.convergence.push_back(energy > 0.0 ? std::sqrt(err / energy) : 0.0);
    previous = std::move(consistent);
  }
  signal = synthesize(spec);
  result.convergence.push_back(spectral_convergence(stft_grid(signal, cfg, window), target.values));
  result.audio = {std::move(signal), target.sample_rate};
  return result;
}

/// Griffin-Lim baseline from a mel spectrogram: warp to linear magnitude, then
/// iterate.
inline GlaResult invert_mel_gla(const MelSpectrogram& mel, const MelFilterbank& fb, const GlaConfig& config,
                                std::optional<std::size_t> length = {}) {
  require(all_finite(mel.values), "mel contains non-finite values");
  return griffin_lim(mel_to_linear(mel, fb), config, length);
}

}  // namespace pgvoc
