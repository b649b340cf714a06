// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgvoc/audio.hpp"
#include "pgvoc/error.hpp"
#include "pgvoc/phase_gradient.hpp"
#include "pgvoc/random.hpp"
#include "pgvoc/stft.hpp"

namespace pgvoc {

enum class IntegrationRule { Forward, Trapezoidal };

inline std::string to_string(IntegrationRule r) { return r == IntegrationRule::Forward ? "forward" : "trapezoidal"; }

inline IntegrationRule parse_integration_rule(const std::string& name) {
  if (name == "forward") return IntegrationRule::Forward;
  if (name == "trapezoidal") return IntegrationRule::Trapezoidal;
  throw ValidationError("unsupported integration rule: " + name);
}

struct IntegrationConfig {
  double lambda_impulsive = 0.4;
  double lambda_sinusoidal = 0.5;
  std::uint64_t rng_seed = 0;
  double silence_rel_db = -100.0;
  IntegrationRule rule = IntegrationRule::Forward;

  void validate() const {
    require(0.0 <= lambda_impulsive && lambda_impulsive <= lambda_sinusoidal && lambda_sinusoidal <= 1.0,
            "thresholds must satisfy 0 <= lambda_impulsive <= lambda_sinusoidal <= 1");
    require(std::isfinite(silence_rel_db), "silence threshold must be finite");
  }

  friend bool operator==(const IntegrationConfig&, const IntegrationConfig&) = default;
};

/// How each cell received its phase.
enum class CellKind : unsigned char { Random, Silent, Horizontal, Vertical };

/// Rebuilds phase frame by frame. In frame n+1, a bin scored above the
/// sinusoidal threshold advances its own phase from frame n by R times its
/// instantaneous frequency; a bin below the impulsive threshold takes the
/// phase of bin m-1 in the same frame plus the frequency derivative; all
/// other bins, silent bins and the whole of frame 0 get seeded uniform
/// random phase. Bins are visited in ascending order, so a vertical run
/// starts from whatever bin lies directly below it. A run whose lower
/// neighbour is silent (or which starts at bin 0) is seeded at random.
///
/// `kinds`, when given, receives the classification of every cell.
inline PhaseSpectrogram integrate_phase(const SpectralTriple& triple, const ComponentMap& lambda,
                                        const IntegrationConfig& config,
                                        Grid<CellKind>* kinds = nullptr) {
  config.validate();
  triple.validate();
  require_same_shape(triple.magnitude, lambda.lambda, "triple vs lambda");
  const std::size_t bins = triple.bins(), frames = triple.frames();
  const StftConfig& stft_cfg = triple.config;
  const double hop = static_cast<double>(stft_cfg.hop_size);
  const auto silent = silence_mask(triple.magnitude, config.silence_rel_db);

  PhaseSpectrogram out{Grid<double>(bins, frames, 0.0), stft_cfg, triple.sample_rate};
  if (kinds) *kinds = Grid<CellKind>(bins, frames, CellKind::Random);
  std::vector<double> noise(bins);

  auto inst_freq = [&](std::size_t m, std::size_t n) {
    return inst_freq_from_offset(triple.delta_m(m, n), m, stft_cfg);
  };
  auto freq_slope = [&](std::size_t m, std::size_t n) {
    return freq_derivative_from_offset(triple.delta_n(m, n), stft_cfg);
  };

  for (std::size_t n = 0; n < frames; ++n) {
    // One stream per frame, drawn for every bin, so the fill never depends on
    // how cells were classified or on evaluation order.
    StreamRng rng(config.rng_seed, n);
    for (auto& v : noise) v = rng.phase();

    auto cur = out.values.frame(n);
    for (std::size_t m = 0; m < bins; ++m) {
      CellKind kind = CellKind::Random;
      double value = noise[m];
      if (silent(m, n)) {
        kind = CellKind::Silent;
      } else if (n > 0) {
        const double l = lambda.lambda(m, n);
        if (l > config.lambda_sinusoidal) {
          double advance = hop * inst_freq(m, n - 1);
          if (config.rule == IntegrationRule::Trapezoidal)
            advance = 0.5 * hop * (inst_freq(m, n - 1) + inst_freq(m, n));
          value = wrap_phase(out.values(m, n - 1) + advance);
          kind = CellKind::Horizontal;
        } else if (l < config.lambda_impulsive && m > 0 && !silent(m - 1, n)) {
          double step = freq_slope(m - 1, n);
          if (config.rule == IntegrationRule::Trapezoidal) step = 0.5 * (step + freq_slope(m, n));
          value = wrap_phase(cur[m - 1] + step);
          kind = CellKind::Vertical;
        }
      }
      cur[m] = value;
      if (kinds) (*kinds)(m, n) = kind;
    }
  }
  return out;
}

/// Lambda recomputed from a triple's own (clipped) offsets.
inline ComponentMap lambda_from_triple(const SpectralTriple& triple, double silence_rel_db = -100.0) {
  const auto silent = silence_mask(triple.magnitude, silence_rel_db);
  return lambda_map(reassignment_coords(triple.delta_m, triple.delta_n), &silent);
}

/// Triple -> audio: lambda (from the triple unless supplied), phase
/// integration, inverse STFT. Deterministic for a fixed seed.
inline AudioBuffer resynthesize(const SpectralTriple& triple, const IntegrationConfig& config,
                                const ComponentMap* lambda = nullptr,
                                std::optional<std::size_t> length = {}) {
  const ComponentMap own = lambda ? ComponentMap{} : lambda_from_triple(triple, config.silence_rel_db);
  const auto phase = integrate_phase(triple, lambda ? *lambda : own, config);
  const MagnitudeSpectrogram mag{triple.magnitude, triple.config, triple.sample_rate};
  return istft(mag, phase, length);
}

}  // namespace pgvoc
