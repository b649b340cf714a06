// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgvoc/error.hpp"
#include "pgvoc/grid.hpp"
#include "pgvoc/stft.hpp"

namespace pgvoc {

enum class MelScale { Htk, Slaney };

inline std::string to_string(MelScale s) { return s == MelScale::Htk ? "htk" : "slaney"; }

inline MelScale parse_mel_scale(const std::string& name) {
  if (name == "htk") return MelScale::Htk;
  if (name == "slaney") return MelScale::Slaney;
  throw ValidationError("unsupported mel scale: " + name);
}

inline double hz_to_mel(double hz, MelScale scale) {
  if (scale == MelScale::Htk) return 2595.0 * std::log10(1.0 + hz / 700.0);
  // Slaney: linear below 1 kHz, logarithmic above.
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return hz < min_log_hz ? hz / f_sp : min_log_mel + std::log(hz / min_log_hz) / logstep;
}

inline double mel_to_hz(double mel, MelScale scale) {
  if (scale == MelScale::Htk) return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return mel < min_log_mel ? mel * f_sp : min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

struct MelConfig {
  std::size_t n_mels = 96;
  double f_min = 0.0;
  double f_max = 22050.0;
  MelScale scale = MelScale::Htk;
  double floor = 1e-10;

  friend bool operator==(const MelConfig&, const MelConfig&) = default;
};

/// Triangular filters on the linear bins. Each band keeps only its non-zero
/// span: weights[b][j] applies to linear bin first_bin[b] + j.
struct MelFilterbank {
  MelConfig config;
  std::size_t bins = 0;
  std::vector<std::size_t> first_bin;
  std::vector<std::vector<double>> weights;
  std::vector<double> centers_hz;

  std::size_t n_mels() const { return weights.size(); }

  double weight(std::size_t band, std::size_t bin) const {
    const std::size_t first = first_bin[band];
    if (bin < first || bin >= first + weights[band].size()) return 0.0;
    return weights[band][bin - first];
  }

  double band_sum(std::size_t band) const {
    double s = 0.0;
    for (double w : weights[band]) s += w;
    return s;
  }
};

inline MelFilterbank make_mel_filterbank(const MelConfig& config, const StftConfig& stft_config,
                                         std::uint32_t sample_rate) {
  require(config.n_mels > 0, "n_mels must be positive");
  require(config.f_min >= 0.0 && config.f_min < config.f_max, "mel range must satisfy 0 <= f_min < f_max");
  require(config.f_max <= sample_rate / 2.0 + 1e-9, "f_max above Nyquist");
  require(config.floor > 0.0, "mel floor must be positive");

  MelFilterbank fb;
  fb.config = config;
  fb.bins = stft_config.bins();
  const double mel_lo = hz_to_mel(config.f_min, config.scale);
  const double mel_hi = hz_to_mel(config.f_max, config.scale);
  std::vector<double> edges(config.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (config.n_mels + 1), config.scale);

  for (std::size_t b = 0; b < config.n_mels; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    fb.centers_hz.push_back(mid);
    std::vector<double> band;
    std::size_t first = 0;
    bool started = false;
    for (std::size_t k = 0; k < fb.bins; ++k) {
      const double f = stft_config.bin_hz(k, sample_rate);
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      if (w > 0.0) {
        if (!started) {
          first = k;
          started = true;
        }
        band.resize(k - first + 1, 0.0);
        band[k - first] = w;
      }
    }
    fb.first_bin.push_back(first);
    fb.weights.push_back(std::move(band));
  }
  return fb;
}

/// log10 of floored mel power, laid out [band, frame].
struct MelSpectrogram {
  Grid<double> values;
  StftConfig config;
  std::uint32_t sample_rate = 44100;
  double floor = 1e-10;

  std::size_t bands() const { return values.bins(); }
  std::size_t frames() const { return values.frames(); }
};

inline MelSpectrogram mel_forward(const MagnitudeSpectrogram& magnitude, const MelFilterbank& fb) {
  require(magnitude.bins() == fb.bins, "dimension mismatch: magnitude bins vs filterbank");
  MelSpectrogram mel{Grid<double>(fb.n_mels(), magnitude.frames()), magnitude.config, magnitude.sample_rate,
                     fb.config.floor};
  parallel_for(magnitude.frames(), [&](std::size_t n) {
    const auto mag = magnitude.values.frame(n);
    auto out = mel.values.frame(n);
    for (std::size_t b = 0; b < fb.n_mels(); ++b) {
      double power = 0.0;
      const auto& w = fb.weights[b];
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double m = mag[fb.first_bin[b] + j];
        power += w[j] * m * m;
      }
      out[b] = std::log10(std::max(power, fb.config.floor));
    }
  });
  return mel;
}

/// Direct-path warp back to linear bins through the normalised transpose of
/// the filterbank: each band's power is spread over its support in proportion
/// to the filter weight, divided by the band's weight sum. Non-negative.
inline MagnitudeSpectrogram mel_to_linear(const MelSpectrogram& mel, const MelFilterbank& fb) {
  require(mel.bands() == fb.n_mels(), "dimension mismatch: mel bands vs filterbank");
  require(mel.config.bins() == fb.bins, "dimension mismatch: mel config bins vs filterbank");
  std::vector<double> inv_sum(fb.n_mels(), 0.0);
  for (std::size_t b = 0; b < fb.n_mels(); ++b) {
    const double s = fb.band_sum(b);
    inv_sum[b] = s > 0.0 ? 1.0 / s : 0.0;
  }
  MagnitudeSpectrogram out{Grid<double>(fb.bins, mel.frames()), mel.config, mel.sample_rate};
  parallel_for(mel.frames(), [&](std::size_t n) {
    const auto in = mel.values.frame(n);
    auto power = out.values.frame(n);
    for (std::size_t b = 0; b < fb.n_mels(); ++b) {
      const double p = std::pow(10.0, in[b]) * inv_sum[b];
      const auto& w = fb.weights[b];
      for (std::size_t j = 0; j < w.size(); ++j) power[fb.first_bin[b] + j] += w[j] * p;
    }
    for (double& v : power) v = std::sqrt(std::max(v, 0.0));
  });
  return out;
}

/// Per-band standardisation statistics over a corpus of mel spectrograms.
struct MelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

inline MelStats compute_mel_stats(std::span<const MelSpectrogram> corpus) {
  require(!corpus.empty(), "mel statistics need at least one spectrogram");
  const std::size_t bands = corpus.front().bands();
  std::vector<double> sum(bands, 0.0), sum_sq(bands, 0.0);
  double count = 0.0;
  for (const auto& mel : corpus) {
    require(mel.bands() == bands, "dimension mismatch: mel band counts differ across corpus");
    for (std::size_t n = 0; n < mel.frames(); ++n) {
      const auto f = mel.values.frame(n);
      for (std::size_t b = 0; b < bands; ++b) {
        sum[b] += f[b];
        sum_sq[b] += f[b] * f[b];
      }
    }
    count += static_cast<double>(mel.frames());
  }
  require(count > 0.0, "mel statistics need at least one frame");
  MelStats stats{std::vector<double>(bands), std::vector<double>(bands)};
  for (std::size_t b = 0; b < bands; ++b) {
    stats.mean[b] = sum[b] / count;
    stats.stddev[b] = std::sqrt(std::max(sum_sq[b] / count - stats.mean[b] * stats.mean[b], 0.0));
  }
  return stats;
}

}  // namespace pgvoc
