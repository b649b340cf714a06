// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgvoc/audio.hpp"
#include "pgvoc/error.hpp"
#include "pgvoc/fft.hpp"
#include "pgvoc/grid.hpp"
#include "pgvoc/parallel.hpp"

namespace pgvoc {

enum class WindowKind { Hann, Rectangular };

inline std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::Hann: return "hann";
    case WindowKind::Rectangular: return "rectangular";
  }
  return "unknown";
}

inline WindowKind parse_window_kind(const std::string& name) {
  if (name == "hann") return WindowKind::Hann;
  if (name == "rectangular" || name == "rect") return WindowKind::Rectangular;
  throw ValidationError("unsupported window kind: " + name);
}

/// Analysis geometry. Frame n is centred on sample n * hop_size (after
/// reflect padding when `center` is set) and its phase is referenced to that
/// centre, so window sample k sits at time offset k - frame_size / 2.
struct StftConfig {
  std::size_t frame_size = 2048;
  std::size_t hop_size = 256;
  std::size_t fft_size = 2048;
  WindowKind window = WindowKind::Hann;
  bool center = true;

  void validate() const {
    require(hop_size > 0, "hop size must be positive");
    require(hop_size <= frame_size, "hop size must not exceed frame size");
    require(frame_size <= fft_size, "fft size must be at least the frame size");
    require(frame_size % 2 == 0, "frame size must be even");
    require(fft_size % 2 == 0, "fft size must be even");
  }

  std::size_t bins() const { return fft_size / 2 + 1; }
  /// Angular frequency of bin m in rad/sample.
  double bin_omega(std::size_t m) const {
    return 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(fft_size);
  }
  double bin_hz(std::size_t m, double sample_rate) const {
    return static_cast<double>(m) * sample_rate / static_cast<double>(fft_size);
  }

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

/// The analysis window plus the two companions reassignment needs: its time
/// derivative (per sample) and the window multiplied by the centred time ramp.
struct WindowSet {
  std::vector<double> window;
  std::vector<double> derivative;
  std::vector<double> time_ramped;
};

inline WindowSet make_window_set(const StftConfig& config) {
  config.validate();
  const std::size_t n = config.frame_size;
  const double size = static_cast<double>(n);
  const double half = size / 2.0;
  WindowSet set{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / size;
    switch (config.window) {
      case WindowKind::Hann:
        // Periodic Hann; the symmetric endpoint is dropped so hops of N/4
        // and finer overlap-add to a constant.
        set.window[k] = 0.5 - 0.5 * std::cos(phase);
        set.derivative[k] = std::numbers::pi / size * std::sin(phase);
        break;
      case WindowKind::Rectangular:
        set.window[k] = 1.0;
        set.derivative[k] = 0.0;
        break;
    }
    set.time_ramped[k] = (static_cast<double>(k) - half) * set.window[k];
  }
  return set;
}

inline std::vector<double> make_window(const StftConfig& config) {
  return make_window_set(config).window;
}

/// Steady-state sum over hops of w^2, one value per phase offset in [0, hop).
inline std::vector<double> overlap_sum_squared(const StftConfig& config) {
  const auto w = make_window(config);
  std::vector<double> sums(config.hop_size, 0.0);
  for (std::size_t k = 0; k < w.size(); ++k) sums[k % config.hop_size] += w[k] * w[k];
  return sums;
}

/// True when the squared window overlap-adds to a constant within `tolerance`
/// (relative).
inline bool satisfies_cola(const StftConfig& config, double tolerance = 1e-10) {
  const auto sums = overlap_sum_squared(config);
  const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
  return *hi > 0.0 && (*hi - *lo) <= tolerance * *hi;
}

struct ComplexSpectrogram {
  Grid<std::complex<double>> data;
  StftConfig config;
  std::uint32_t sample_rate = 44100;
  std::size_t signal_length = 0;

  std::size_t bins() const { return data.bins(); }
  std::size_t frames() const { return data.frames(); }
  double omega(std::size_t m) const { return config.bin_omega(m); }
};

struct MagnitudeSpectrogram {
  Grid<double> values;
  StftConfig config;
  std::uint32_t sample_rate = 44100;

  std::size_t bins() const { return values.bins(); }
  std::size_t frames() const { return values.frames(); }
};

/// Phase as arg X in radians. This is the negative of the e^{-j phi} polar
/// convention; every propagation rule in the library uses arg X.
struct PhaseSpectrogram {
  Grid<double> values;
  StftConfig config;
  std::uint32_t sample_rate = 44100;

  std::size_t bins() const { return values.bins(); }
  std::size_t frames() const { return values.frames(); }
};

inline std::size_t frame_count(std::size_t length, const StftConfig& config) {
  if (config.center) return 1 + length / config.hop_size;
  require(length >= config.frame_size, "signal shorter than one frame");
  return 1 + (length - config.frame_size) / config.hop_size;
}

/// Output length istft produces by default for `frames` frames.
inline std::size_t default_signal_length(std::size_t frames, const StftConfig& config) {
  if (frames == 0) return 0;
  return (frames - 1) * config.hop_size + (config.center ? 0 : config.frame_size);
}

namespace detail {

inline std::vector<double> reflect_pad(std::span<const double> x, std::size_t pad) {
  const std::size_t len = x.size();
  std::vector<double> out(len + 2 * pad);
  for (std::size_t j = 0; j < pad; ++j) out[j] = x[pad - j];
  std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(pad));
  for (std::size_t j = 0; j < pad; ++j) out[pad + len + j] = x[len - 2 - j];
  return out;
}

inline std::vector<double> framing_source(std::span<const double> samples, const StftConfig& config) {
  if (config.center) {
    require(samples.size() > config.frame_size / 2, "signal too short for centred analysis");
    return reflect_pad(samples, config.frame_size / 2);
  }
  require(samples.size() >= config.frame_size, "signal shorter than one frame");
  return {samples.begin(), samples.end()};
}

inline void analyze_frame(std::span<const double> source, std::size_t start,
                          std::span<const double> window, const StftConfig& config,
                          std::span<std::complex<double>> out) {
  RealFft& fft = real_fft(config.fft_size);
  auto buf = fft.time();
  std::fill(buf.begin(), buf.end(), 0.0);
  const std::size_t n = config.frame_size;
  const std::size_t half = n / 2;
  // Rotate so the frame centre lands on index 0: zero phase for an impulse there.
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = k >= half ? k - half : config.fft_size - half + k;
    buf[idx] = source[start + k] * window[k];
  }
  fft.forward();
  auto spec = fft.spectrum();
  std::copy(spec.begin(), spec.end(), out.begin());
}

}  // namespace detail

namespace detail {

/// Frames an already padded source (frame n starts at n * hop).
inline Grid<std::complex<double>> stft_frames(std::span<const double> source, std::size_t frames,
                                              const StftConfig& config, std::span<const double> window) {
  Grid<std::complex<double>> grid(config.bins(), frames);
  parallel_for(frames, [&](std::size_t n) {
    analyze_frame(source, n * config.hop_size, window, config, grid.frame(n));
  });
  return grid;
}

}  // namespace detail

/// STFT with an explicit window (length frame_size). Used directly for the
/// derivative and time-ramped reassignment windows.
inline Grid<std::complex<double>> stft_grid(std::span<const double> samples, const StftConfig& config,
                                            std::span<const double> window) {
  config.validate();
  require(window.size() == config.frame_size, "window length differs from frame size");
  const auto source = detail::framing_source(samples, config);
  return detail::stft_frames(source, frame_count(samples.size(), config), config, window);
}

inline ComplexSpectrogram stft(const AudioBuffer& audio, const StftConfig& config) {
  audio.validate();
  const auto window = make_window(config);
  return {stft_grid(audio.samples, config, window), config, audio.sample_rate, audio.size()};
}

/// Precomputed overlap-add for one (frame count, output length) pair.
/// Output sample t is sum_n w[t - nR] y_n[t - nR] / sum_n w^2[t - nR];
/// samples without window support are zero.
class OverlapAdd {
 public:
  OverlapAdd(const StftConfig& config, std::size_t frames, std::size_t length)
      : config_(config), frames_(frames), length_(length) {
    config.validate();
    window_ = make_window(config);
    const auto sums = overlap_sum_squared(config);
    const double steady = *std::max_element(sums.begin(), sums.end());
    if (*std::min_element(sums.begin(), sums.end()) < 1e-6 * steady)
      throw ValidationError("window/hop pair violates overlap-add coverage");
    const double scale = 1.0 / static_cast<double>(config.fft_size);
    synth_window_.resize(window_.size());
    for (std::size_t k = 0; k < window_.size(); ++k) synth_window_[k] = window_[k] * scale;

    const std::size_t n = config.frame_size;
    span_ = frames == 0 ? 0 : (frames - 1) * config.hop_size + n;
    std::vector<double> wsum(span_, 0.0);
    for (std::size_t f = 0; f < frames; ++f)
      for (std::size_t k = 0; k < n; ++k) wsum[f * config.hop_size + k] += window_[k] * window_[k];
    offset_ = config.center ? n / 2 : 0;
    inv_norm_.assign(length, 0.0);
    const double floor = 1e-8 * steady;
    for (std::size_t t = 0; t < length; ++t) {
      const std::size_t j = t + offset_;
      if (j < span_ && wsum[j] > floor) inv_norm_[t] = 1.0 / wsum[j];
    }
  }

  std::size_t frames() const { return frames_; }
  std::size_t length() const { return length_; }
  const StftConfig& config() const { return config_; }
  const std::vector<double>& window() const { return window_; }

  std::vector<double> operator()(const Grid<std::complex<double>>& spec) const {
    require(spec.bins() == config_.bins() && spec.frames() == frames_,
            "grid mismatch: spectrogram shape differs from synthesis plan");
    std::vector<double> acc(span_, 0.0);
    const std::size_t n = config_.frame_size;
    if (thread_count() <= 1) {
      for (std::size_t f = 0; f < frames_; ++f) {
        double* dst = acc.data() + f * config_.hop_size;
        synthesize_frame(spec.frame(f), [&](std::size_t k, double v) { dst[k] += v; });
      }
    } else {
      // Summed in frame order afterwards so the result matches the sequential path.
      Grid<double> segments(n, frames_);
      parallel_for(frames_, [&](std::size_t f) {
        auto seg = segments.frame(f);
        synthesize_frame(spec.frame(f), [&](std::size_t k, double v) { seg[k] = v; });
      });
      for (std::size_t f = 0; f < frames_; ++f) {
        const auto seg = segments.frame(f);
        double* dst = acc.data() + f * config_.hop_size;
        for (std::size_t k = 0; k < n; ++k) dst[k] += seg[k];
      }
    }
    std::vector<double> out(length_, 0.0);
    for (std::size_t t = 0; t < length_; ++t) {
      const std::size_t j = t + offset_;
      if (j < span_) out[t] = acc[j] * inv_norm_[t];
    }
    return out;
  }

 private:
  template <typename Sink>
  void synthesize_frame(std::span<const std::complex<double>> in, Sink&& sink) const {
    RealFft& fft = real_fft(config_.fft_size);
    auto s = fft.spectrum();
    std::copy(in.begin(), in.end(), s.begin());
    s.front().imag(0.0);
    s.back().imag(0.0);
    fft.inverse_unscaled();
    const auto t = fft.time();
    const std::size_t n = config_.frame_size, half = n / 2;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t idx = k >= half ? k - half : config_.fft_size - half + k;
      sink(k, t[idx] * synth_window_[k]);
    }
  }

  StftConfig config_;
  std::size_t frames_ = 0;
  std::size_t length_ = 0;
  std::size_t span_ = 0;
  std::size_t offset_ = 0;
  std::vector<double> window_;
  std::vector<double> synth_window_;
  std::vector<double> inv_norm_;
};

/// Least-squares overlap-add inverse of a complex spectrogram.
inline AudioBuffer istft(const ComplexSpectrogram& spec, std::optional<std::size_t> length = {}) {
  require(spec.bins() == spec.config.bins(), "grid mismatch: spectrogram bins differ from config");
  const std::size_t len = length.value_or(default_signal_length(spec.frames(), spec.config));
  return {OverlapAdd(spec.config, spec.frames(), len)(spec.data), spec.sample_rate};
}

inline ComplexSpectrogram combine(const MagnitudeSpectrogram& magnitude, const PhaseSpectrogram& phase) {
  require_same_shape(magnitude.values, phase.values, "magnitude vs phase");
  require(magnitude.config == phase.config, "grid mismatch: magnitude and phase configs differ");
  ComplexSpectrogram out{Grid<std::complex<double>>(magnitude.bins(), magnitude.frames()), magnitude.config,
                         magnitude.sample_rate, default_signal_length(magnitude.frames(), magnitude.config)};
  auto& dst = out.data.raw();
  const auto& m = magnitude.values.raw();
  const auto& p = phase.values.raw();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::polar(m[i], p[i]);
  return out;
}

inline AudioBuffer istft(const MagnitudeSpectrogram& magnitude, const PhaseSpectrogram& phase,
                         std::optional<std::size_t> length = {}) {
  return istft(combine(magnitude, phase), length);
}

inline MagnitudeSpectrogram magnitude(const ComplexSpectrogram& spec) {
  MagnitudeSpectrogram out{Grid<double>(spec.bins(), spec.frames()), spec.config, spec.sample_rate};
  auto& dst = out.values.raw();
  const auto& src = spec.data.raw();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::sqrt(std::norm(src[i]));
  return out;
}

inline PhaseSpectrogram phase(const ComplexSpectrogram& spec) {
  PhaseSpectrogram out{Grid<double>(spec.bins(), spec.frames()), spec.config, spec.sample_rate};
  auto& dst = out.values.raw();
  const auto& src = spec.data.raw();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::arg(src[i]);
  return out;
}

/// Wraps an angle to [-pi, pi].
inline double wrap_phase(double x) { return std::remainder(x, 2.0 * std::numbers::pi); }

}  // namespace pgvoc
