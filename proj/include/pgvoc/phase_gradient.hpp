// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pgvoc/audio.hpp"
#include "pgvoc/error.hpp"
#include "pgvoc/fft.hpp"
#include "pgvoc/grid.hpp"
#include "pgvoc/parallel.hpp"
#include "pgvoc/stft.hpp"

namespace pgvoc {

enum class GradientBackend { AugerFlandrin, FiniteDifference };

inline std::string to_string(GradientBackend b) {
  return b == GradientBackend::AugerFlandrin ? "auger-flandrin" : "finite-difference";
}

inline GradientBackend parse_gradient_backend(const std::string& name) {
  if (name == "auger-flandrin") return GradientBackend::AugerFlandrin;
  if (name == "finite-difference") return GradientBackend::FiniteDifference;
  throw ValidationError("unsupported gradient backend: " + name);
}

/// Largest |delta_m| kept in a triple, in bins.
inline constexpr double kMaxBinOffset = 4.0;

/// Largest |delta_n| kept in a triple, in frames: N / (2R).
inline double max_frame_offset(const StftConfig& config) {
  return static_cast<double>(config.frame_size) / (2.0 * static_cast<double>(config.hop_size));
}

/// Cells whose magnitude is more than `rel_db` below the grid maximum (or
/// exactly zero). Stored as 0/1 bytes on the same grid.
inline Grid<unsigned char> silence_mask(const Grid<double>& magnitude, double rel_db) {
  double peak = 0.0;
  for (double v : magnitude.raw()) peak = std::max(peak, v);
  const double threshold = peak * std::pow(10.0, rel_db / 20.0);
  Grid<unsigned char> mask(magnitude.bins(), magnitude.frames(), 1);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask.raw()[i] = (peak == 0.0 || magnitude.raw()[i] <= threshold) ? 1 : 0;
  return mask;
}

/// Time derivative (instantaneous frequency, rad/sample) and frequency
/// derivative (rad/bin) of arg X, on the STFT grid.
struct PhaseGradients {
  Grid<double> inst_freq;
  Grid<double> freq_derivative;
  ComplexSpectrogram spectrum;
};

namespace detail {

inline void neutral_fill(PhaseGradients& g, const Grid<unsigned char>& silent) {
  const auto& cfg = g.spectrum.config;
  for (std::size_t n = 0; n < silent.frames(); ++n)
    for (std::size_t m = 0; m < silent.bins(); ++m)
      if (silent(m, n)) {
        g.inst_freq(m, n) = cfg.bin_omega(m);
        g.freq_derivative(m, n) = 0.0;
      }
}

inline constexpr std::size_t kHilbertHalfLength = 4096;
inline constexpr double kHilbertKaiserBeta = 10.0;

/// Quadrature component of x: linear convolution with a Kaiser-windowed ideal
/// Hilbert kernel of 2 * kHilbertHalfLength + 1 taps. The finite support keeps
/// the result exactly shift-covariant away from the ends.
inline std::vector<double> hilbert(std::span<const double> x) {
  const std::size_t half = kHilbertHalfLength;
  std::size_t size = 1;
  while (size < x.size() + 2 * half) size *= 2;
  const double norm_i0 = std::cyl_bessel_i(0.0, kHilbertKaiserBeta);
  RealFft fft(size);
  auto kernel = fft.time();
  std::fill(kernel.begin(), kernel.end(), 0.0);
  for (std::size_t k = 1; k <= half; k += 2) {
    const double r = static_cast<double>(k) / static_cast<double>(half);
    const double w = std::cyl_bessel_i(0.0, kHilbertKaiserBeta * std::sqrt(1.0 - r * r)) / norm_i0;
    const double h = 2.0 / (std::numbers::pi * static_cast<double>(k)) * w;
    kernel[k] = h;
    kernel[size - k] = -h;
  }
  fft.forward();
  const std::vector<std::complex<double>> response(fft.spectrum().begin(), fft.spectrum().end());
  std::fill(kernel.begin(), kernel.end(), 0.0);
  std::copy(x.begin(), x.end(), kernel.begin());
  fft.forward();
  auto s = fft.spectrum();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= response[i];
  fft.inverse();
  return {fft.time().begin(), fft.time().begin() + static_cast<std::ptrdiff_t>(x.size())};
}

/// The frequency ratio is taken on the analytic signal: with the real signal
/// the negative-frequency image biases low partials by up to ~0.2 %. The time
/// ratio stays on the real signal, where it is exact for impulses at every
/// bin (the analytic spectrum is truncated at DC and Nyquist).
inline PhaseGradients auger_flandrin(const AudioBuffer& audio, const StftConfig& config, double silence_rel_db) {
  config.validate();
  const auto windows = make_window_set(config);
  const auto source = framing_source(audio.samples, config);
  const auto quadrature = hilbert(source);
  const std::size_t frames = frame_count(audio.size(), config);
  const auto analytic = [&](std::span<const double> w, Grid<std::complex<double>> re) {
    const auto im = stft_frames(quadrature, frames, config, w);
    for (std::size_t i = 0; i < re.size(); ++i) re.raw()[i] += std::complex<double>(0.0, 1.0) * im.raw()[i];
    return re;
  };
  PhaseGradients g;
  g.spectrum = {stft_frames(source, frames, config, windows.window), config, audio.sample_rate, audio.size()};
  const auto x_t = stft_frames(source, frames, config, windows.time_ramped);
  const auto a_h = analytic(windows.window, g.spectrum.data);
  const auto a_d = analytic(windows.derivative, stft_frames(source, frames, config, windows.derivative));
  const std::size_t bins = g.spectrum.bins();
  g.inst_freq = Grid<double>(bins, frames);
  g.freq_derivative = Grid<double>(bins, frames);
  const auto silent = silence_mask(magnitude(g.spectrum).values, silence_rel_db);
  const double fft_size = static_cast<double>(config.fft_size);
  parallel_for(frames, [&](std::size_t n) {
    for (std::size_t m = 0; m < bins; ++m) {
      if (silent(m, n)) continue;
      const std::complex<double> x = g.spectrum.data(m, n), xa = a_h(m, n);
      const double energy = std::norm(x), energy_a = std::norm(xa);
      // X_Dh / X_h gives j(omega_bin - omega_true); X_Th / X_h gives the
      // time offset (samples) of the energy centroid from the frame centre.
      const double freq_shift = energy_a > 0.0 ? (a_d(m, n) * std::conj(xa)).imag() / energy_a : 0.0;
      const double time_offset = (x_t(m, n) * std::conj(x)).real() / energy;
      g.inst_freq(m, n) = config.bin_omega(m) - freq_shift;
      g.freq_derivative(m, n) = -2.0 * std::numbers::pi * time_offset / fft_size;
    }
  });
  neutral_fill(g, silent);
  return g;
}

inline PhaseGradients finite_difference(const AudioBuffer& audio, const StftConfig& config, double silence_rel_db) {
  PhaseGradients g;
  g.spectrum = stft(audio, config);
  const std::size_t bins = g.spectrum.bins(), frames = g.spectrum.frames();
  const auto ph = phase(g.spectrum).values;
  const auto silent = silence_mask(magnitude(g.spectrum).values, silence_rel_db);
  g.inst_freq = Grid<double>(bins, frames);
  g.freq_derivative = Grid<double>(bins, frames);
  const double hop = static_cast<double>(config.hop_size);
  parallel_for(frames, [&](std::size_t n) {
    for (std::size_t m = 0; m < bins; ++m) {
      if (silent(m, n)) continue;
      // Heterodyne: remove the bin's nominal advance before wrapping so that
      // offsets up to N/(2R) bins are unambiguous.
      const double expected = config.bin_omega(m) * hop;
      double acc = 0.0;
      int count = 0;
      if (n + 1 < frames && !silent(m, n + 1)) {
        acc += wrap_phase(ph(m, n + 1) - ph(m, n) - expected);
        ++count;
      }
      if (n > 0 && !silent(m, n - 1)) {
        acc += wrap_phase(ph(m, n) - ph(m, n - 1) - expected);
        ++count;
      }
      g.inst_freq(m, n) = config.bin_omega(m) + (count ? acc / (count * hop) : 0.0);

      acc = 0.0;
      count = 0;
      if (m + 1 < bins && !silent(m + 1, n)) {
        acc += wrap_phase(ph(m + 1, n) - ph(m, n));
        ++count;
      }
      if (m > 0 && !silent(m - 1, n)) {
        acc += wrap_phase(ph(m, n) - ph(m - 1, n));
        ++count;
      }
      g.freq_derivative(m, n) = count ? acc / count : 0.0;
    }
  });
  neutral_fill(g, silent);
  return g;
}

}  // namespace detail

/// Phase gradients of `audio`. Cells more than `silence_rel_db` below the
/// spectrogram peak get the neutral values (bin frequency, zero slope).
inline PhaseGradients phase_gradients(const AudioBuffer& audio, const StftConfig& config,
                                      GradientBackend backend = GradientBackend::AugerFlandrin,
                                      double silence_rel_db = -100.0) {
  audio.validate();
  config.validate();
  return backend == GradientBackend::AugerFlandrin ? detail::auger_flandrin(audio, config, silence_rel_db)
                                                   : detail::finite_difference(audio, config, silence_rel_db);
}

struct BinOffsets {
  Grid<double> delta_m;  ///< frequency offset, bins
  Grid<double> delta_n;  ///< time offset, frames
};

/// Converts gradients to grid offsets. With `clip` the offsets are limited to
/// +-kMaxBinOffset bins and +-N/(2R) frames.
inline BinOffsets bin_offsets(const Grid<double>& inst_freq, const Grid<double>& freq_derivative,
                              const StftConfig& config, bool clip = true) {
  require_same_shape(inst_freq, freq_derivative, "instantaneous frequency vs frequency derivative");
  const double to_bins = static_cast<double>(config.fft_size) / (2.0 * std::numbers::pi);
  const double to_frames = to_bins / static_cast<double>(config.hop_size);
  const double max_dn = max_frame_offset(config);
  BinOffsets out{Grid<double>(inst_freq.bins(), inst_freq.frames()),
                 Grid<double>(inst_freq.bins(), inst_freq.frames())};
  for (std::size_t n = 0; n < inst_freq.frames(); ++n) {
    for (std::size_t m = 0; m < inst_freq.bins(); ++m) {
      double dm = (inst_freq(m, n) - config.bin_omega(m)) * to_bins;
      double dn = -freq_derivative(m, n) * to_frames;
      if (clip) {
        dm = std::clamp(dm, -kMaxBinOffset, kMaxBinOffset);
        dn = std::clamp(dn, -max_dn, max_dn);
      }
      out.delta_m(m, n) = dm;
      out.delta_n(m, n) = dn;
    }
  }
  return out;
}

inline BinOffsets bin_offsets(const PhaseGradients& g, bool clip = true) {
  return bin_offsets(g.inst_freq, g.freq_derivative, g.spectrum.config, clip);
}

/// Inverse of bin_offsets for one cell: instantaneous frequency (rad/sample).
inline double inst_freq_from_offset(double delta_m, std::size_t m, const StftConfig& config) {
  return 2.0 * std::numbers::pi * (static_cast<double>(m) + delta_m) / static_cast<double>(config.fft_size);
}

/// Inverse of bin_offsets for one cell: frequency derivative (rad/bin).
inline double freq_derivative_from_offset(double delta_n, const StftConfig& config) {
  return -2.0 * std::numbers::pi * static_cast<double>(config.hop_size) * delta_n /
         static_cast<double>(config.fft_size);
}

/// Magnitude plus the two offset channels: the shift-invariant target space.
struct SpectralTriple {
  Grid<double> magnitude;
  Grid<double> delta_m;
  Grid<double> delta_n;
  StftConfig config;
  std::uint32_t sample_rate = 44100;

  std::size_t bins() const { return magnitude.bins(); }
  std::size_t frames() const { return magnitude.frames(); }

  void validate() const {
    config.validate();
    require_same_shape(magnitude, delta_m, "magnitude vs delta_m");
    require_same_shape(magnitude, delta_n, "magnitude vs delta_n");
    require(magnitude.bins() == config.bins(), "grid mismatch: triple bins differ from config");
    const double max_dn = max_frame_offset(config);
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
      const double m = magnitude.raw()[i], dm = delta_m.raw()[i], dn = delta_n.raw()[i];
      if (!std::isfinite(m) || !std::isfinite(dm) || !std::isfinite(dn))
        throw ValidationError("triple contains non-finite values");
      if (m < 0.0) throw ValidationError("triple magnitude is negative");
      if (std::abs(dm) > kMaxBinOffset + 1e-9 || std::abs(dn) > max_dn + 1e-9)
        throw ValidationError("triple offsets exceed clip bounds");
    }
  }
};

/// Reassigned position of every cell, in fractional bins and frames.
struct ReassignedCoords {
  Grid<double> freq;
  Grid<double> time;
};

inline ReassignedCoords reassignment_coords(const Grid<double>& delta_m, const Grid<double>& delta_n) {
  require_same_shape(delta_m, delta_n, "delta_m vs delta_n");
  ReassignedCoords c{delta_m, delta_n};
  for (std::size_t n = 0; n < delta_m.frames(); ++n)
    for (std::size_t m = 0; m < delta_m.bins(); ++m) {
      c.freq(m, n) += static_cast<double>(m);
      c.time(m, n) += static_cast<double>(n);
    }
  return c;
}

/// Sinusoidal (1) versus impulsive (0) score per cell.
struct ComponentMap {
  Grid<double> lambda;
};

/// Denominators |d(time)/dn| below this are treated as a collapsed temporal
/// reassignment and scored 0.
inline constexpr double kLambdaDivEpsilon = 1e-6;

/// lambda = exp(-((d freq / dm) / (d time / dn))^2) with centred differences
/// (one-sided on the borders). Cells flagged in `silent` score 0.
inline ComponentMap lambda_map(const ReassignedCoords& coords, const Grid<unsigned char>* silent = nullptr) {
  require_same_shape(coords.freq, coords.time, "reassigned frequency vs time");
  const std::size_t bins = coords.freq.bins(), frames = coords.freq.frames();
  if (silent) require_same_shape(coords.freq, *silent, "coordinates vs silence mask");
  ComponentMap out{Grid<double>(bins, frames, 0.0)};
  auto diff = [](double lo, double hi, double span) { return (hi - lo) / span; };
  parallel_for(frames, [&](std::size_t n) {
    for (std::size_t m = 0; m < bins; ++m) {
      if (silent && (*silent)(m, n)) continue;
      double d_freq = 0.0, d_time = 0.0;
      if (bins > 1) {
        const std::size_t lo = m == 0 ? 0 : m - 1, hi = m + 1 == bins ? m : m + 1;
        d_freq = diff(coords.freq(lo, n), coords.freq(hi, n), static_cast<double>(hi - lo));
      }
      if (frames > 1) {
        const std::size_t lo = n == 0 ? 0 : n - 1, hi = n + 1 == frames ? n : n + 1;
        d_time = diff(coords.time(m, lo), coords.time(m, hi), static_cast<double>(hi - lo));
      }
      if (std::abs(d_time) < kLambdaDivEpsilon) continue;
      const double ratio = d_freq / d_time;
      out.lambda(m, n) = std::exp(-ratio * ratio);
    }
  });
  return out;
}

/// Triple and component map computed from reference audio. Lambda is taken
/// from the unclipped offsets; the stored offsets are clipped.
struct OracleAnalysis {
  SpectralTriple triple;
  ComponentMap lambda;
};

inline OracleAnalysis analyze_triple(const AudioBuffer& audio, const StftConfig& config,
                                     GradientBackend backend = GradientBackend::AugerFlandrin,
                                     double silence_rel_db = -100.0) {
  const auto g = phase_gradients(audio, config, backend, silence_rel_db);
  const auto mag = magnitude(g.spectrum);
  const auto raw = bin_offsets(g, false);
  const auto silent = silence_mask(mag.values, silence_rel_db);
  auto lambda = lambda_map(reassignment_coords(raw.delta_m, raw.delta_n), &silent);
  auto clipped = bin_offsets(g, true);
  return {SpectralTriple{mag.values, std::move(clipped.delta_m), std::move(clipped.delta_n), config,
                         audio.sample_rate},
          std::move(lambda)};
}

}  // namespace pgvoc
