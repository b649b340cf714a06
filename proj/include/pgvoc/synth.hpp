// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pgvoc/audio.hpp"
#include "pgvoc/error.hpp"
#include "pgvoc/random.hpp"

namespace pgvoc {

enum class Timbre { PureTone, Rhodes, Organ, Strings, Plucked };

inline std::string to_string(Timbre t) {
  switch (t) {
    case Timbre::PureTone: return "pure";
    case Timbre::Rhodes: return "rhodes";
    case Timbre::Organ: return "organ";
    case Timbre::Strings: return "strings";
    case Timbre::Plucked: return "plucked";
  }
  return "unknown";
}

inline Timbre parse_timbre(const std::string& name) {
  for (Timbre t : {Timbre::PureTone, Timbre::Rhodes, Timbre::Organ, Timbre::Strings, Timbre::Plucked})
    if (to_string(t) == name) return t;
  throw ValidationError("unknown timbre: " + name);
}

/// The four instrument-like presets used for corpus builds.
inline std::vector<Timbre> corpus_timbres() {
  return {Timbre::Rhodes, Timbre::Organ, Timbre::Strings, Timbre::Plucked};
}

/// 12-TET, A4 = 440 Hz.
inline double midi_to_hz(double midi) { return 440.0 * std::pow(2.0, (midi - 69.0) / 12.0); }

struct NoteSpec {
  std::vector<int> midi_pitches;
  double duration = 1.0;
  Timbre timbre = Timbre::Organ;
  double detune_cents = 0.0;
};

namespace detail {

struct TimbreProfile {
  std::vector<double> amplitudes;  ///< per partial, h = 1..size
  double attack = 0.01;            ///< seconds
  double release = 0.05;           ///< seconds
  double decay_base = 0.0;         ///< exp decay rate (1/s) of partial 1
  double decay_per_partial = 0.0;  ///< added rate per partial index
};

inline TimbreProfile timbre_profile(Timbre t) {
  TimbreProfile p;
  switch (t) {
    case Timbre::PureTone:
      p.amplitudes = {1.0};
      p.attack = 0.01;
      p.release = 0.01;
      break;
    case Timbre::Rhodes:
      for (int h = 1; h <= 10; ++h) p.amplitudes.push_back(1.0 / std::pow(h, 1.5));
      p.attack = 0.005;
      p.release = 0.08;
      p.decay_base = 0.8;
      p.decay_per_partial = 0.4;
      break;
    case Timbre::Organ:
      p.amplitudes = {1.0, 0.8, 0.6, 0.5, 0.4, 0.3, 0.2, 0.15, 0.1, 0.08};
      p.attack = 0.02;
      p.release = 0.05;
      break;
    case Timbre::Strings:
      for (int h = 1; h <= 12; ++h) p.amplitudes.push_back(1.0 / h);
      p.attack = 0.08;
      p.release = 0.1;
      break;
    case Timbre::Plucked:
      for (int h = 1; h <= 12; ++h) p.amplitudes.push_back(1.0 / h);
      p.attack = 0.002;
      p.release = 0.05;
      p.decay_base = 1.5;
      p.decay_per_partial = 0.6;
      break;
  }
  return p;
}

inline double envelope(double t, double duration, const TimbreProfile& p) {
  double e = 1.0;
  if (t < p.attack) e = t / p.attack;
  const double tail = duration - t;
  if (tail < p.release) e = std::min(e, std::max(tail, 0.0) / p.release);
  // Raised-cosine shaping keeps the corners smooth.
  return 0.5 - 0.5 * std::cos(std::numbers::pi * e);
}

}  // namespace detail

/// Additive synthesis: every pitch contributes its timbre's partials with
/// seeded random starting phases; partials at or above 0.95 * Nyquist are
/// dropped rather than aliased. The result is peak-normalised to -3 dBFS.
inline AudioBuffer synth_note(const NoteSpec& spec, std::uint32_t sample_rate, std::uint64_t seed) {
  require(sample_rate > 0, "sample rate must be positive");
  require(spec.duration > 0.0, "duration must be positive");
  require(!spec.midi_pitches.empty(), "note needs at least one pitch");
  const auto profile = detail::timbre_profile(spec.timbre);
  const std::size_t length = static_cast<std::size_t>(std::llround(spec.duration * sample_rate));
  const double nyquist = sample_rate / 2.0;
  AudioBuffer out{std::vector<double>(length, 0.0), sample_rate};

  for (std::size_t p = 0; p < spec.midi_pitches.size(); ++p) {
    const double f0 = midi_to_hz(spec.midi_pitches[p]) * std::pow(2.0, spec.detune_cents / 1200.0);
    StreamRng rng(seed, p);
    for (std::size_t h = 1; h <= profile.amplitudes.size(); ++h) {
      const double theta = rng.phase();
      const double f = f0 * static_cast<double>(h);
      if (f >= 0.95 * nyquist) break;
      const double omega = 2.0 * std::numbers::pi * f / sample_rate;
      const double decay = profile.decay_base + profile.decay_per_partial * static_cast<double>(h - 1);
      const double amp = profile.amplitudes[h - 1];
      for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        out.samples[i] += amp * std::exp(-decay * t) * std::sin(omega * static_cast<double>(i) + theta);
      }
    }
  }
  for (std::size_t i = 0; i < length; ++i)
    out.samples[i] *= detail::envelope(static_cast<double>(i) / sample_rate, spec.duration, profile);

  const double pk = peak(out);
  if (pk > 0.0) {
    const double gain = std::pow(10.0, -3.0 / 20.0) / pk;
    for (double& s : out.samples) s *= gain;
  }
  return out;
}

/// A unit impulse (or several) on an otherwise silent buffer.
inline AudioBuffer impulse_signal(std::size_t length, std::span<const std::size_t> positions,
                                  std::uint32_t sample_rate = 44100) {
  AudioBuffer out{std::vector<double>(length, 0.0), sample_rate};
  for (std::size_t p : positions) {
    require(p < length, "impulse position outside signal");
    out.samples[p] = 1.0;
  }
  return out;
}

inline AudioBuffer sine_signal(double hz, std::size_t length, std::uint32_t sample_rate = 44100,
                               double amplitude = 0.5, double phase = 0.0) {
  AudioBuffer out{std::vector<double>(length), sample_rate};
  const double omega = 2.0 * std::numbers::pi * hz / sample_rate;
  for (std::size_t i = 0; i < length; ++i)
    out.samples[i] = amplitude * std::cos(omega * static_cast<double>(i) + phase);
  return out;
}

}  // namespace pgvoc
