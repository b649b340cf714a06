// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pgvoc/audio.hpp"
#include "pgvoc/corpus.hpp"
#include "pgvoc/error.hpp"
#include "pgvoc/grid.hpp"
#include "pgvoc/stft.hpp"
#include "pgvoc/synth.hpp"

namespace pgvoc {

/// Analysis used for partial tracking: 4096-sample Hann frames, hop 256.
struct TrackingConfig {
  StftConfig analysis{4096, 256, 4096, WindowKind::Hann, true};
  double search_semitones = 0.5;
  /// Frames whose centre lies within this many seconds of either end are
  /// not scored (attack and release are not sustained).
  double trim_seconds = 0.1;
  /// Fundamental plus four harmonics.
  std::size_t partials = 5;
};

inline MagnitudeSpectrogram tracking_spectrogram(const AudioBuffer& audio, const TrackingConfig& cfg = {}) {
  return magnitude(stft(audio, cfg.analysis));
}

/// Frequency (Hz) of the spectral peak nearest `nominal_hz` within
/// +-search_semitones, refined by a parabola through the log magnitudes of
/// the peak bin and its neighbours. Empty when the band holds no local
/// maximum.
inline std::optional<double> track_partial(const MagnitudeSpectrogram& mag, double nominal_hz, std::size_t frame,
                                           double search_semitones = 0.5) {
  const double rate = mag.sample_rate;
  require(nominal_hz > 0.0 && nominal_hz < rate / 2.0, "nominal frequency outside (0, Nyquist)");
  require(frame < mag.frames(), "frame index out of range");
  const std::size_t bins = mag.bins();
  if (bins < 3) return std::nullopt;
  const double df = rate / static_cast<double>(mag.config.fft_size);
  const double lo_hz = nominal_hz * std::pow(2.0, -search_semitones / 12.0);
  const double hi_hz = nominal_hz * std::pow(2.0, search_semitones / 12.0);
  // The band is widened to the bins bracketing its edges so that a band
  // narrower than one bin still contains candidates.
  const std::size_t k_lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(lo_hz / df)));
  const std::size_t k_hi = std::min(bins - 2, static_cast<std::size_t>(std::ceil(hi_hz / df)));
  const auto col = mag.values.frame(frame);

  std::optional<std::size_t> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    if (!(col[k] > 0.0 && col[k] > col[k - 1] && col[k] >= col[k + 1])) continue;
    const double dist = std::abs(static_cast<double>(k) * df - nominal_hz);
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  if (!best) return std::nullopt;
  const std::size_t k = *best;
  constexpr double tiny = 1e-300;
  const double a = std::log(std::max(col[k - 1], tiny));
  const double b = std::log(col[k]);
  const double c = std::log(std::max(col[k + 1], tiny));
  const double denom = a - 2.0 * b + c;
  const double offset = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
  return (static_cast<double>(k) + offset) * df;
}

/// Semitone distance between two frequencies; symmetric in its arguments.
inline double semitone_error(double reference_hz, double estimate_hz) {
  return 12.0 * std::abs(std::log2(estimate_hz) - std::log2(reference_hz));
}

/// Harmonic error of one note: [partial, frame] in semitones, NaN where a
/// partial could not be tracked in either signal.
struct NoteError {
  int midi = 0;
  double f0 = 0.0;
  Grid<double> errors;
  std::vector<std::size_t> frames;  ///< analysis frame of each column
  std::size_t missing = 0;

  template <typename Fn>
  void for_each_valid(Fn&& fn) const {
    for (double v : errors.raw())
      if (!std::isnan(v)) fn(v);
  }
  std::size_t valid_count() const {
    std::size_t c = 0;
    for_each_valid([&](double) { ++c; });
    return c;
  }
  double mean() const {
    double s = 0.0;
    std::size_t c = 0;
    for_each_valid([&](double v) { s += v, ++c; });
    return c ? s / static_cast<double>(c) : 0.0;
  }
  double max() const {
    double m = 0.0;
    for_each_valid([&](double v) { m = std::max(m, v); });
    return m;
  }
};

/// Scored frames: centres at least trim_seconds from both ends.
inline std::vector<std::size_t> sustained_frames(std::size_t frames, double duration, std::uint32_t rate,
                                                 const TrackingConfig& cfg) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < frames; ++n) {
    const double t = static_cast<double>(n * cfg.analysis.hop_size) / rate;
    if (t >= cfg.trim_seconds && t <= duration - cfg.trim_seconds) out.push_back(n);
  }
  return out;
}

/// Harmonic error from precomputed tracking spectrograms. Each estimate
/// partial is searched around the frequency tracked in the reference.
inline NoteError harmonic_error(const MagnitudeSpectrogram& reference, const MagnitudeSpectrogram& estimate,
                                double f0, double duration, const TrackingConfig& cfg = {}) {
  require(reference.sample_rate == estimate.sample_rate, "sample rates differ");
  require(f0 > 0.0 && f0 * static_cast<double>(cfg.partials) < reference.sample_rate / 2.0,
          "highest tracked partial must lie below Nyquist");
  const std::size_t frames = std::min(reference.frames(), estimate.frames());
  NoteError out;
  out.f0 = f0;
  out.midi = static_cast<int>(std::lround(69.0 + 12.0 * std::log2(f0 / 440.0)));
  out.frames = sustained_frames(frames, duration, reference.sample_rate, cfg);
  out.errors = Grid<double>(cfg.partials, out.frames.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < out.frames.size(); ++j) {
    const std::size_t n = out.frames[j];
    for (std::size_t h = 0; h < cfg.partials; ++h) {
      const double nominal = f0 * static_cast<double>(h + 1);
      const auto ref = track_partial(reference, nominal, n, cfg.search_semitones);
      const auto est = ref ? track_partial(estimate, *ref, n, cfg.search_semitones) : std::nullopt;
      if (ref && est && *ref > 0.0 && *est > 0.0) out.errors(h, j) = semitone_error(*ref, *est);
      else ++out.missing;
    }
  }
  return out;
}

inline void require_matching_lengths(const AudioBuffer& reference, const AudioBuffer& estimate,
                                     std::size_t tolerance) {
  require(reference.sample_rate == estimate.sample_rate, "sample rates differ");
  const std::size_t a = reference.size(), b = estimate.size();
  require((a > b ? a - b : b - a) <= tolerance, "reference and estimate lengths differ by more than one hop");
}

inline NoteError harmonic_error(const AudioBuffer& reference, const AudioBuffer& estimate, double f0,
                                const TrackingConfig& cfg = {}) {
  require_matching_lengths(reference, estimate, cfg.analysis.hop_size);
  return harmonic_error(tracking_spectrogram(reference, cfg), tracking_spectrogram(estimate, cfg), f0,
                        reference.duration(), cfg);
}

/// Errors of one corpus item (every constituent pitch of a chord).
struct ItemError {
  CorpusEntry entry;
  std::vector<NoteError> notes;

  double mean() const {
    double s = 0.0;
    std::size_t c = 0;
    for (const auto& n : notes) n.for_each_valid([&](double v) { s += v, ++c; });
    return c ? s / static_cast<double>(c) : 0.0;
  }
  double max() const {
    double m = 0.0;
    for (const auto& n : notes) m = std::max(m, n.max());
    return m;
  }
  std::size_t missing() const {
    std::size_t c = 0;
    for (const auto& n : notes) c += n.missing;
    return c;
  }
};

inline ItemError item_error(const CorpusEntry& entry, const AudioBuffer& reference, const AudioBuffer& estimate,
                            const TrackingConfig& cfg = {}) {
  require_matching_lengths(reference, estimate, cfg.analysis.hop_size);
  const auto ref = tracking_spectrogram(reference, cfg);
  const auto est = tracking_spectrogram(estimate, cfg);
  ItemError out{entry, {}};
  for (int p : entry.pitches) {
    auto note = harmonic_error(ref, est, midi_to_hz(p), reference.duration(), cfg);
    note.midi = p;
    out.notes.push_back(std::move(note));
  }
  return out;
}

/// One point of the pitch-smoothed error curve.
struct CurvePoint {
  int pitch_start = 0;
  int pitch_end = 0;  ///< exclusive
  double mean = 0.0;
  std::size_t count = 0;
};

struct HarmonicErrorReport {
  std::vector<ItemError> items;
  double mean = 0.0;  ///< over every scored cell in the corpus
  double max = 0.0;
  std::size_t missing = 0;
  double notes_mean = 0.0;   ///< single-pitch items
  double chords_mean = 0.0;  ///< multi-pitch items
  std::size_t note_items = 0;
  std::size_t chord_items = 0;
};

namespace detail {
struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;
  void add(const ItemError& item) {
    for (const auto& n : item.notes) n.for_each_valid([&](double v) { sum += v, ++count; });
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};
}  // namespace detail

/// Aggregates item errors. Chord items count every constituent pitch.
inline HarmonicErrorReport corpus_report(std::vector<ItemError> items) {
  HarmonicErrorReport r;
  detail::Accumulator all, notes, chords;
  for (const auto& item : items) {
    all.add(item);
    (item.entry.is_chord() ? chords : notes).add(item);
    (item.entry.is_chord() ? r.chord_items : r.note_items) += 1;
    r.max = std::max(r.max, item.max());
    r.missing += item.missing();
  }
  r.mean = all.mean();
  r.notes_mean = notes.mean();
  r.chords_mean = chords.mean();
  r.items = std::move(items);
  return r;
}

/// Moving average of single-note item means over root pitch.
inline std::vector<CurvePoint> smoothed_curve(const HarmonicErrorReport& report, int window = 12, int stride = 6) {
  require(window > 0 && stride > 0, "window and stride must be positive");
  std::map<int, std::vector<double>> by_pitch;
  for (const auto& item : report.items)
    if (!item.entry.is_chord()) by_pitch[item.entry.root()].push_back(item.mean());
  std::vector<CurvePoint> curve;
  if (by_pitch.empty()) return curve;
  const int lo = by_pitch.begin()->first, hi = by_pitch.rbegin()->first;
  for (int start = lo; start <= hi; start += stride) {
    CurvePoint pt{start, start + window, 0.0, 0};
    for (auto it = by_pitch.lower_bound(start); it != by_pitch.end() && it->first < start + window; ++it)
      for (double v : it->second) pt.mean += v, ++pt.count;
    if (pt.count) pt.mean /= static_cast<double>(pt.count);
    curve.push_back(pt);
    if (start + window > hi) break;
  }
  return curve;
}

inline void write_report_csv(const HarmonicErrorReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# corpus_mean=" << report.mean << " corpus_max=" << report.max << " notes_mean=" << report.notes_mean
      << " chords_mean=" << report.chords_mean << " missing=" << report.missing << '\n';
  out << "# published learned-model reference: notes 0.09, chords 0.14 (not reproduced here)\n";
  out << "id,pitches,timbre,interval_set,mean,max,missing\n";
  for (const auto& item : report.items) {
    std::string pitches;
    for (int p : item.entry.pitches) pitches += (pitches.empty() ? "" : ";") + std::to_string(p);
    out << item.entry.id << ',' << pitches << ',' << to_string(item.entry.timbre) << ','
        << item.entry.interval_set << ',' << item.mean() << ',' << item.max() << ',' << item.missing() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "pitch_start,pitch_end,mean,count\n";
  for (const auto& p : curve) out << p.pitch_start << ',' << p.pitch_end << ',' << p.mean << ',' << p.count << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace pgvoc
