// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "oracles.hpp"
#include "pgvoc/pgvoc.hpp"

namespace pgvoc {
namespace {

const TrackingConfig kTrack;
const double kDf = 44100.0 / 4096.0;

MagnitudeSpectrogram tracked(const AudioBuffer& a) { return tracking_spectrogram(a, kTrack); }

AudioBuffer sum(const AudioBuffer& a, const AudioBuffer& b) {
  AudioBuffer out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += b.samples[i];
  return out;
}

TEST(TrackPartial, BinCentreIsExact) {
  for (std::size_t k : {41u, 100u, 377u}) {
    const auto mag = tracked(sine_signal(k * kDf, 44100));
    const auto f = track_partial(mag, k * kDf * 1.01, mag.frames() / 2);
    ASSERT_TRUE(f);
    EXPECT_NEAR(*f, k * kDf, 1e-9);
  }
}

TEST(TrackPartial, OffBinSinusoid) {
  const auto mag = tracked(sine_signal(441.7, 44100));
  for (std::size_t n = 20; n + 20 < mag.frames(); n += 10) {
    const auto f = track_partial(mag, 440.0, n);
    ASSERT_TRUE(f);
    EXPECT_NEAR(*f, 441.7, 0.15);
  }
}

TEST(TrackPartial, TwoTonesThreeSemitonesApart) {
  const double lo = 440.0, hi = 440.0 * std::pow(2.0, 3.0 / 12.0);
  const auto mag = tracked(sum(sine_signal(lo, 44100), sine_signal(hi, 44100)));
  for (std::size_t n = 20; n + 20 < mag.frames(); n += 10) {
    const auto f = track_partial(mag, lo, n);
    ASSERT_TRUE(f);
    EXPECT_NEAR(*f, lo, 0.3);
  }
}

TEST(TrackPartial, GainInvariant) {
  const auto x = synth_note({{57}, 1.0, Timbre::Strings}, 44100, 3);
  AudioBuffer y = x;
  for (double& s : y.samples) s *= 0.013;
  const auto a = tracked(x), b = tracked(y);
  for (std::size_t h = 1; h <= 5; ++h) {
    const auto fa = track_partial(a, h * midi_to_hz(57), 80);
    const auto fb = track_partial(b, h * midi_to_hz(57), 80);
    ASSERT_TRUE(fa && fb);
    EXPECT_NEAR(*fa, *fb, 1e-9);
  }
}

TEST(TrackPartial, EmptyBandIsMissing) {
  const auto mag = tracked(AudioBuffer{std::vector<double>(44100, 0.0), 44100});
  EXPECT_FALSE(track_partial(mag, 440.0, 50));
  EXPECT_THROW(track_partial(mag, 30000.0, 50), ValidationError);
}

TEST(SemitoneError, SymmetricAndExact) {
  EXPECT_NEAR(semitone_error(440.0, 440.0 * std::pow(2.0, 1.0 / 12.0)), 1.0, 1e-12);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> f(50.0, 5000.0);
  for (int i = 0; i < 100; ++i) {
    const double a = f(rng), b = f(rng);
    EXPECT_DOUBLE_EQ(semitone_error(a, b), semitone_error(b, a));
    EXPECT_GE(semitone_error(a, b), 0.0);
  }
}

TEST(HarmonicError, IdenticalSignalsScoreZero) {
  const auto x = synth_note({{48}, 1.0, Timbre::Rhodes}, 44100, 5);
  const auto err = harmonic_error(x, x, midi_to_hz(48));
  EXPECT_EQ(err.missing, 0u);
  EXPECT_GT(err.valid_count(), 0u);
  err.for_each_valid([](double v) { EXPECT_EQ(v, 0.0); });
}

TEST(HarmonicError, OneSemitoneShift) {
  // The shifted partial lies a full semitone from the reference track, so the
  // search band is widened past the default +-0.5 semitone.
  TrackingConfig wide = kTrack;
  wide.search_semitones = 1.5;
  // Log-parabolic interpolation on a Hann peak is biased by up to 0.016 bin
  // (0.17 Hz here), i.e. 0.011 semitone per signal at 262 Hz. From C5 up
  // every partial stays inside 1.0 +- 0.01; at C4 only the mean does.
  const auto ref = synth_note({{72}, 1.0, Timbre::Organ}, 44100, 6);
  const auto est = synth_note({{72}, 1.0, Timbre::Organ, 100.0}, 44100, 6);
  const auto err = harmonic_error(ref, est, midi_to_hz(72), wide);
  EXPECT_EQ(err.missing, 0u);
  err.for_each_valid([](double v) { EXPECT_NEAR(v, 1.0, 0.01); });
  const auto ref4 = synth_note({{60}, 1.0, Timbre::Organ}, 44100, 6);
  const auto est4 = synth_note({{60}, 1.0, Timbre::Organ, 100.0}, 44100, 6);
  EXPECT_NEAR(harmonic_error(ref4, est4, midi_to_hz(60), wide).mean(), 1.0, 0.01);
}

TEST(HarmonicError, SymmetricUnderSwap) {
  const auto a = synth_note({{64}, 1.0, Timbre::Organ}, 44100, 8);
  const auto b = synth_note({{64}, 1.0, Timbre::Organ, 12.0}, 44100, 8);
  const double ab = harmonic_error(a, b, midi_to_hz(64)).mean();
  const double ba = harmonic_error(b, a, midi_to_hz(64)).mean();
  EXPECT_NEAR(ab, 0.12, 0.01);
  EXPECT_NEAR(ab, ba, 1e-3);
}

TEST(HarmonicError, TrimsAttackAndRelease) {
  const auto x = synth_note({{60}, 1.0, Timbre::Organ}, 44100, 1);
  const auto err = harmonic_error(x, x, midi_to_hz(60));
  for (std::size_t n : err.frames) {
    const double t = static_cast<double>(n * 256) / 44100.0;
    EXPECT_GE(t, 0.1);
    EXPECT_LE(t, 0.9);
  }
  EXPECT_EQ(err.errors.bins(), 5u);
}

TEST(HarmonicError, SilentEstimateCountsMissing) {
  const auto x = synth_note({{60}, 1.0, Timbre::Organ}, 44100, 1);
  const AudioBuffer silent{std::vector<double>(x.size(), 0.0), 44100};
  const auto err = harmonic_error(x, silent, midi_to_hz(60));
  EXPECT_EQ(err.valid_count(), 0u);
  EXPECT_EQ(err.missing, err.errors.size());
  EXPECT_EQ(err.mean(), 0.0);
}

TEST(HarmonicError, RejectsBadInput) {
  const auto x = synth_note({{60}, 1.0, Timbre::Organ}, 44100, 1);
  EXPECT_THROW(harmonic_error(x, x, 5000.0), ValidationError);
  AudioBuffer short_x = x;
  short_x.samples.resize(x.size() - 1000);
  EXPECT_THROW(harmonic_error(x, short_x, midi_to_hz(60)), ValidationError);
  short_x.samples.resize(x.size() - 200);
  EXPECT_NO_THROW(harmonic_error(x, short_x, midi_to_hz(60)));
}

TEST(HarmonicError, OracleOrganC3) {
  const auto ref = synth_note({{48}, 1.0, Timbre::Organ}, 44100, 11);
  const auto an = analyze_triple(ref, StftConfig{});
  const auto out = resynthesize(an.triple, {}, &an.lambda, ref.size());
  const auto err = harmonic_error(ref, out, midi_to_hz(48));
  RecordProperty("mean", std::to_string(err.mean()));
  EXPECT_LE(err.mean(), 0.05);
}

NoteError constant_note(int midi, double value, std::size_t frames = 4) {
  NoteError n;
  n.midi = midi;
  n.f0 = midi_to_hz(midi);
  n.errors = Grid<double>(5, frames, value);
  n.frames.resize(frames);
  return n;
}

ItemError item(int root, std::vector<int> pitches, double value) {
  CorpusEntry e;
  e.id = "item_" + std::to_string(root) + "_" + std::to_string(pitches.size());
  e.pitches = pitches;
  e.interval_set = pitches.size() > 1 ? "fifth" : "single";
  ItemError it{e, {}};
  for (int p : pitches) it.notes.push_back(constant_note(p, value));
  return it;
}

TEST(CorpusReport, AggregatesAreConsistent) {
  std::vector<ItemError> items = {item(40, {40}, 0.1), item(41, {41}, 0.3), item(40, {40, 47}, 0.5)};
  items[1].notes[0].errors(2, 1) = std::numeric_limits<double>::quiet_NaN();
  items[1].notes[0].missing = 1;
  const auto r = corpus_report(items);
  EXPECT_EQ(r.note_items, 2u);
  EXPECT_EQ(r.chord_items, 1u);
  EXPECT_EQ(r.missing, 1u);
  EXPECT_DOUBLE_EQ(r.max, 0.5);
  // 20 + 19 note cells, 40 chord cells.
  EXPECT_NEAR(r.notes_mean, (20 * 0.1 + 19 * 0.3) / 39.0, 1e-12);
  EXPECT_NEAR(r.chords_mean, 0.5, 1e-12);
  EXPECT_NEAR(r.mean, (20 * 0.1 + 19 * 0.3 + 40 * 0.5) / 79.0, 1e-12);
}

TEST(CorpusReport, PerfectReconstructionScoresZero) {
  const auto plan = plan_corpus({.pitch_min = 48, .pitch_max = 60, .pitch_stride = 12,
                                 .timbres = {Timbre::Organ}, .interval_sets = {{"fifth", {0, 7}}}});
  std::vector<ItemError> items;
  for (const auto& e : plan.entries) {
    const auto audio = render_entry(e, plan.sample_rate);
    items.push_back(item_error(e, audio, audio));
  }
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].notes.size(), 2u);
  const auto r = corpus_report(items);
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.max, 0.0);
}

TEST(CorpusReport, SmoothedCurve) {
  std::vector<ItemError> items;
  for (int p = 36; p <= 60; ++p) items.push_back(item(p, {p}, static_cast<double>(p)));
  items.push_back(item(36, {36, 43}, 1000.0));  // chords are not part of the curve
  const auto curve = smoothed_curve(corpus_report(items));
  // The last window runs past the top pitch so that pitch 60 is covered.
  ASSERT_EQ(curve.size(), 4u);
  EXPECT_EQ(curve[0].pitch_start, 36);
  EXPECT_EQ(curve[0].pitch_end, 48);
  EXPECT_EQ(curve[0].count, 12u);
  EXPECT_DOUBLE_EQ(curve[0].mean, 41.5);
  EXPECT_EQ(curve[1].pitch_start, 42);
  EXPECT_DOUBLE_EQ(curve[1].mean, 47.5);
  EXPECT_EQ(curve[2].pitch_start, 48);
  EXPECT_EQ(curve[2].count, 12u);
  EXPECT_DOUBLE_EQ(curve[2].mean, 53.5);
  EXPECT_EQ(curve[3].pitch_start, 54);
  EXPECT_EQ(curve[3].count, 7u);
  EXPECT_DOUBLE_EQ(curve[3].mean, 57.0);
  EXPECT_THROW(smoothed_curve(corpus_report(items), 0, 6), ValidationError);
}

TEST(CorpusReport, CsvOutput) {
  const auto dir = std::filesystem::temp_directory_path() / "pgvoc_test_metrics_csv";
  std::filesystem::create_directories(dir);
  const auto r = corpus_report({item(40, {40}, 0.25), item(52, {52, 59}, 0.5)});
  write_report_csv(r, dir / "report.csv");
  write_curve_csv(smoothed_curve(r), dir / "curve.csv");
  std::ifstream in(dir / "report.csv");
  std::string l1, l2, l3, row;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  EXPECT_EQ(l1.rfind("# corpus_mean=", 0), 0u);
  EXPECT_NE(l2.find("0.09"), std::string::npos);
  EXPECT_NE(l2.find("0.14"), std::string::npos);
  EXPECT_EQ(l3, "id,pitches,timbre,interval_set,mean,max,missing");
  std::size_t rows = 0;
  while (std::getline(in, row)) ++rows;
  EXPECT_EQ(rows, 2u);
  std::ifstream curve(dir / "curve.csv");
  std::getline(curve, l1);
  EXPECT_EQ(l1, "pitch_start,pitch_end,mean,count");
  EXPECT_THROW(write_report_csv(r, "/nonexistent/dir/report.csv"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace pgvoc
