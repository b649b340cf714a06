// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pgvoc/pgvoc.hpp"

namespace pgvoc {
namespace {

const StftConfig kCfg;
constexpr double kRate = 44100.0;

class BothBackends : public ::testing::TestWithParam<GradientBackend> {};

std::size_t peak_bin(const Grid<double>& mag, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t m = 1; m < mag.bins(); ++m)
    if (mag(m, n) > mag(best, n)) best = m;
  return best;
}

AudioBuffer impulse_at(long offset, std::size_t centre = 8192, std::size_t length = 16384) {
  const std::size_t pos[] = {static_cast<std::size_t>(static_cast<long>(centre) + offset)};
  return impulse_signal(length, pos);
}

TEST_P(BothBackends, SinusoidInstantaneousFrequencyNearPeak) {
  const double omega = 2.0 * std::numbers::pi * 440.0 / kRate;
  const auto g = phase_gradients(sine_signal(440.0, 44100), kCfg, GetParam());
  const auto mag = magnitude(g.spectrum).values;
  for (std::size_t n = 10; n + 10 < mag.frames(); ++n) {
    const std::size_t pk = peak_bin(mag, n);
    for (std::size_t m = pk - 2; m <= pk + 2; ++m)
      EXPECT_NEAR(g.inst_freq(m, n) / omega, 1.0, 1e-3) << "bin " << m << " frame " << n;
  }
}

TEST_P(BothBackends, ImpulseAtFrameCentreHasZeroGroupDelay) {
  const auto g = phase_gradients(impulse_at(0), kCfg, GetParam());
  const std::size_t n = 8192 / kCfg.hop_size;
  const auto silent = silence_mask(magnitude(g.spectrum).values, -100.0);
  for (std::size_t m = 0; m < kCfg.bins(); ++m) {
    ASSERT_FALSE(silent(m, n));
    EXPECT_NEAR(g.freq_derivative(m, n), 0.0, 1e-12) << m;
  }
}

TEST_P(BothBackends, ImpulseOffsetsGiveFrameOffsets) {
  for (long tau : {-64L, 0L, 64L}) {
    const auto off = bin_offsets(phase_gradients(impulse_at(tau), kCfg, GetParam()));
    const std::size_t n = 8192 / kCfg.hop_size;
    for (std::size_t m = 0; m < kCfg.bins(); ++m)
      EXPECT_NEAR(off.delta_n(m, n), static_cast<double>(tau) / kCfg.hop_size, 0.02) << tau << " bin " << m;
  }
}

TEST_P(BothBackends, FrameOffsetIsLinearInImpulseOffset) {
  // |tau| up to N/4, in steps that are not multiples of the hop.
  for (long tau = -512; tau <= 512; tau += 37) {
    const auto off = bin_offsets(phase_gradients(impulse_at(tau), kCfg, GetParam()));
    const std::size_t n = 8192 / kCfg.hop_size;
    for (std::size_t m = 0; m < kCfg.bins(); m += 16)
      EXPECT_NEAR(off.delta_n(m, n), static_cast<double>(tau) / kCfg.hop_size, 0.02) << tau << " bin " << m;
  }
}

TEST_P(BothBackends, BinCentredSinusoidHasZeroBinOffset) {
  const std::size_t k = 41;
  const auto off = bin_offsets(phase_gradients(sine_signal(kCfg.bin_hz(k, kRate), 44100), kCfg, GetParam()));
  for (std::size_t n = 10; n + 10 < off.delta_m.frames(); ++n) EXPECT_NEAR(off.delta_m(k, n), 0.0, 1e-6);
}

TEST_P(BothBackends, OffBinSinusoidOffsetMatchesNominal) {
  const double f = 445.0;
  const auto g = phase_gradients(sine_signal(f, 44100), kCfg, GetParam());
  const auto off = bin_offsets(g);
  const auto mag = magnitude(g.spectrum).values;
  for (std::size_t n = 10; n + 10 < mag.frames(); ++n) {
    const std::size_t pk = peak_bin(mag, n);
    const double expected = f * kCfg.fft_size / kRate - static_cast<double>(pk);
    EXPECT_NEAR(off.delta_m(pk, n), expected, 0.02) << n;
  }
}

TEST_P(BothBackends, TargetSpaceIsShiftInvariant) {
  const double f = 523.25, omega = 2.0 * std::numbers::pi * f / kRate;
  const auto a = analyze_triple(sine_signal(f, 44100, 44100, 0.5, 0.3), kCfg, GetParam());
  // b(t) = a(t - R): the same sinusoid started one hop later.
  const auto b = analyze_triple(sine_signal(f, 44100, 44100, 0.5, 0.3 - omega * kCfg.hop_size), kCfg, GetParam());
  // Interior: frames whose support, including the quadrature filter taps,
  // stays clear of both signal ends.
  const std::size_t margin = (detail::kHilbertHalfLength + kCfg.frame_size / 2) / kCfg.hop_size + 1;
  for (std::size_t n = margin; n + margin + 1 < a.triple.frames(); ++n)
    for (std::size_t m = 0; m < kCfg.bins(); ++m) {
      EXPECT_NEAR(b.triple.magnitude(m, n + 1), a.triple.magnitude(m, n), 1e-6);
      EXPECT_NEAR(b.triple.delta_m(m, n + 1), a.triple.delta_m(m, n), 1e-6);
      EXPECT_NEAR(b.triple.delta_n(m, n + 1), a.triple.delta_n(m, n), 1e-6);
    }
}

INSTANTIATE_TEST_SUITE_P(Backends, BothBackends,
                         ::testing::Values(GradientBackend::AugerFlandrin, GradientBackend::FiniteDifference),
                         [](const auto& info) {
                           return info.param == GradientBackend::AugerFlandrin ? "AugerFlandrin" : "FiniteDifference";
                         });

TEST(PhaseGradients, LowFrequencySinusoidsAreAccurate) {
  for (double f : {60.0, 61.7, 75.0, 90.0}) {
    const double omega = 2.0 * std::numbers::pi * f / kRate;
    const auto g = phase_gradients(sine_signal(f, 44100), kCfg);
    const auto mag = magnitude(g.spectrum).values;
    for (std::size_t n = 10; n + 10 < mag.frames(); ++n)
      EXPECT_NEAR(g.inst_freq(peak_bin(mag, n), n) / omega, 1.0, 1e-3) << f;
  }
}

TEST(PhaseGradients, BackendsAgreeOnHarmonicNote) {
  const auto note = synth_note({{48}, 1.0, Timbre::Organ}, 44100, 2);
  const auto af = phase_gradients(note, kCfg, GradientBackend::AugerFlandrin);
  const auto fd = phase_gradients(note, kCfg, GradientBackend::FiniteDifference);
  const auto mag = magnitude(af.spectrum).values;
  double num = 0.0, den = 0.0;
  for (std::size_t n = 10; n + 10 < mag.frames(); ++n)
    for (std::size_t m = 0; m < mag.bins(); ++m) {
      const double w = mag(m, n) * mag(m, n);
      num += w * std::abs(af.inst_freq(m, n) - fd.inst_freq(m, n));
      den += w;
    }
  const double weighted = num / den;
  RecordProperty("weighted_mean_abs_diff", std::to_string(weighted));
  // Regression bound in rad/sample (about 0.01 bin); measured 2.3e-5.
  EXPECT_LT(weighted, 3e-5);
}

TEST(PhaseGradients, SilenceGetsNeutralValues) {
  const AudioBuffer silence{std::vector<double>(8192, 0.0), 44100};
  for (auto be : {GradientBackend::AugerFlandrin, GradientBackend::FiniteDifference}) {
    const auto g = phase_gradients(silence, kCfg, be);
    for (std::size_t n = 0; n < g.inst_freq.frames(); ++n)
      for (std::size_t m = 0; m < g.inst_freq.bins(); ++m) {
        EXPECT_DOUBLE_EQ(g.inst_freq(m, n), kCfg.bin_omega(m));
        EXPECT_DOUBLE_EQ(g.freq_derivative(m, n), 0.0);
      }
    const auto an = analyze_triple(silence, kCfg, be);
    for (double v : an.triple.delta_m.raw()) EXPECT_EQ(v, 0.0);
    for (double v : an.triple.delta_n.raw()) EXPECT_EQ(v, 0.0);
    for (double v : an.lambda.lambda.raw()) EXPECT_EQ(v, 0.0);
  }
}

TEST(PhaseGradients, ThreadCountDoesNotChangeResult) {
  const auto note = synth_note({{60, 64}, 0.5, Timbre::Plucked}, 44100, 4);
  const auto a = analyze_triple(note, kCfg);
  set_thread_count(3);
  const auto b = analyze_triple(note, kCfg);
  set_thread_count(1);
  EXPECT_TRUE(a.triple.delta_m == b.triple.delta_m);
  EXPECT_TRUE(a.triple.delta_n == b.triple.delta_n);
  EXPECT_TRUE(a.lambda.lambda == b.lambda.lambda);
}

TEST(PhaseGradients, BackendNames) {
  EXPECT_EQ(parse_gradient_backend("auger-flandrin"), GradientBackend::AugerFlandrin);
  EXPECT_EQ(parse_gradient_backend(to_string(GradientBackend::FiniteDifference)), GradientBackend::FiniteDifference);
  EXPECT_THROW(parse_gradient_backend("pghi"), ValidationError);
}

TEST(BinOffsets, ClippingBoundsAreExact) {
  const auto noise = AudioBuffer{oracle::random_signal(77, 20000), 44100};
  const auto g = phase_gradients(noise, kCfg);
  const auto raw = bin_offsets(g, false);
  const auto clipped = bin_offsets(g, true);
  const double max_dn = max_frame_offset(kCfg);
  EXPECT_DOUBLE_EQ(max_dn, 4.0);
  double raw_dm = 0.0, raw_dn = 0.0, dm = 0.0, dn = 0.0;
  for (std::size_t i = 0; i < raw.delta_m.size(); ++i) {
    raw_dm = std::max(raw_dm, std::abs(raw.delta_m.raw()[i]));
    raw_dn = std::max(raw_dn, std::abs(raw.delta_n.raw()[i]));
    dm = std::max(dm, std::abs(clipped.delta_m.raw()[i]));
    dn = std::max(dn, std::abs(clipped.delta_n.raw()[i]));
  }
  // Noise drives the unclipped offsets past both bounds.
  EXPECT_GT(raw_dm, kMaxBinOffset);
  EXPECT_GT(raw_dn, max_dn);
  EXPECT_LE(dm, kMaxBinOffset);
  EXPECT_LE(dn, max_dn);
}

TEST(BinOffsets, InverseMapsRecoverGradients) {
  for (std::size_t m : {0u, 5u, 500u, 1024u})
    for (double dm : {-4.0, -0.3, 0.0, 2.5}) {
      const double omega = inst_freq_from_offset(dm, m, kCfg);
      Grid<double> inst(1, 1, omega), slope(1, 1, 0.0);
      // Single-cell grid at bin 0: offset is relative to m = 0.
      EXPECT_NEAR(bin_offsets(inst, slope, kCfg, false).delta_m(0, 0), static_cast<double>(m) + dm, 1e-9);
    }
  for (double dn : {-4.0, -1.0, 0.25, 3.0}) {
    Grid<double> inst(1, 1, 0.0), slope(1, 1, freq_derivative_from_offset(dn, kCfg));
    EXPECT_NEAR(bin_offsets(inst, slope, kCfg, false).delta_n(0, 0), dn, 1e-12);
  }
}

TEST(Reassignment, ZeroOffsetsGiveIdentityGrid) {
  const Grid<double> zero(7, 5, 0.0);
  const auto c = reassignment_coords(zero, zero);
  for (std::size_t n = 0; n < 5; ++n)
    for (std::size_t m = 0; m < 7; ++m) {
      EXPECT_EQ(c.freq(m, n), static_cast<double>(m));
      EXPECT_EQ(c.time(m, n), static_cast<double>(n));
    }
}

TEST(Reassignment, OffBinSinusoidCollapsesInFrequency) {
  const auto g = phase_gradients(sine_signal(445.0, 44100), kCfg);
  const auto off = bin_offsets(g);
  const auto c = reassignment_coords(off.delta_m, off.delta_n);
  const auto mag = magnitude(g.spectrum).values;
  for (std::size_t n = 10; n + 10 < mag.frames(); ++n) {
    const std::size_t pk = peak_bin(mag, n);
    EXPECT_NEAR(c.freq(pk - 1, n), c.freq(pk, n), 0.05);
    EXPECT_NEAR(c.freq(pk + 1, n), c.freq(pk, n), 0.05);
  }
}

TEST(Reassignment, ImpulseCollapsesInTime) {
  const auto off = bin_offsets(phase_gradients(impulse_at(40), kCfg));
  const auto c = reassignment_coords(off.delta_m, off.delta_n);
  const std::size_t n = 8192 / kCfg.hop_size;
  for (std::size_t m = 1; m < kCfg.bins(); ++m) EXPECT_NEAR(c.time(m, n), c.time(0, n), 1e-9);
}

// lambda oracle: explicit centred differences, one-sided on the borders.
double lambda_oracle(const Grid<double>& fq, const Grid<double>& tm, std::size_t m, std::size_t n) {
  const std::size_t b = fq.bins(), f = fq.frames();
  double dfreq, dtime;
  if (m == 0) dfreq = fq(1, n) - fq(0, n);
  else if (m == b - 1) dfreq = fq(b - 1, n) - fq(b - 2, n);
  else dfreq = (fq(m + 1, n) - fq(m - 1, n)) / 2.0;
  if (n == 0) dtime = tm(m, 1) - tm(m, 0);
  else if (n == f - 1) dtime = tm(m, f - 1) - tm(m, f - 2);
  else dtime = (tm(m, n + 1) - tm(m, n - 1)) / 2.0;
  if (std::abs(dtime) < 1e-6) return 0.0;
  return std::exp(-(dfreq / dtime) * (dfreq / dtime));
}

TEST(LambdaMap, MatchesExplicitFormula) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  Grid<double> dm(9, 6), dn(9, 6);
  for (double& v : dm.raw()) v = d(rng);
  for (double& v : dn.raw()) v = d(rng);
  dn(4, 2) = dn(4, 0) = 0.0;
  dn(4, 1) = 0.0;  // flat time coordinate except the frame step itself
  const auto c = reassignment_coords(dm, dn);
  const auto l = lambda_map(c);
  for (std::size_t n = 0; n < 6; ++n)
    for (std::size_t m = 0; m < 9; ++m) EXPECT_NEAR(l.lambda(m, n), lambda_oracle(c.freq, c.time, m, n), 1e-15);
}

TEST(LambdaMap, CollapsedTimeScoresZero) {
  // time coordinate constant along frames -> d/dn = 0 -> lambda = 0.
  Grid<double> fq(4, 4), tm(4, 4, 7.0);
  for (std::size_t n = 0; n < 4; ++n)
    for (std::size_t m = 0; m < 4; ++m) fq(m, n) = 10.0;
  const auto l = lambda_map({fq, tm});
  for (double v : l.lambda.raw()) EXPECT_EQ(v, 0.0);
}

TEST(LambdaMap, SilentCellsScoreZero) {
  const Grid<double> zero(5, 5, 0.0);
  Grid<unsigned char> silent(5, 5, 0);
  silent(2, 2) = 1;
  const auto l = lambda_map(reassignment_coords(zero, zero), &silent);
  EXPECT_EQ(l.lambda(2, 2), 0.0);
  // Identity coordinates: unit slope on both axes.
  EXPECT_DOUBLE_EQ(l.lambda(1, 2), std::exp(-1.0));
}

TEST(LambdaMap, SinusoidScoresHighImpulseScoresLow) {
  const auto s = analyze_triple(sine_signal(440.0, 44100), kCfg);
  for (std::size_t n = 10; n + 10 < s.triple.frames(); ++n) {
    const std::size_t pk = peak_bin(s.triple.magnitude, n);
    for (std::size_t m = pk - 1; m <= pk + 1; ++m) EXPECT_GE(s.lambda.lambda(m, n), 0.9) << m << "," << n;
  }
  const auto i = analyze_triple(impulse_at(30), kCfg);
  const std::size_t n = 8192 / kCfg.hop_size;
  for (std::size_t m = 0; m < kCfg.bins(); ++m) EXPECT_LE(i.lambda.lambda(m, n), 0.1) << m;
}

TEST(LambdaMap, RangeOnArbitraryInput) {
  const auto an = analyze_triple(AudioBuffer{oracle::random_signal(12, 20000), 44100}, kCfg);
  for (double v : an.lambda.lambda.raw()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  an.triple.validate();
}

}  // namespace
}  // namespace pgvoc
