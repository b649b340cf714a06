// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pgvoc/pgvoc.hpp"

namespace pgvoc {
namespace {

TEST(Pipeline, OneSecondGives173Frames) {
  // Centred framing: floor(44100 / 256) + 1 frames.
  const RunConfig cfg;
  const auto mel = analyze_mel(sine_signal(440.0, 44100), cfg);
  EXPECT_EQ(mel.frames(), 44100u / 256u + 1u);
  EXPECT_EQ(mel.frames(), 173u);
  EXPECT_EQ(mel.bands(), 96u);
}

TEST(Pipeline, SilentInputGivesFloorMelAndNeutralTriple) {
  const RunConfig cfg;
  const AudioBuffer silent{std::vector<double>(44100, 0.0), 44100};
  for (double v : analyze_mel(silent, cfg).values.raw()) ASSERT_EQ(v, std::log10(cfg.mel.floor));
  const auto a = oracle_triple(silent, cfg);
  for (std::size_t i = 0; i < a.triple.magnitude.size(); ++i) {
    ASSERT_EQ(a.triple.magnitude.raw()[i], 0.0);
    ASSERT_EQ(a.triple.delta_m.raw()[i], 0.0);
    ASSERT_EQ(a.triple.delta_n.raw()[i], 0.0);
  }
  const auto r = run_pipeline(&silent, cfg, PipelineMode::Oracle);
  for (double s : r.audio.samples) ASSERT_EQ(s, 0.0);
}

TEST(Pipeline, OracleBeatsGriffinLimOnANote) {
  RunConfig cfg;
  const auto x = synth_note({{57}, 1.0, Timbre::Strings}, 44100, 11);
  const auto oracle = run_pipeline(&x, cfg, PipelineMode::Oracle);
  const auto gla = run_pipeline(&x, cfg, PipelineMode::Gla);
  ASSERT_EQ(oracle.audio.size(), x.size());
  ASSERT_EQ(gla.audio.size(), x.size());
  const double e_oracle = harmonic_error(x, oracle.audio, midi_to_hz(57)).mean();
  const double e_gla = harmonic_error(x, gla.audio, midi_to_hz(57)).mean();
  RecordProperty("oracle", std::to_string(e_oracle));
  RecordProperty("gla", std::to_string(e_gla));
  EXPECT_LT(e_oracle, e_gla);
  EXPECT_LE(e_oracle, 0.05);
  ASSERT_TRUE(gla.gla_convergence);
  EXPECT_GT(*gla.gla_convergence, 0.0);
}

TEST(Pipeline, TimingsArePositive) {
  RunConfig cfg;
  cfg.gla.iterations = 3;
  const auto x = synth_note({{64}, 0.5, Timbre::Plucked}, 44100, 12);
  for (auto mode : {PipelineMode::Oracle, PipelineMode::Gla}) {
    const auto r = run_pipeline(&x, cfg, mode);
    EXPECT_GT(r.timings.rtf(), 0.0) << to_string(mode);
    EXPECT_GT(r.timings.integration_rtf(), 0.0);
    EXPECT_NEAR(r.timings.audio_seconds, 0.5, 1e-12);
  }
}

TEST(Pipeline, ExternalTripleGivesFiniteAudio) {
  // Stand-in for a trainer export: arbitrary values inside the clip bounds.
  const RunConfig cfg;
  const std::size_t frames = 60;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> mag(0.0, 2.0), off(-4.0, 4.0), unit(0.0, 1.0);
  auto t = detail::make_rank3({ChannelRole::Magnitude, ChannelRole::DeltaM, ChannelRole::DeltaN}, 1025, frames,
                              metadata_for(cfg.stft, 44100), DType::F32);
  for (std::size_t n = 0; n < frames; ++n)
    for (std::size_t m = 0; m < 1025; ++m) {
      t.at(0, m, n) = static_cast<float>(mag(rng));
      t.at(1, m, n) = static_cast<float>(off(rng));
      t.at(2, m, n) = static_cast<float>(off(rng));
    }
  const auto triple = triple_from_tensor(decode_tensor(encode_tensor(t)));
  const auto r = run_pipeline(nullptr, cfg, PipelineMode::ExternalTriple, &triple);
  EXPECT_EQ(r.audio.size(), default_signal_length(frames, cfg.stft));
  for (double s : r.audio.samples) ASSERT_TRUE(std::isfinite(s));
  EXPECT_GT(rms(r.audio), 0.0);

  t.roles.push_back(ChannelRole::Lambda);
  t.dims[0] = 4;
  for (std::size_t i = 0; i < 1025 * frames; ++i) t.data.push_back(static_cast<float>(unit(rng)));
  const auto with_lambda = triple_from_tensor(t);
  const auto r2 = run_pipeline(nullptr, cfg, PipelineMode::ExternalTriple, &with_lambda);
  for (double s : r2.audio.samples) ASSERT_TRUE(std::isfinite(s));
}

TEST(Pipeline, MissingInputsThrow) {
  const RunConfig cfg;
  EXPECT_THROW(run_pipeline(nullptr, cfg, PipelineMode::Oracle), ValidationError);
  EXPECT_THROW(run_pipeline(nullptr, cfg, PipelineMode::Gla), ValidationError);
  EXPECT_THROW(run_pipeline(nullptr, cfg, PipelineMode::ExternalTriple), ValidationError);
  EXPECT_THROW(parse_pipeline_mode("neural"), ValidationError);
  EXPECT_EQ(parse_pipeline_mode("external-triple"), PipelineMode::ExternalTriple);
}

TEST(Pipeline, BitIdenticalAcrossRunsAndThreads) {
  RunConfig cfg;
  cfg.gla.iterations = 8;
  const auto x = synth_note({{50, 57, 66}, 0.5, Timbre::Rhodes}, 44100, 14);
  for (auto mode : {PipelineMode::Oracle, PipelineMode::Gla}) {
    const auto a = run_pipeline(&x, cfg, mode).audio;
    EXPECT_EQ(run_pipeline(&x, cfg, mode).audio, a);
    set_thread_count(3);
    const auto b = run_pipeline(&x, cfg, mode).audio;
    set_thread_count(1);
    EXPECT_EQ(b, a) << to_string(mode);
  }
}

}  // namespace
}  // namespace pgvoc
