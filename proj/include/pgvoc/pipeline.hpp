// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "pgvoc/audio.hpp"
#include "pgvoc/griffin_lim.hpp"
#include "pgvoc/mel.hpp"
#include "pgvoc/phase_gradient.hpp"
#include "pgvoc/phase_integration.hpp"
#include "pgvoc/run_config.hpp"
#include "pgvoc/stft.hpp"
#include "pgvoc/tensor_file.hpp"

namespace pgvoc {

inline MelFilterbank filterbank_for(const RunConfig& cfg, std::uint32_t sample_rate) {
  return make_mel_filterbank(cfg.mel, cfg.stft, sample_rate);
}

/// Audio -> log mel spectrogram.
inline MelSpectrogram analyze_mel(const AudioBuffer& audio, const RunConfig& cfg) {
  const auto fb = filterbank_for(cfg, audio.sample_rate);
  return mel_forward(magnitude(stft(audio, cfg.stft)), fb);
}

/// Audio -> oracle triple and lambda, measured rather than estimated.
inline OracleAnalysis oracle_triple(const AudioBuffer& audio, const RunConfig& cfg) {
  return analyze_triple(audio, cfg.stft, cfg.backend, cfg.integration.silence_rel_db);
}

enum class PipelineMode { Oracle, Gla, ExternalTriple };

inline std::string to_string(PipelineMode m) {
  switch (m) {
    case PipelineMode::Oracle: return "oracle";
    case PipelineMode::Gla: return "gla";
    case PipelineMode::ExternalTriple: return "external-triple";
  }
  return "unknown";
}

inline PipelineMode parse_pipeline_mode(const std::string& s) {
  if (s == "oracle") return PipelineMode::Oracle;
  if (s == "gla") return PipelineMode::Gla;
  if (s == "external-triple") return PipelineMode::ExternalTriple;
  throw ValidationError("unknown pipeline mode: " + s);
}

/// Wall-clock seconds per stage. For the Griffin-Lim mode the iterative
/// phase retrieval is reported as the integration stage.
struct StageTimings {
  double analysis = 0.0;
  double integration = 0.0;
  double synthesis = 0.0;
  double audio_seconds = 0.0;

  double total() const { return analysis + integration + synthesis; }
  /// Seconds of audio produced per second of wall time.
  double rtf() const { return audio_seconds / std::max(total(), 1e-9); }
  double integration_rtf() const { return audio_seconds / std::max(integration, 1e-9); }
};

struct PipelineResult {
  AudioBuffer audio;
  StageTimings timings;
  std::optional<double> gla_convergence;
};

namespace detail {
class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};
}  // namespace detail

/// Reconstructs `audio` (Oracle, Gla) or renders `external` (ExternalTriple).
/// Output has the reference length whenever a reference is given.
inline PipelineResult run_pipeline(const AudioBuffer* audio, const RunConfig& cfg, PipelineMode mode,
                                   const TripleTensor* external = nullptr) {
  cfg.validate();
  PipelineResult r;
  detail::Stopwatch clock;
  std::optional<std::size_t> length;
  if (audio) length = audio->size();

  if (mode == PipelineMode::Gla) {
    require(audio != nullptr, "gla mode needs input audio");
    const auto mel = analyze_mel(*audio, cfg);
    const auto fb = filterbank_for(cfg, audio->sample_rate);
    const auto linear = mel_to_linear(mel, fb);
    r.timings.analysis = clock.lap();
    auto gla = griffin_lim(linear, cfg.gla, length);
    r.timings.integration = clock.lap();
    r.audio = std::move(gla.audio);
    r.gla_convergence = gla.convergence.back();
  } else {
    SpectralTriple triple;
    ComponentMap lambda;
    if (mode == PipelineMode::Oracle) {
      require(audio != nullptr, "oracle mode needs input audio");
      auto analysis = oracle_triple(*audio, cfg);
      triple = std::move(analysis.triple);
      lambda = std::move(analysis.lambda);
    } else {
      require(external != nullptr, "external-triple mode needs a triple tensor");
      triple = external->triple;
      lambda = external->lambda ? *external->lambda : lambda_from_triple(triple, cfg.integration.silence_rel_db);
    }
    r.timings.analysis = clock.lap();
    const auto phase = integrate_phase(triple, lambda, cfg.integration);
    r.timings.integration = clock.lap();
    r.audio = istft(MagnitudeSpectrogram{triple.magnitude, triple.config, triple.sample_rate}, phase, length);
    r.timings.synthesis = clock.lap();
  }
  r.timings.audio_seconds = r.audio.duration();
  return r;
}

}  // namespace pgvoc
