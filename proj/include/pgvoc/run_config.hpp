// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "pgvoc/corpus.hpp"
#include "pgvoc/error.hpp"
#include "pgvoc/griffin_lim.hpp"
#include "pgvoc/losses.hpp"
#include "pgvoc/mel.hpp"
#include "pgvoc/metrics.hpp"
#include "pgvoc/phase_gradient.hpp"
#include "pgvoc/phase_integration.hpp"
#include "pgvoc/stft.hpp"

namespace pgvoc {

/// Every tunable of the toolchain. Serialised as JSON with one object per
/// section; any key not listed here is rejected.
struct RunConfig {
  StftConfig stft;
  MelConfig mel;
  GradientBackend backend = GradientBackend::AugerFlandrin;
  IntegrationConfig integration;
  GlaConfig gla;
  LossConfig loss;
  TrackingConfig tracking;

  void validate() const {
    stft.validate();
    integration.validate();
    gla.validate();
    loss.validate();
    tracking.analysis.validate();
    require(mel.n_mels > 0 && mel.f_min < mel.f_max && mel.floor > 0.0, "invalid mel configuration");
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  return {
      {"stft",
       {{"frame_size", c.stft.frame_size},
        {"hop_size", c.stft.hop_size},
        {"fft_size", c.stft.fft_size},
        {"window", to_string(c.stft.window)},
        {"center", c.stft.center}}},
      {"mel",
       {{"n_mels", c.mel.n_mels},
        {"f_min", c.mel.f_min},
        {"f_max", c.mel.f_max},
        {"scale", to_string(c.mel.scale)},
        {"floor", c.mel.floor}}},
      {"analysis", {{"backend", to_string(c.backend)}}},
      {"integration",
       {{"lambda_impulsive", c.integration.lambda_impulsive},
        {"lambda_sinusoidal", c.integration.lambda_sinusoidal},
        {"seed", c.integration.rng_seed},
        {"silence_rel_db", c.integration.silence_rel_db},
        {"rule", to_string(c.integration.rule)}}},
      {"gla", {{"iterations", c.gla.iterations}, {"momentum", c.gla.momentum}, {"seed", c.gla.rng_seed}}},
      {"loss",
       {{"weights", c.loss.weights},
        {"cepstral_count", c.loss.cepstral_count},
        {"lambda_threshold", c.loss.lambda_threshold}}},
      {"metrics",
       {{"frame_size", c.tracking.analysis.frame_size},
        {"hop_size", c.tracking.analysis.hop_size},
        {"search_semitones", c.tracking.search_semitones},
        {"trim_seconds", c.tracking.trim_seconds}}},
  };
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  using detail::reject_unknown_keys;
  RunConfig c;
  reject_unknown_keys(j, {"stft", "mel", "analysis", "integration", "gla", "loss", "metrics"}, "run config");
  try {
    if (j.contains("stft")) {
      const auto& s = j.at("stft");
      reject_unknown_keys(s, {"frame_size", "hop_size", "fft_size", "window", "center"}, "stft");
      c.stft.frame_size = s.value("frame_size", c.stft.frame_size);
      c.stft.hop_size = s.value("hop_size", c.stft.hop_size);
      c.stft.fft_size = s.value("fft_size", c.stft.frame_size);
      if (s.contains("window")) c.stft.window = parse_window_kind(s.at("window").get<std::string>());
      c.stft.center = s.value("center", c.stft.center);
    }
    if (j.contains("mel")) {
      const auto& s = j.at("mel");
      reject_unknown_keys(s, {"n_mels", "f_min", "f_max", "scale", "floor"}, "mel");
      c.mel.n_mels = s.value("n_mels", c.mel.n_mels);
      c.mel.f_min = s.value("f_min", c.mel.f_min);
      c.mel.f_max = s.value("f_max", c.mel.f_max);
      if (s.contains("scale")) c.mel.scale = parse_mel_scale(s.at("scale").get<std::string>());
      c.mel.floor = s.value("floor", c.mel.floor);
    }
    if (j.contains("analysis")) {
      const auto& s = j.at("analysis");
      reject_unknown_keys(s, {"backend"}, "analysis");
      if (s.contains("backend")) c.backend = parse_gradient_backend(s.at("backend").get<std::string>());
    }
    if (j.contains("integration")) {
      const auto& s = j.at("integration");
      reject_unknown_keys(s, {"lambda_impulsive", "lambda_sinusoidal", "seed", "silence_rel_db", "rule"},
                          "integration");
      c.integration.lambda_impulsive = s.value("lambda_impulsive", c.integration.lambda_impulsive);
      c.integration.lambda_sinusoidal = s.value("lambda_sinusoidal", c.integration.lambda_sinusoidal);
      c.integration.rng_seed = s.value("seed", c.integration.rng_seed);
      c.integration.silence_rel_db = s.value("silence_rel_db", c.integration.silence_rel_db);
      if (s.contains("rule")) c.integration.rule = parse_integration_rule(s.at("rule").get<std::string>());
    }
    if (j.contains("gla")) {
      const auto& s = j.at("gla");
      reject_unknown_keys(s, {"iterations", "momentum", "seed"}, "gla");
      c.gla.iterations = s.value("iterations", c.gla.iterations);
      c.gla.momentum = s.value("momentum", c.gla.momentum);
      c.gla.rng_seed = s.value("seed", c.gla.rng_seed);
    }
    if (j.contains("loss")) {
      const auto& s = j.at("loss");
      reject_unknown_keys(s, {"weights", "cepstral_count", "lambda_threshold"}, "loss");
      if (s.contains("weights")) c.loss.weights = s.at("weights").get<std::array<double, 4>>();
      c.loss.cepstral_count = s.value("cepstral_count", c.loss.cepstral_count);
      c.loss.lambda_threshold = s.value("lambda_threshold", c.loss.lambda_threshold);
    }
    if (j.contains("metrics")) {
      const auto& s = j.at("metrics");
      reject_unknown_keys(s, {"frame_size", "hop_size", "search_semitones", "trim_seconds"}, "metrics");
      c.tracking.analysis.frame_size = s.value("frame_size", c.tracking.analysis.frame_size);
      c.tracking.analysis.fft_size = c.tracking.analysis.frame_size;
      c.tracking.analysis.hop_size = s.value("hop_size", c.tracking.analysis.hop_size);
      c.tracking.search_semitones = s.value("search_semitones", c.tracking.search_semitones);
      c.tracking.trim_seconds = s.value("trim_seconds", c.tracking.trim_seconds);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) { return run_config_from_json(read_json_file(path)); }

}  // namespace pgvoc
