// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// pgvoc: command-line front end for corpus synthesis, analysis, phase
// reconstruction and evaluation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pgvoc/pgvoc.hpp"

namespace fs = std::filesystem;
using namespace pgvoc;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kFormat = 3, kValidation = 4, kOther = 5 };

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string output;
  std::size_t threads = 1;
};

RunConfig load_config(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) {
    cfg.integration.rng_seed = *g.seed;
    cfg.gla.rng_seed = *g.seed;
  }
  return cfg;
}

const std::string& require_output(const Globals& g) {
  if (g.output.empty()) throw ValidationError("--output is required for this verb");
  return g.output;
}

std::vector<int> parse_pitches(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  for (std::string tok; std::getline(in, tok, ',');) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ValidationError("bad pitch list: " + text);
    }
  }
  require(!out.empty(), "empty pitch list");
  return out;
}

struct IntegrationFlags {
  std::optional<double> lambda_s, lambda_i;
  std::string rule;

  void add(CLI::App* cmd) {
    cmd->add_option("--lambda-s", lambda_s, "sinusoidal threshold (horizontal integration above)");
    cmd->add_option("--lambda-i", lambda_i, "impulsive threshold (vertical integration below)");
    cmd->add_option("--rule", rule, "integration rule: forward | trapezoidal");
  }
  void apply(RunConfig& cfg) const {
    if (lambda_s) cfg.integration.lambda_sinusoidal = *lambda_s;
    if (lambda_i) cfg.integration.lambda_impulsive = *lambda_i;
    if (!rule.empty()) cfg.integration.rule = parse_integration_rule(rule);
    cfg.integration.validate();
  }
};

struct GlaFlags {
  std::optional<std::size_t> iterations;
  std::optional<double> momentum;

  void add(CLI::App* cmd) {
    cmd->add_option("--iterations", iterations, "Griffin-Lim iterations");
    cmd->add_option("--momentum", momentum, "fast Griffin-Lim momentum in [0, 1)");
  }
  void apply(RunConfig& cfg) const {
    if (iterations) cfg.gla.iterations = *iterations;
    if (momentum) cfg.gla.momentum = *momentum;
    cfg.gla.validate();
  }
};

DType dtype_of(bool f64) { return f64 ? DType::F64 : DType::F32; }

void print_timings(const StageTimings& t) {
  std::printf("timing analysis_s=%.6f integration_s=%.6f synthesis_s=%.6f audio_s=%.6f rtf=%.3f integration_rtf=%.3f\n",
              t.analysis, t.integration, t.synthesis, t.audio_seconds, t.rtf(), t.integration_rtf());
}

void write_reassigned_csv(const OracleAnalysis& a, double min_db, const fs::path& path) {
  const auto coords = reassignment_coords(a.triple.delta_m, a.triple.delta_n);
  const auto silent = silence_mask(a.triple.magnitude, min_db);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "bin,frame,reassigned_bin,reassigned_frame,magnitude\n";
  for (std::size_t n = 0; n < a.triple.frames(); ++n)
    for (std::size_t m = 0; m < a.triple.bins(); ++m) {
      if (silent(m, n)) continue;
      out << m << ',' << n << ',' << coords.freq(m, n) << ',' << coords.time(m, n) << ',' << a.triple.magnitude(m, n)
          << '\n';
    }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-gradient vocoder toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "seed for every random stream");
  app.add_option("--config", g.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("-o,--output", g.output, "output file or directory");
  app.add_option("--threads", g.threads, "worker threads for frame-parallel stages")->check(CLI::PositiveNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "render the synthetic corpus to a directory with manifest.json");
  std::string spec_path;
  std::optional<int> stride;
  bool pcm16 = false;
  synth->add_option("--spec", spec_path, "corpus specification (JSON); defaults to the full corpus")
      ->check(CLI::ExistingFile);
  synth->add_option("--stride", stride, "pitch stride override");
  synth->add_flag("--pcm16", pcm16, "write 16-bit PCM instead of 32-bit float");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "WAV to log-mel tensor");
  std::string input;
  bool f64 = false;
  analyze->add_option("input", input, "input WAV")->required();
  analyze->add_flag("--f64", f64, "store 64-bit floats");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "WAV to measured (M, dm, dn, lambda) tensor");
  bool no_lambda = false;
  std::string backend;
  oracle->add_option("input", input, "input WAV")->required();
  oracle->add_flag("--f64", f64, "store 64-bit floats");
  oracle->add_flag("--no-lambda", no_lambda, "omit the lambda channel");
  oracle->add_option("--backend", backend, "gradient backend: auger-flandrin | finite-difference");

  // invert
  auto* invert = app.add_subcommand("invert", "triple tensor to WAV by phase-gradient integration");
  IntegrationFlags integration_flags;
  invert->add_option("input", input, "triple tensor")->required();
  integration_flags.add(invert);

  // gla
  auto* gla = app.add_subcommand("gla", "mel tensor to WAV by Griffin-Lim");
  GlaFlags gla_flags;
  gla->add_option("input", input, "mel tensor")->required();
  gla_flags.add(gla);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "harmonic pitch error of estimates against references");
  std::string manifest_path, reference_dir, estimate_dir, curve_path;
  evaluate->add_option("--manifest", manifest_path, "corpus manifest.json")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--reference-dir", reference_dir, "directory of reference WAVs (default: manifest directory)");
  evaluate->add_option("--estimate-dir", estimate_dir, "directory of estimate WAVs with the same file names")
      ->required();
  evaluate->add_option("--curve", curve_path, "also write the pitch-smoothed error curve CSV");

  // reassign
  auto* reassign = app.add_subcommand("reassign", "WAV to reassigned-spectrogram CSV");
  double min_db = -100.0;
  reassign->add_option("input", input, "input WAV")->required();
  reassign->add_option("--min-db", min_db, "skip cells below the global maximum by more than this (dB)");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "end-to-end reconstruction with stage timings");
  std::string mode_name = "oracle", triple_path, pitches;
  pipeline->add_option("input", input, "reference WAV (optional in external-triple mode)");
  pipeline->add_option("--mode", mode_name, "oracle | gla | external-triple");
  pipeline->add_option("--triple", triple_path, "triple tensor for external-triple mode");
  pipeline->add_option("--pitches", pitches, "comma-separated MIDI pitches: print a harmonic-error row");
  integration_flags.add(pipeline);
  gla_flags.add(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    set_thread_count(g.threads);
    if (synth->parsed()) {
      CorpusSpec spec = spec_path.empty() ? CorpusSpec{} : corpus_spec_from_json(read_json_file(spec_path));
      if (g.seed) spec.seed = *g.seed;
      if (stride) spec.pitch_stride = *stride;
      spec.validate();
      const auto m = build_corpus(spec, require_output(g), pcm16 ? WavEncoding::Pcm16 : WavEncoding::Float32);
      std::printf("wrote %zu files to %s\n", m.entries.size(), g.output.c_str());
    } else if (analyze->parsed()) {
      const auto cfg = load_config(g);
      write_tensor(require_output(g), to_tensor(analyze_mel(read_wav(input), cfg), dtype_of(f64)));
    } else if (oracle->parsed()) {
      auto cfg = load_config(g);
      if (!backend.empty()) cfg.backend = parse_gradient_backend(backend);
      const auto a = oracle_triple(read_wav(input), cfg);
      write_tensor(require_output(g), to_tensor(a.triple, no_lambda ? nullptr : &a.lambda, dtype_of(f64)));
    } else if (invert->parsed()) {
      auto cfg = load_config(g);
      integration_flags.apply(cfg);
      const auto t = triple_from_tensor(read_tensor(input), cfg.stft);
      const auto r = run_pipeline(nullptr, cfg, PipelineMode::ExternalTriple, &t);
      write_wav(require_output(g), r.audio);
    } else if (gla->parsed()) {
      auto cfg = load_config(g);
      gla_flags.apply(cfg);
      const auto mel = mel_from_tensor(read_tensor(input), cfg.stft, cfg.mel.floor);
      cfg.stft = mel.config;
      const auto r = invert_mel_gla(mel, filterbank_for(cfg, mel.sample_rate), cfg.gla);
      write_wav(require_output(g), r.audio);
      std::printf("spectral_convergence=%.6f\n", r.convergence.back());
    } else if (evaluate->parsed()) {
      const auto cfg = load_config(g);
      const auto manifest = manifest_from_json(read_json_file(manifest_path));
      const fs::path refs = reference_dir.empty() ? fs::path(manifest_path).parent_path() : fs::path(reference_dir);
      std::vector<ItemError> items;
      for (const auto& e : manifest.entries)
        items.push_back(item_error(e, read_wav(refs / e.file), read_wav(fs::path(estimate_dir) / e.file), cfg.tracking));
      const auto report = corpus_report(std::move(items));
      write_report_csv(report, require_output(g));
      if (!curve_path.empty()) write_curve_csv(smoothed_curve(report), curve_path);
      std::printf("items=%zu mean=%.6f max=%.6f notes_mean=%.6f chords_mean=%.6f missing=%zu\n",
                  report.items.size(), report.mean, report.max, report.notes_mean, report.chords_mean,
                  report.missing);
    } else if (reassign->parsed()) {
      const auto cfg = load_config(g);
      write_reassigned_csv(oracle_triple(read_wav(input), cfg), min_db, require_output(g));
    } else if (pipeline->parsed()) {
      auto cfg = load_config(g);
      integration_flags.apply(cfg);
      gla_flags.apply(cfg);
      const auto mode = parse_pipeline_mode(mode_name);
      std::optional<AudioBuffer> audio;
      if (!input.empty()) audio = read_wav(input);
      std::optional<TripleTensor> triple;
      if (mode == PipelineMode::ExternalTriple) {
        require(!triple_path.empty(), "external-triple mode needs --triple");
        triple = triple_from_tensor(read_tensor(triple_path), cfg.stft);
      }
      const auto r = run_pipeline(audio ? &*audio : nullptr, cfg, mode, triple ? &*triple : nullptr);
      write_wav(require_output(g), r.audio);
      print_timings(r.timings);
      if (!pitches.empty()) {
        require(audio.has_value(), "--pitches needs a reference WAV");
        CorpusEntry entry;
        entry.id = "input";
        entry.pitches = parse_pitches(pitches);
        const auto e = item_error(entry, *audio, r.audio, cfg.tracking);
        std::printf("mode,pitches,mean,max,missing\n%s,%s,%.6f,%.6f,%zu\n", to_string(mode).c_str(), pitches.c_str(),
                    e.mean(), e.max(), e.missing());
      }
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "pgvoc: i/o error: %s\n", e.what());
    return kIo;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "pgvoc: format error: %s\n", e.what());
    return kFormat;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "pgvoc: invalid input: %s\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pgvoc: %s\n", e.what());
    return kOther;
  }
  return kOk;
}
