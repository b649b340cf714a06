// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgvoc/error.hpp"
#include "pgvoc/synth.hpp"
#include "pgvoc/wav.hpp"

namespace pgvoc {

struct IntervalSet {
  std::string name;
  std::vector<int> intervals;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;
};

/// Single notes plus the six note combinations of the pitch-stability study.
/// Open triad voicing is {0, 7, 16}; close voicings stack thirds.
inline const std::vector<IntervalSet>& standard_interval_sets() {
  static const std::vector<IntervalSet> sets = {
      {"single", {0}},           {"octave", {0, 12}},          {"twelfth", {0, 19}},
      {"fifth", {0, 7}},         {"triad-close", {0, 4, 7}},   {"triad-open", {0, 7, 16}},
      {"maj7-close", {0, 4, 7, 11}},
  };
  return sets;
}

struct CorpusSpec {
  std::uint32_t sample_rate = 44100;
  double duration = 1.0;
  std::uint64_t seed = 0;
  int pitch_min = 36;  // C2
  int pitch_max = 96;  // C7
  int pitch_stride = 1;
  std::vector<Timbre> timbres = corpus_timbres();
  std::vector<IntervalSet> interval_sets = standard_interval_sets();

  void validate() const {
    require(sample_rate > 0 && duration > 0.0, "corpus needs a positive rate and duration");
    require(pitch_min <= pitch_max && pitch_stride > 0, "corpus pitch range is empty");
    require(!timbres.empty() && !interval_sets.empty(), "corpus needs timbres and interval sets");
    for (const auto& s : interval_sets)
      require(!s.intervals.empty() && s.intervals.front() == 0, "interval sets must start at 0");
  }
};

struct CorpusEntry {
  std::string id;
  std::string file;
  std::vector<int> pitches;
  Timbre timbre = Timbre::Organ;
  std::string interval_set;
  std::uint64_t seed = 0;
  double duration = 1.0;

  int root() const { return pitches.front(); }
  bool is_chord() const { return pitches.size() > 1; }
  NoteSpec note_spec() const { return {pitches, duration, timbre, 0.0}; }
};

struct CorpusManifest {
  std::uint32_t sample_rate = 44100;
  std::vector<CorpusEntry> entries;
};

/// Enumerates the corpus: for every interval set, every root on the stride
/// grid whose top note stays within [pitch_min, pitch_max], every timbre.
inline CorpusManifest plan_corpus(const CorpusSpec& spec) {
  spec.validate();
  CorpusManifest manifest{spec.sample_rate, {}};
  std::uint64_t index = 0;
  for (const auto& set : spec.interval_sets) {
    const int top = *std::max_element(set.intervals.begin(), set.intervals.end());
    for (int root = spec.pitch_min; root + top <= spec.pitch_max; root += spec.pitch_stride) {
      for (Timbre t : spec.timbres) {
        CorpusEntry e;
        char name[96];
        std::snprintf(name, sizeof(name), "%s_%03d_%s", set.name.c_str(), root, to_string(t).c_str());
        e.id = name;
        e.file = e.id + ".wav";
        for (int iv : set.intervals) e.pitches.push_back(root + iv);
        e.timbre = t;
        e.interval_set = set.name;
        e.seed = mix_seed(spec.seed, index++);
        e.duration = spec.duration;
        manifest.entries.push_back(std::move(e));
      }
    }
  }
  return manifest;
}

inline AudioBuffer render_entry(const CorpusEntry& e, std::uint32_t sample_rate) {
  return synth_note(e.note_spec(), sample_rate, e.seed);
}

// ---- JSON ----------------------------------------------------------------

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw FormatError("unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

inline CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"sample_rate", "duration", "seed", "pitch_min", "pitch_max", "pitch_stride",
                                  "timbres", "interval_sets"},
                              "corpus spec");
  CorpusSpec s;
  try {
    s.sample_rate = j.value("sample_rate", s.sample_rate);
    s.duration = j.value("duration", s.duration);
    s.seed = j.value("seed", s.seed);
    s.pitch_min = j.value("pitch_min", s.pitch_min);
    s.pitch_max = j.value("pitch_max", s.pitch_max);
    s.pitch_stride = j.value("pitch_stride", s.pitch_stride);
    if (j.contains("timbres")) {
      s.timbres.clear();
      for (const auto& t : j.at("timbres")) s.timbres.push_back(parse_timbre(t.get<std::string>()));
    }
    if (j.contains("interval_sets")) {
      s.interval_sets.clear();
      for (const auto& item : j.at("interval_sets")) {
        detail::reject_unknown_keys(item, {"name", "intervals"}, "interval set");
        s.interval_sets.push_back({item.at("name").get<std::string>(), item.at("intervals").get<std::vector<int>>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corpus spec: ") + e.what());
  }
  s.validate();
  return s;
}

inline nlohmann::json to_json(const CorpusManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"id", e.id},
                       {"file", e.file},
                       {"pitches", e.pitches},
                       {"timbre", to_string(e.timbre)},
                       {"interval_set", e.interval_set},
                       {"seed", e.seed},
                       {"duration", e.duration}});
  return {{"sample_rate", m.sample_rate}, {"entries", entries}};
}

inline CorpusManifest manifest_from_json(const nlohmann::json& j) {
  CorpusManifest m;
  try {
    m.sample_rate = j.at("sample_rate").get<std::uint32_t>();
    std::set<std::string> files;
    for (const auto& item : j.at("entries")) {
      CorpusEntry e;
      e.id = item.at("id").get<std::string>();
      e.file = item.at("file").get<std::string>();
      e.pitches = item.at("pitches").get<std::vector<int>>();
      e.timbre = parse_timbre(item.at("timbre").get<std::string>());
      e.interval_set = item.at("interval_set").get<std::string>();
      e.seed = item.at("seed").get<std::uint64_t>();
      e.duration = item.at("duration").get<double>();
      if (e.pitches.empty()) throw FormatError("manifest entry without pitches: " + e.id);
      if (!files.insert(e.file).second) throw FormatError("duplicate manifest path: " + e.file);
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corpus manifest: ") + e.what());
  }
  return m;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

/// Renders every entry to `directory` and writes manifest.json next to them.
inline CorpusManifest build_corpus(const CorpusSpec& spec, const std::filesystem::path& directory,
                                   WavEncoding encoding = WavEncoding::Float32) {
  auto manifest = plan_corpus(spec);
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());
  for (const auto& e : manifest.entries) write_wav(directory / e.file, render_entry(e, spec.sample_rate), encoding);
  write_json_file(directory / "manifest.json", to_json(manifest));
  return manifest;
}

}  // namespace pgvoc
