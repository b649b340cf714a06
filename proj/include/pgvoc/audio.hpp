// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pgvoc/error.hpp"

namespace pgvoc {

/// Mono signal held in double precision.
struct AudioBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate = 44100;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }

  void validate() const {
    require(sample_rate > 0, "sample rate must be positive");
    for (double s : samples)
      if (!std::isfinite(s)) throw ValidationError("audio contains non-finite samples");
  }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;
};

inline double rms(const AudioBuffer& audio) {
  if (audio.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : audio.samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(audio.samples.size()));
}

inline double peak(const AudioBuffer& audio) {
  double p = 0.0;
  for (double s : audio.samples) p = std::max(p, std::abs(s));
  return p;
}

}  // namespace pgvoc
