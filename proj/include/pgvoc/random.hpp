// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pgvoc {

/// splitmix64 finaliser; decorrelates adjacent stream ids.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Deterministic generator for one independent stream (e.g. one frame).
/// Draws are bit-identical across standard libraries.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in [-pi, pi).
  double phase() { return -std::numbers::pi + 2.0 * std::numbers::pi * uniform(); }
  double normal() {
    // Box-Muller on two uniforms; the first must be > 0.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pgvoc
