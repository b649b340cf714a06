// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pgvoc/error.hpp"

namespace pgvoc {

/// Dense [bin, frame] matrix. Storage is frame-major so that one frame's bins
/// are contiguous, which is the access pattern of FFTs and phase integration.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t bins, std::size_t frames, T fill = T{})
      : bins_(bins), frames_(frames), data_(bins * frames, fill) {}

  std::size_t bins() const { return bins_; }
  std::size_t frames() const { return frames_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t bin, std::size_t frame) { return data_[frame * bins_ + bin]; }
  const T& operator()(std::size_t bin, std::size_t frame) const {
    return data_[frame * bins_ + bin];
  }

  std::span<T> frame(std::size_t n) { return {data_.data() + n * bins_, bins_}; }
  std::span<const T> frame(std::size_t n) const { return {data_.data() + n * bins_, bins_}; }

  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  bool same_shape(const Grid& other) const {
    return bins_ == other.bins_ && frames_ == other.frames_;
  }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return bins_ == other.bins() && frames_ == other.frames();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t bins_ = 0;
  std::size_t frames_ = 0;
  std::vector<T> data_;
};

template <typename T, typename U>
void require_same_shape(const Grid<T>& a, const Grid<U>& b, const char* what) {
  if (a.bins() != b.bins() || a.frames() != b.frames())
    throw ValidationError(std::string("grid mismatch: ") + what);
}

template <typename T>
bool all_finite(const Grid<T>& g) {
  for (const auto& v : g.raw())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace pgvoc
