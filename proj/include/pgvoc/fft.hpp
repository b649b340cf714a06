// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include "pgvoc/error.hpp"

namespace pgvoc {

namespace detail {
// FFTW's planner is not reentrant; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Real-to-complex FFT of a fixed size with its own aligned work buffers.
/// Planning uses FFTW_ESTIMATE so the chosen algorithm, and therefore every
/// output bit, is the same on every run.
class RealFft {
 public:
  explicit RealFft(std::size_t size) : size_(size) {
    require(size >= 2, "fft size must be at least 2");
    real_ = fftw_alloc_real(size_);
    spectrum_ = fftw_alloc_complex(size_ / 2 + 1);
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), real_, spectrum_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(size_), spectrum_, real_, FFTW_ESTIMATE);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  ~RealFft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spectrum_);
  }

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  /// Time buffer to fill before forward(), or to read after inverse().
  std::span<double> time() { return {real_, size_}; }
  std::span<std::complex<double>> spectrum() {
    return {reinterpret_cast<std::complex<double>*>(spectrum_), bins()};
  }

  /// time() -> spectrum(), unnormalized.
  void forward() { fftw_execute(forward_); }
  /// spectrum() -> time(), scaled by 1/size so inverse(forward(x)) == x.
  /// Overwrites spectrum().
  void inverse() {
    fftw_execute(inverse_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t i = 0; i < size_; ++i) real_[i] *= scale;
  }
  /// As inverse() without the 1/size scaling.
  void inverse_unscaled() { fftw_execute(inverse_); }

 private:
  std::size_t size_;
  double* real_ = nullptr;
  fftw_complex* spectrum_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

/// Per-thread cached transform of the requested size.
inline RealFft& real_fft(std::size_t size) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[size];
  if (!slot) slot = std::make_unique<RealFft>(size);
  return *slot;
}

}  // namespace pgvoc
