// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgvoc/error.hpp"
#include "pgvoc/mel.hpp"
#include "pgvoc/phase_gradient.hpp"
#include "pgvoc/stft.hpp"

namespace pgvoc {

// Binary tensor interchange, all integers little-endian:
//
//   char[4]  magic "PGV1"
//   u16      format version (1)
//   u8       dtype (1 = f32, 2 = f64)
//   u8       rank
//   u32      dims[rank]            layout [channel, bin, frame]
//   u32      sample_rate, frame_size, hop_size, n_mels
//   u8       role count (== dims[0]), then one u8 role per channel
//   payload  product(dims) little-endian floats, row-major

inline constexpr std::uint16_t kTensorVersion = 1;

enum class DType : std::uint8_t { F32 = 1, F64 = 2 };

enum class ChannelRole : std::uint8_t { Mel = 0, Magnitude = 1, DeltaM = 2, DeltaN = 3, Lambda = 4, Mean = 5, StdDev = 6 };

struct TensorMetadata {
  std::uint32_t sample_rate = 44100;
  std::uint32_t frame_size = 2048;
  std::uint32_t hop_size = 256;
  std::uint32_t n_mels = 0;

  friend bool operator==(const TensorMetadata&, const TensorMetadata&) = default;
};

struct TensorFile {
  DType dtype = DType::F32;
  std::vector<std::uint32_t> dims;
  TensorMetadata meta;
  std::vector<ChannelRole> roles;
  std::vector<double> data;

  std::size_t element_count() const {
    std::size_t n = dims.empty() ? 0 : 1;
    for (auto d : dims) n *= d;
    return n;
  }

  void validate() const {
    if (dims.empty() || dims.size() > 255) throw FormatError("tensor rank must be 1..255");
    if (roles.size() != dims[0]) throw FormatError("declared channel roles do not match channel count");
    if (data.size() != element_count()) throw FormatError("payload length does not match dims");
    const std::vector<std::vector<ChannelRole>> layouts = {
        {ChannelRole::Mel},
        {ChannelRole::Magnitude, ChannelRole::DeltaM, ChannelRole::DeltaN},
        {ChannelRole::Magnitude, ChannelRole::DeltaM, ChannelRole::DeltaN, ChannelRole::Lambda},
        {ChannelRole::Mean, ChannelRole::StdDev},
    };
    bool known = false;
    for (const auto& l : layouts) known = known || l == roles;
    if (!known) throw FormatError("unrecognised channel role layout");
  }

  /// Element [channel, bin, frame] of a rank-3 tensor.
  double at(std::size_t c, std::size_t m, std::size_t n) const { return data[(c * dims[1] + m) * dims[2] + n]; }
  double& at(std::size_t c, std::size_t m, std::size_t n) { return data[(c * dims[1] + m) * dims[2] + n]; }

  friend bool operator==(const TensorFile&, const TensorFile&) = default;
};

namespace detail {

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& b) : bytes_(b) {}
  const unsigned char* take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("tensor file truncated");
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint8_t u8() { return *take(1); }
  std::uint16_t u16() {
    const auto* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() {
    const auto* p = take(4);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | (static_cast<std::uint64_t>(u32()) << 32);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

inline void put_u8(std::vector<unsigned char>& out, std::uint8_t v) { out.push_back(v); }
inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}
inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

}  // namespace detail

inline std::vector<unsigned char> encode_tensor(const TensorFile& t) {
  t.validate();
  std::vector<unsigned char> out;
  out.insert(out.end(), {'P', 'G', 'V', '1'});
  detail::put_u16(out, kTensorVersion);
  detail::put_u8(out, static_cast<std::uint8_t>(t.dtype));
  detail::put_u8(out, static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) detail::put_u32(out, d);
  detail::put_u32(out, t.meta.sample_rate);
  detail::put_u32(out, t.meta.frame_size);
  detail::put_u32(out, t.meta.hop_size);
  detail::put_u32(out, t.meta.n_mels);
  detail::put_u8(out, static_cast<std::uint8_t>(t.roles.size()));
  for (auto r : t.roles) detail::put_u8(out, static_cast<std::uint8_t>(r));
  for (double v : t.data) {
    if (t.dtype == DType::F32) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    else detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

inline TensorFile decode_tensor(const std::vector<unsigned char>& bytes) {
  detail::ByteReader in(bytes);
  if (std::memcmp(in.take(4), "PGV1", 4) != 0) throw FormatError("bad tensor magic");
  if (in.u16() != kTensorVersion) throw FormatError("unsupported tensor format version");
  TensorFile t;
  const std::uint8_t dtype = in.u8();
  if (dtype != 1 && dtype != 2) throw FormatError("unknown tensor dtype code");
  t.dtype = static_cast<DType>(dtype);
  const std::uint8_t rank = in.u8();
  for (std::uint8_t i = 0; i < rank; ++i) t.dims.push_back(in.u32());
  t.meta.sample_rate = in.u32();
  t.meta.frame_size = in.u32();
  t.meta.hop_size = in.u32();
  t.meta.n_mels = in.u32();
  const std::uint8_t role_count = in.u8();
  for (std::uint8_t i = 0; i < role_count; ++i) {
    const std::uint8_t r = in.u8();
    if (r > static_cast<std::uint8_t>(ChannelRole::StdDev)) throw FormatError("unknown channel role");
    t.roles.push_back(static_cast<ChannelRole>(r));
  }
  const std::size_t count = t.element_count();
  const std::size_t width = t.dtype == DType::F32 ? 4 : 8;
  if (in.remaining() != count * width) throw FormatError("payload length does not match dims");
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    t.data[i] = t.dtype == DType::F32 ? static_cast<double>(std::bit_cast<float>(in.u32()))
                                      : std::bit_cast<double>(in.u64());
  t.validate();
  return t;
}

inline void write_tensor(const std::filesystem::path& path, const TensorFile& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline TensorFile read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

// ---- domain conversions ----------------------------------------------------

namespace detail {

inline StftConfig config_from_meta(const TensorMetadata& meta, StftConfig base) {
  base.frame_size = meta.frame_size;
  base.hop_size = meta.hop_size;
  base.fft_size = meta.frame_size;
  base.validate();
  return base;
}

inline void put_channel(TensorFile& t, std::size_t c, const Grid<double>& g) {
  for (std::size_t m = 0; m < g.bins(); ++m)
    for (std::size_t n = 0; n < g.frames(); ++n) t.at(c, m, n) = g(m, n);
}

inline Grid<double> get_channel(const TensorFile& t, std::size_t c) {
  Grid<double> g(t.dims[1], t.dims[2]);
  for (std::size_t m = 0; m < g.bins(); ++m)
    for (std::size_t n = 0; n < g.frames(); ++n) g(m, n) = t.at(c, m, n);
  return g;
}

inline TensorFile make_rank3(std::vector<ChannelRole> roles, std::size_t bins, std::size_t frames,
                             TensorMetadata meta, DType dtype) {
  TensorFile t;
  t.dtype = dtype;
  t.dims = {static_cast<std::uint32_t>(roles.size()), static_cast<std::uint32_t>(bins),
            static_cast<std::uint32_t>(frames)};
  t.meta = meta;
  t.roles = std::move(roles);
  t.data.assign(t.element_count(), 0.0);
  return t;
}

}  // namespace detail

inline TensorMetadata metadata_for(const StftConfig& cfg, std::uint32_t sample_rate, std::size_t n_mels = 0) {
  return {sample_rate, static_cast<std::uint32_t>(cfg.frame_size), static_cast<std::uint32_t>(cfg.hop_size),
          static_cast<std::uint32_t>(n_mels)};
}

inline TensorFile to_tensor(const MelSpectrogram& mel, DType dtype = DType::F32) {
  auto t = detail::make_rank3({ChannelRole::Mel}, mel.bands(), mel.frames(),
                              metadata_for(mel.config, mel.sample_rate, mel.bands()), dtype);
  detail::put_channel(t, 0, mel.values);
  return t;
}

inline MelSpectrogram mel_from_tensor(const TensorFile& t, const StftConfig& base = {}, double floor = 1e-10) {
  t.validate();
  if (t.dims.size() != 3 || t.roles != std::vector<ChannelRole>{ChannelRole::Mel})
    throw FormatError("tensor is not a mel spectrogram");
  if (t.meta.n_mels != t.dims[1]) throw FormatError("n_mels metadata differs from band count");
  return {detail::get_channel(t, 0), detail::config_from_meta(t.meta, base), t.meta.sample_rate, floor};
}

inline TensorFile to_tensor(const SpectralTriple& triple, const ComponentMap* lambda = nullptr,
                            DType dtype = DType::F32) {
  std::vector<ChannelRole> roles = {ChannelRole::Magnitude, ChannelRole::DeltaM, ChannelRole::DeltaN};
  if (lambda) {
    require_same_shape(triple.magnitude, lambda->lambda, "triple vs lambda");
    roles.push_back(ChannelRole::Lambda);
  }
  auto t = detail::make_rank3(std::move(roles), triple.bins(), triple.frames(),
                              metadata_for(triple.config, triple.sample_rate), dtype);
  detail::put_channel(t, 0, triple.magnitude);
  detail::put_channel(t, 1, triple.delta_m);
  detail::put_channel(t, 2, triple.delta_n);
  if (lambda) detail::put_channel(t, 3, lambda->lambda);
  return t;
}

struct TripleTensor {
  SpectralTriple triple;
  std::optional<ComponentMap> lambda;
};

inline TripleTensor triple_from_tensor(const TensorFile& t, const StftConfig& base = {}) {
  t.validate();
  if (t.dims.size() != 3 || t.roles.empty() || t.roles.front() != ChannelRole::Magnitude)
    throw FormatError("tensor is not a spectral triple");
  TripleTensor out;
  out.triple.config = detail::config_from_meta(t.meta, base);
  out.triple.sample_rate = t.meta.sample_rate;
  if (t.dims[1] != out.triple.config.bins()) throw FormatError("triple bin count does not match frame size");
  out.triple.magnitude = detail::get_channel(t, 0);
  out.triple.delta_m = detail::get_channel(t, 1);
  out.triple.delta_n = detail::get_channel(t, 2);
  if (t.roles.size() == 4) out.lambda = ComponentMap{detail::get_channel(t, 3)};
  return out;
}

inline TensorFile to_tensor(const MelStats& stats, const StftConfig& cfg, std::uint32_t sample_rate,
                            DType dtype = DType::F64) {
  require(stats.mean.size() == stats.stddev.size(), "stats mean/std lengths differ");
  auto t = detail::make_rank3({ChannelRole::Mean, ChannelRole::StdDev}, stats.mean.size(), 1,
                              metadata_for(cfg, sample_rate, stats.mean.size()), dtype);
  for (std::size_t b = 0; b < stats.mean.size(); ++b) {
    t.at(0, b, 0) = stats.mean[b];
    t.at(1, b, 0) = stats.stddev[b];
  }
  return t;
}

}  // namespace pgvoc
