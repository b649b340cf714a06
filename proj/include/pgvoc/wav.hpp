// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pgvoc/audio.hpp"
#include "pgvoc/error.hpp"

namespace pgvoc {

enum class WavEncoding { Pcm16, Float32 };

namespace detail {

inline std::uint16_t load_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t load_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void store_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}
inline void store_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}
inline void store_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace detail

/// Decodes a mono RIFF/WAVE byte stream (16-bit PCM or 32-bit float).
inline AudioBuffer decode_wav(const std::vector<unsigned char>& bytes) {
  using detail::load_u16;
  using detail::load_u32;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE stream");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = load_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw FormatError("truncated WAV chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("short fmt chunk");
      format = load_u16(chunk + 8);
      channels = load_u16(chunk + 10);
      rate = load_u32(chunk + 12);
      bits = load_u16(chunk + 22);
      if (format == 0xFFFE && size >= 40) format = load_u16(chunk + 8 + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt || data == nullptr) throw FormatError("WAV is missing fmt or data chunk");
  if (channels != 1) throw FormatError("only mono WAV files are supported");
  if (rate == 0) throw FormatError("WAV sample rate is zero");

  AudioBuffer audio;
  audio.sample_rate = rate;
  if (format == 1 && bits == 16) {
    audio.samples.resize(data_size / 2);
    for (std::size_t i = 0; i < audio.samples.size(); ++i) {
      const auto v = static_cast<std::int16_t>(load_u16(data + 2 * i));
      audio.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    audio.samples.resize(data_size / 4);
    for (std::size_t i = 0; i < audio.samples.size(); ++i)
      audio.samples[i] = static_cast<double>(std::bit_cast<float>(load_u32(data + 4 * i)));
  } else {
    throw FormatError("unsupported WAV encoding (need 16-bit PCM or 32-bit float)");
  }
  return audio;
}

inline std::vector<unsigned char> encode_wav(const AudioBuffer& audio, WavEncoding encoding) {
  audio.validate();
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint16_t format = encoding == WavEncoding::Pcm16 ? 1 : 3;
  const std::uint32_t data_size = static_cast<std::uint32_t>(audio.samples.size() * (bits / 8));

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  detail::store_tag(out, "RIFF");
  detail::store_u32(out, 36 + data_size);
  detail::store_tag(out, "WAVE");
  detail::store_tag(out, "fmt ");
  detail::store_u32(out, 16);
  detail::store_u16(out, format);
  detail::store_u16(out, 1);
  detail::store_u32(out, audio.sample_rate);
  detail::store_u32(out, audio.sample_rate * (bits / 8));
  detail::store_u16(out, bits / 8);
  detail::store_u16(out, bits);
  detail::store_tag(out, "data");
  detail::store_u32(out, data_size);
  for (double s : audio.samples) {
    if (encoding == WavEncoding::Pcm16) {
      const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      detail::store_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    } else {
      detail::store_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }
  return out;
}

inline AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

inline void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
                      WavEncoding encoding = WavEncoding::Float32) {
  const auto bytes = encode_wav(audio, encoding);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace pgvoc
