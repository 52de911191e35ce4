// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fastfit/audio.hpp"
#include "fastfit/error.hpp"

namespace fastfit {

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_le32(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back(static_cast<unsigned char>(x & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 8) & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 16) & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 24) & 0xFF));
}

inline void put_le16(std::vector<unsigned char>& v, std::uint16_t x) {
  v.push_back(static_cast<unsigned char>(x & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 8) & 0xFF));
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace detail

// Strict PCM16 mono reader. Anything else (extra channels, other codecs or
// bit depths, unexpected sample rates) is rejected; the engine never
// resamples.
inline AudioBuffer read_wav(const std::string& path, int required_rate = 24000) {
  const std::vector<unsigned char> b = detail::read_file_bytes(path);
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0)
    raise(ErrorKind::io, "'" + path + "' is not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_off = 0, data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t chunk_len = detail::le32(b.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_len > b.size()) raise(ErrorKind::io, "truncated WAV chunk in '" + path + "'");
    if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
      if (chunk_len < 16) raise(ErrorKind::io, "short fmt chunk");
      format = detail::le16(b.data() + body);
      channels = detail::le16(b.data() + body + 2);
      rate = detail::le32(b.data() + body + 4);
      bits = detail::le16(b.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
      data_off = body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);
  }
  if (!have_fmt || data_off == 0) raise(ErrorKind::io, "WAV file misses fmt or data chunk");
  if (format != 1 || bits != 16)
    raise(ErrorKind::usage, "only PCM 16-bit WAV input is supported");
  if (channels != 1)
    raise(ErrorKind::usage, "only mono WAV input is supported, got " + std::to_string(channels) +
                                " channels");
  if (required_rate > 0 && rate != static_cast<std::uint32_t>(required_rate))
    raise(ErrorKind::usage, "expected " + std::to_string(required_rate) + " Hz input, got " +
                                std::to_string(rate) + " Hz (resampling is not supported)");
  AudioBuffer out;
  out.sample_rate = static_cast<int>(rate);
  const std::size_t n = data_len / 2;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t s =
        static_cast<std::int16_t>(detail::le16(b.data() + data_off + 2 * i));
    out.samples[i] = static_cast<float>(s) / 32767.0f;
  }
  return out;
}

inline void write_wav(const std::string& path, const AudioBuffer& audio) {
  check_finite(audio.samples, "WAV output");
  std::vector<unsigned char> b;
  const std::uint32_t data_len = static_cast<std::uint32_t>(audio.samples.size() * 2);
  b.reserve(44 + data_len);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  detail::put_le32(b, 36 + data_len);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_le32(b, 16);
  detail::put_le16(b, 1);  // PCM
  detail::put_le16(b, 1);  // mono
  detail::put_le32(b, static_cast<std::uint32_t>(audio.sample_rate));
  detail::put_le32(b, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  detail::put_le16(b, 2);
  detail::put_le16(b, 16);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  detail::put_le32(b, data_len);
  for (float v : audio.samples) {
    const long q = std::lround(static_cast<double>(v) * 32767.0);
    const std::int16_t s = static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
    detail::put_le16(b, static_cast<std::uint16_t>(s));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot create '" + path + "'");
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) raise(ErrorKind::io, "short write to '" + path + "'");
}

}  // namespace fastfit
