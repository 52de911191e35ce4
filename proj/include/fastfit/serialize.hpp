// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "fastfit/error.hpp"
#include "fastfit/hash.hpp"
#include "fastfit/mel.hpp"
#include "fastfit/model.hpp"
#include "fastfit/wav.hpp"

namespace fastfit {

constexpr char kMelMagic[8] = {'F', 'M', 'E', 'L', '0', '0', '0', '1'};
constexpr char kWeightsMagic[8] = {'F', 'F', 'W', '0', '0', '0', '0', '1'};
constexpr int kWeightsVersion = 1;
constexpr std::size_t kPayloadAlign = 64;

namespace detail {

struct ByteCursor {
  const unsigned char* p;
  std::size_t size;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > size) raise(ErrorKind::io, std::string("truncated file while reading ") + what);
  }
  void skip(std::size_t n, const char* what) {
    need(n, what);
    pos += n;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    const std::uint32_t v = le32(p + pos);
    pos += 4;
    return v;
  }
};

inline nlohmann::json parse_header_json(ByteCursor& cur, const char* what) {
  const std::uint32_t len = cur.u32("header length");
  cur.need(len, what);
  nlohmann::json j = nlohmann::json::parse(cur.p + cur.pos, cur.p + cur.pos + len, nullptr, false);
  if (j.is_discarded()) raise(ErrorKind::io, std::string("malformed JSON header in ") + what);
  cur.pos += len;
  return j;
}

template <typename T>
T json_get(const nlohmann::json& j, const char* key, ErrorKind kind) {
  if (!j.contains(key)) raise(kind, std::string("missing header field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    raise(kind, std::string("header field '") + key + "' has the wrong type");
  }
}

inline void append_u32(std::vector<unsigned char>& v, std::uint32_t x) { put_le32(v, x); }

}  // namespace detail

// ---------------------------------------------------------------------------
// .fmel: magic, length-prefixed JSON header, float32 frames x n_mels payload.

inline void write_mel(const std::string& path, const MelSpectrogram& mel) {
  if (mel.frames == 0) raise(ErrorKind::empty_input, "mel spectrogram has no frames");
  if (mel.values.size() != mel.frames * static_cast<std::size_t>(mel.n_mels))
    raise(ErrorKind::shape, "mel value count does not match frames*n_mels");
  for (float v : mel.values)
    if (!std::isfinite(v)) raise(ErrorKind::numeric, "mel spectrogram contains a non-finite value");
  nlohmann::json header{{"sample_rate", mel.sample_rate}, {"n_fft", mel.n_fft},
                        {"hop", mel.hop},                 {"win_length", mel.win_length},
                        {"n_mels", mel.n_mels},           {"fmin", mel.fmin},
                        {"fmax", mel.fmax},               {"frames", mel.frames}};
  const std::string js = header.dump();
  std::vector<unsigned char> bytes;
  bytes.insert(bytes.end(), kMelMagic, kMelMagic + 8);
  detail::append_u32(bytes, static_cast<std::uint32_t>(js.size()));
  bytes.insert(bytes.end(), js.begin(), js.end());
  const std::size_t payload = mel.values.size() * sizeof(float);
  const std::size_t off = bytes.size();
  bytes.resize(off + payload);
  std::memcpy(bytes.data() + off, mel.values.data(), payload);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot create '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorKind::io, "short write to '" + path + "'");
}

inline MelSpectrogram read_mel(const std::string& path) {
  const std::vector<unsigned char> bytes = detail::read_file_bytes(path);
  detail::ByteCursor cur{bytes.data(), bytes.size()};
  cur.need(8, "magic");
  if (std::memcmp(bytes.data(), "FMEL", 4) != 0)
    raise(ErrorKind::io, "'" + path + "' is not a mel spectrogram file");
  if (std::memcmp(bytes.data(), kMelMagic, 8) != 0)
    raise(ErrorKind::version, "unsupported mel file version in '" + path + "'");
  cur.pos = 8;
  const nlohmann::json h = detail::parse_header_json(cur, "mel header");

  MelSpectrogram mel;
  mel.sample_rate = detail::json_get<int>(h, "sample_rate", ErrorKind::config);
  mel.n_fft = detail::json_get<int>(h, "n_fft", ErrorKind::config);
  mel.hop = detail::json_get<int>(h, "hop", ErrorKind::config);
  mel.win_length = detail::json_get<int>(h, "win_length", ErrorKind::config);
  mel.n_mels = detail::json_get<int>(h, "n_mels", ErrorKind::config);
  mel.fmin = detail::json_get<double>(h, "fmin", ErrorKind::config);
  mel.fmax = detail::json_get<double>(h, "fmax", ErrorKind::config);
  const std::int64_t frames = detail::json_get<std::int64_t>(h, "frames", ErrorKind::config);

  if (mel.sample_rate <= 0 || mel.n_fft <= 0 || mel.hop <= 0 || mel.win_length <= 0 ||
      mel.n_mels <= 0)
    raise(ErrorKind::config, "mel header fields must be positive");
  if (!(mel.fmin >= 0.0) || !(mel.fmax > mel.fmin) || !std::isfinite(mel.fmax))
    raise(ErrorKind::config, "mel header frequency range is invalid");
  if (frames <= 0) raise(ErrorKind::empty_input, "mel file declares zero frames");

  const std::size_t remaining = bytes.size() - cur.pos;
  const std::uint64_t expected =
      static_cast<std::uint64_t>(frames) * static_cast<std::uint64_t>(mel.n_mels) * sizeof(float);
  if (expected != remaining)
    raise(ErrorKind::io, "mel payload is " + std::to_string(remaining) + " bytes, expected " +
                             std::to_string(expected));
  mel.frames = static_cast<std::size_t>(frames);
  mel.values.resize(static_cast<std::size_t>(frames) * static_cast<std::size_t>(mel.n_mels));
  std::memcpy(mel.values.data(), bytes.data() + cur.pos, remaining);
  for (float v : mel.values)
    if (!std::isfinite(v)) raise(ErrorKind::numeric, "mel payload contains a non-finite value");
  return mel;
}

// ---------------------------------------------------------------------------
// .ffw: magic, length-prefixed JSON (config, seed, tensor directory), zero
// padding to a 64-byte boundary, aligned float32 payloads, trailing CRC32 of
// the payload region.

inline void write_weights(const std::string& path, const WeightStore& store) {
  validate_weights(store);
  nlohmann::json config_json;
  to_json(config_json, store.config);

  std::vector<nlohmann::json> directory;
  std::uint64_t offset = 0;
  for (const TensorSpec& s : store.specs) {
    const std::uint64_t size = s.numel() * sizeof(float);
    directory.push_back(nlohmann::json{
        {"name", s.name}, {"dtype", "f32"}, {"shape", s.shape}, {"offset", offset}, {"size", size}});
    offset = (offset + size + (kPayloadAlign - 1)) / kPayloadAlign * kPayloadAlign;
  }
  const std::uint64_t payload_size = offset;
  nlohmann::json header{{"version", kWeightsVersion},
                        {"config", config_json},
                        {"seed", store.seed},
                        {"payload_size", payload_size},
                        {"tensors", directory}};
  const std::string js = header.dump();

  std::vector<unsigned char> bytes;
  bytes.insert(bytes.end(), kWeightsMagic, kWeightsMagic + 8);
  detail::append_u32(bytes, static_cast<std::uint32_t>(js.size()));
  bytes.insert(bytes.end(), js.begin(), js.end());
  const std::size_t payload_start =
      (bytes.size() + (kPayloadAlign - 1)) / kPayloadAlign * kPayloadAlign;
  bytes.resize(payload_start + payload_size, 0);
  for (std::size_t i = 0; i < store.specs.size(); ++i) {
    const Tensor& t = store.get(store.specs[i].name);
    const std::uint64_t off = directory[i].at("offset").get<std::uint64_t>();
    std::memcpy(bytes.data() + payload_start + off, t.data.data(), t.data.size() * sizeof(float));
  }
  const std::uint32_t crc = crc32(bytes.data() + payload_start, payload_size);
  detail::append_u32(bytes, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot create '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorKind::io, "short write to '" + path + "'");
}

inline WeightStore read_weights(const std::string& path, const ModelConfig* expected = nullptr) {
  const std::vector<unsigned char> bytes = detail::read_file_bytes(path);
  detail::ByteCursor cur{bytes.data(), bytes.size()};
  cur.need(8, "magic");
  if (std::memcmp(bytes.data(), "FFW", 3) != 0)
    raise(ErrorKind::io, "'" + path + "' is not a weights file");
  if (std::memcmp(bytes.data(), kWeightsMagic, 8) != 0)
    raise(ErrorKind::version, "unsupported weights file version in '" + path + "'");
  cur.pos = 8;
  const nlohmann::json h = detail::parse_header_json(cur, "weights header");

  const int version = detail::json_get<int>(h, "version", ErrorKind::version);
  if (version != kWeightsVersion)
    raise(ErrorKind::version, "weights version " + std::to_string(version) + " is not supported");
  if (!h.contains("config")) raise(ErrorKind::config, "weights header misses model config");
  WeightStore store;
  from_json(h.at("config"), store.config);
  store.seed = detail::json_get<std::uint64_t>(h, "seed", ErrorKind::config);
  store.hash = config_hash(store.config);
  const std::uint64_t payload_size =
      detail::json_get<std::uint64_t>(h, "payload_size", ErrorKind::io);

  const std::size_t payload_start = (cur.pos + (kPayloadAlign - 1)) / kPayloadAlign * kPayloadAlign;
  if (payload_start + payload_size + 4 != bytes.size())
    raise(ErrorKind::io, "weights file size does not match its directory");
  const std::uint32_t stored_crc = detail::le32(bytes.data() + payload_start + payload_size);
  const std::uint32_t actual_crc = crc32(bytes.data() + payload_start, payload_size);
  if (stored_crc != actual_crc)
    raise(ErrorKind::integrity, "weights payload checksum mismatch");

  if (!h.contains("tensors") || !h.at("tensors").is_array())
    raise(ErrorKind::io, "weights header misses the tensor directory");

  store.specs = tensor_specs(store.config);
  const auto& dir = h.at("tensors");
  if (dir.size() != store.specs.size())
    raise(ErrorKind::integrity, "tensor directory length does not match the model config");

  std::uint64_t prev_end = 0;
  for (std::size_t i = 0; i < store.specs.size(); ++i) {
    const TensorSpec& s = store.specs[i];
    const nlohmann::json& e = dir[i];
    const std::string name = detail::json_get<std::string>(e, "name", ErrorKind::integrity);
    if (name != s.name)
      raise(ErrorKind::integrity, "tensor directory entry '" + name + "' does not match spec '" +
                                      s.name + "'");
    if (detail::json_get<std::string>(e, "dtype", ErrorKind::version) != "f32")
      raise(ErrorKind::version, "tensor '" + name + "' has an unsupported dtype");
    const std::vector<int> shape = detail::json_get<std::vector<int>>(e, "shape", ErrorKind::integrity);
    if (shape != s.shape) raise(ErrorKind::integrity, "tensor '" + name + "' has the wrong shape");
    const std::uint64_t off = detail::json_get<std::uint64_t>(e, "offset", ErrorKind::integrity);
    const std::uint64_t size = detail::json_get<std::uint64_t>(e, "size", ErrorKind::integrity);
    if (off % kPayloadAlign != 0)
      raise(ErrorKind::integrity, "tensor '" + name + "' offset is not 64-byte aligned");
    if (size != s.numel() * sizeof(float))
      raise(ErrorKind::integrity, "tensor '" + name + "' size does not match its shape");
    if (off < prev_end || off + size > payload_size)
      raise(ErrorKind::integrity, "tensor '" + name + "' payload overlaps or overruns");
    prev_end = off + size;
    Tensor t;
    t.shape = shape;
    t.data.resize(s.numel());
    std::memcpy(t.data.data(), bytes.data() + payload_start + off, size);
    for (float v : t.data)
      if (!std::isfinite(v))
        raise(ErrorKind::integrity, "tensor '" + name + "' contains a non-finite value");
    store.tensors.emplace(s.name, std::move(t));
  }

  if (expected != nullptr && config_hash(*expected) != store.hash)
    raise(ErrorKind::config, "weights file was built for a different model config");
  return store;
}

}  // namespace fastfit
