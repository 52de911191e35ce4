// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <string>
#include <unordered_map>
#include <vector>

#include "fastfit/error.hpp"
#include "fastfit/hash.hpp"
#include "fastfit/ops.hpp"
#include "fastfit/rng.hpp"
#include "fastfit/stft.hpp"

namespace fastfit {

enum class EncoderKind { stft_bank, neural, single_stft_no_skip };
enum class StftRepresentation { cartesian, magnitude };

inline const char* to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::stft_bank: return "stft_bank";
    case EncoderKind::neural: return "neural";
    case EncoderKind::single_stft_no_skip: return "single_stft_no_skip";
  }
  return "unknown";
}

inline const char* to_string(StftRepresentation r) {
  return r == StftRepresentation::cartesian ? "cartesian" : "magnitude";
}

struct ModelConfig {
  int n_blocks = 3;
  std::vector<int> upsample_ratios{8, 8, 4};
  int base_channels = 32;
  std::vector<int> dilations{1, 3, 9};
  int z_dim = 100;
  int w_dim = 256;
  int t_max = 3;
  int n_mels = 100;
  int kp_hidden = 64;   // kernel predictor hidden width
  int kp_conv_kernel = 3;
  int lvc_kernel = 3;
  int t_emb_base = 128;
  int t_emb_dim = 512;
  int head_kernel = 7;
  EncoderKind encoder_kind = EncoderKind::stft_bank;
  StftRepresentation stft_representation = StftRepresentation::cartesian;
  int analysis_n_fft = 1024;
  int analysis_hop = 256;
  int analysis_win = 1024;

  int hop_total() const {
    int p = 1;
    for (int r : upsample_ratios) p *= r;
    return p;
  }

  int layers() const { return static_cast<int>(dilations.size()); }

  // Hop of feature bank entry n: the total hop divided by the upsampling
  // applied before decoder block n.
  int bank_hop(int n) const {
    int p = 1;
    for (int i = 0; i < n; ++i) p *= upsample_ratios[static_cast<std::size_t>(i)];
    return hop_total() / p;
  }

  // FFT/window size of bank entry n is four times its hop.
  StftParams bank_params(int n) const {
    const int hop = bank_hop(n);
    return make_stft_params(4 * hop, hop, 4 * hop, true);
  }

  StftParams analysis_params() const {
    return make_stft_params(analysis_n_fft, analysis_hop, analysis_win, true);
  }

  int representation_channels(int n) const {
    const int bins = 4 * bank_hop(n) / 2 + 1;
    return stft_representation == StftRepresentation::cartesian ? 2 * bins : bins;
  }

  bool block_has_skip(int n) const {
    return n >= 1 && encoder_kind != EncoderKind::single_stft_no_skip;
  }
};

inline void validate_config(const ModelConfig& c) {
  if (c.n_blocks <= 0) raise(ErrorKind::config, "n_blocks must be positive");
  if (static_cast<int>(c.upsample_ratios.size()) != c.n_blocks)
    raise(ErrorKind::config, "upsample_ratios length must equal n_blocks");
  for (int r : c.upsample_ratios)
    if (r < 2 || r % 2 != 0) raise(ErrorKind::config, "upsample ratios must be even and >= 2");
  if (c.dilations.empty()) raise(ErrorKind::config, "at least one dilation is required");
  for (int d : c.dilations)
    if (d <= 0) raise(ErrorKind::config, "dilations must be positive");
  if (c.base_channels <= 0 || c.z_dim <= 0 || c.w_dim <= 0 || c.n_mels <= 0 || c.kp_hidden <= 0)
    raise(ErrorKind::config, "channel/width fields must be positive");
  if (c.t_max < 1) raise(ErrorKind::config, "t_max must be >= 1");
  if (c.t_emb_base < 2 || c.t_emb_base % 2 != 0)
    raise(ErrorKind::config, "t_emb_base must be even and >= 2");
  if (c.t_emb_dim <= 0) raise(ErrorKind::config, "t_emb_dim must be positive");
  if (c.lvc_kernel < 1 || c.lvc_kernel % 2 == 0)
    raise(ErrorKind::config, "lvc_kernel must be odd");
  if (c.kp_conv_kernel < 1 || c.kp_conv_kernel % 2 == 0)
    raise(ErrorKind::config, "kp_conv_kernel must be odd");
  if (c.head_kernel < 1 || c.head_kernel % 2 == 0)
    raise(ErrorKind::config, "head_kernel must be odd");
  if (c.hop_total() != c.analysis_hop)
    raise(ErrorKind::config, "upsample ratios must multiply to the analysis hop");
  make_stft_params(c.analysis_n_fft, c.analysis_hop, c.analysis_win, true);
  for (int n = 0; n < c.n_blocks; ++n) c.bank_params(n);
}

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"n_blocks", c.n_blocks},
                     {"upsample_ratios", c.upsample_ratios},
                     {"base_channels", c.base_channels},
                     {"dilations", c.dilations},
                     {"z_dim", c.z_dim},
                     {"w_dim", c.w_dim},
                     {"t_max", c.t_max},
                     {"n_mels", c.n_mels},
                     {"kp_hidden", c.kp_hidden},
                     {"kp_conv_kernel", c.kp_conv_kernel},
                     {"lvc_kernel", c.lvc_kernel},
                     {"t_emb_base", c.t_emb_base},
                     {"t_emb_dim", c.t_emb_dim},
                     {"head_kernel", c.head_kernel},
                     {"encoder_kind", to_string(c.encoder_kind)},
                     {"stft_representation", to_string(c.stft_representation)},
                     {"analysis_n_fft", c.analysis_n_fft},
                     {"analysis_hop", c.analysis_hop},
                     {"analysis_win", c.analysis_win}};
}

inline EncoderKind encoder_kind_from_string(const std::string& s) {
  if (s == "stft_bank" || s == "stft") return EncoderKind::stft_bank;
  if (s == "neural") return EncoderKind::neural;
  if (s == "single_stft_no_skip" || s == "no-skip") return EncoderKind::single_stft_no_skip;
  raise(ErrorKind::config, "unknown encoder kind '" + s + "'");
}

inline StftRepresentation representation_from_string(const std::string& s) {
  if (s == "cartesian") return StftRepresentation::cartesian;
  if (s == "magnitude") return StftRepresentation::magnitude;
  raise(ErrorKind::config, "unknown STFT representation '" + s + "'");
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  try {
    c.n_blocks = j.at("n_blocks").get<int>();
    c.upsample_ratios = j.at("upsample_ratios").get<std::vector<int>>();
    c.base_channels = j.at("base_channels").get<int>();
    c.dilations = j.at("dilations").get<std::vector<int>>();
    c.z_dim = j.at("z_dim").get<int>();
    c.w_dim = j.at("w_dim").get<int>();
    c.t_max = j.at("t_max").get<int>();
    c.n_mels = j.at("n_mels").get<int>();
    c.kp_hidden = j.at("kp_hidden").get<int>();
    c.kp_conv_kernel = j.at("kp_conv_kernel").get<int>();
    c.lvc_kernel = j.at("lvc_kernel").get<int>();
    c.t_emb_base = j.at("t_emb_base").get<int>();
    c.t_emb_dim = j.at("t_emb_dim").get<int>();
    c.head_kernel = j.at("head_kernel").get<int>();
    c.encoder_kind = encoder_kind_from_string(j.at("encoder_kind").get<std::string>());
    c.stft_representation = representation_from_string(j.at("stft_representation").get<std::string>());
    c.analysis_n_fft = j.at("analysis_n_fft").get<int>();
    c.analysis_hop = j.at("analysis_hop").get<int>();
    c.analysis_win = j.at("analysis_win").get<int>();
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::config, std::string("bad model config: ") + e.what());
  }
  validate_config(c);
}

// Identity of the weight-shaping fields. t_max is runtime-overridable and
// does not affect any tensor shape, so it is excluded.
inline std::uint64_t config_hash(const ModelConfig& c) {
  nlohmann::json j;
  to_json(j, c);
  j.erase("t_max");
  return fnv1a64(j.dump());
}

enum class InitKind { kaiming_uniform, zeros, ones, normal_001 };

struct TensorSpec {
  std::string name;
  std::vector<int> shape;
  InitKind init = InitKind::zeros;

  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
};

namespace detail {

inline void push_kp_specs(std::vector<TensorSpec>& out, const std::string& prefix,
                          const ModelConfig& c) {
  const int C = c.base_channels;
  const int H = c.kp_hidden;
  const int kk = c.kp_conv_kernel;
  const int kp_out = c.layers() * (C * C * c.lvc_kernel + C);
  out.push_back({prefix + "conv1.weight", {H, c.n_mels, kk}, InitKind::kaiming_uniform});
  out.push_back({prefix + "conv1.bias", {H}, InitKind::zeros});
  out.push_back({prefix + "alpha1", {H}, InitKind::ones});
  out.push_back({prefix + "conv2.weight", {H, H, kk}, InitKind::kaiming_uniform});
  out.push_back({prefix + "conv2.bias", {H}, InitKind::zeros});
  out.push_back({prefix + "alpha2", {H}, InitKind::ones});
  out.push_back({prefix + "out.weight", {kp_out, H, kk}, InitKind::normal_001});
  out.push_back({prefix + "out.bias", {kp_out}, InitKind::zeros});
}

inline void push_sublayer_specs(std::vector<TensorSpec>& out, const std::string& prefix,
                                const ModelConfig& c) {
  const int C = c.base_channels;
  out.push_back({prefix + "alpha", {C}, InitKind::ones});
  out.push_back({prefix + "tproj.weight", {C, c.t_emb_dim}, InitKind::kaiming_uniform});
  out.push_back({prefix + "tproj.bias", {C}, InitKind::zeros});
  out.push_back({prefix + "adaln.gamma.weight", {C, c.w_dim}, InitKind::zeros});
  out.push_back({prefix + "adaln.gamma.bias", {C}, InitKind::zeros});
  out.push_back({prefix + "adaln.beta.weight", {C, c.w_dim}, InitKind::zeros});
  out.push_back({prefix + "adaln.beta.bias", {C}, InitKind::zeros});
}

}  // namespace detail

// Canonical tensor walk. Order is part of the format: weight initialization
// draws from one stream in exactly this order, and .ffw payloads are laid
// out the same way.
inline std::vector<TensorSpec> tensor_specs(const ModelConfig& c) {
  validate_config(c);
  const int C = c.base_channels;
  std::vector<TensorSpec> out;

  out.push_back({"mapping.fc1.weight", {c.w_dim, c.z_dim}, InitKind::kaiming_uniform});
  out.push_back({"mapping.fc1.bias", {c.w_dim}, InitKind::zeros});
  out.push_back({"mapping.fc2.weight", {c.w_dim, c.w_dim}, InitKind::kaiming_uniform});
  out.push_back({"mapping.fc2.bias", {c.w_dim}, InitKind::zeros});

  out.push_back({"step.fc1.weight", {c.t_emb_dim, c.t_emb_base}, InitKind::kaiming_uniform});
  out.push_back({"step.fc1.bias", {c.t_emb_dim}, InitKind::zeros});
  out.push_back({"step.fc2.weight", {c.t_emb_dim, c.t_emb_dim}, InitKind::kaiming_uniform});
  out.push_back({"step.fc2.bias", {c.t_emb_dim}, InitKind::zeros});

  if (c.encoder_kind == EncoderKind::neural) {
    for (int n = 0; n < c.n_blocks; ++n) {
      const int stride = c.upsample_ratios[static_cast<std::size_t>(c.n_blocks - 1 - n)];
      const int in_ch = n == 0 ? 1 : C;
      const std::string p = "enc." + std::to_string(n) + ".";
      out.push_back({p + "down.weight", {C, in_ch, 2 * stride}, InitKind::kaiming_uniform});
      out.push_back({p + "down.bias", {C}, InitKind::zeros});
      detail::push_kp_specs(out, p + "kp.", c);
      for (int j = 0; j < c.layers(); ++j)
        detail::push_sublayer_specs(out, p + "sub." + std::to_string(j) + ".", c);
    }
  } else {
    const int entries = c.encoder_kind == EncoderKind::stft_bank ? c.n_blocks : 1;
    for (int n = 0; n < entries; ++n) {
      const std::string p = "bank." + std::to_string(n) + ".";
      out.push_back({p + "proj.weight", {C, c.representation_channels(n), 1},
                     InitKind::kaiming_uniform});
      out.push_back({p + "proj.bias", {C}, InitKind::zeros});
    }
  }

  for (int n = 0; n < c.n_blocks; ++n) {
    const int ratio = c.upsample_ratios[static_cast<std::size_t>(n)];
    const std::string p = "dec." + std::to_string(n) + ".";
    if (c.block_has_skip(n)) {
      out.push_back({p + "fuse.weight", {C, 2 * C, 1}, InitKind::kaiming_uniform});
      out.push_back({p + "fuse.bias", {C}, InitKind::zeros});
    }
    out.push_back({p + "up.weight", {C, C, 2 * ratio}, InitKind::kaiming_uniform});
    out.push_back({p + "up.bias", {C}, InitKind::zeros});
    detail::push_kp_specs(out, p + "kp.", c);
    for (int j = 0; j < c.layers(); ++j)
      detail::push_sublayer_specs(out, p + "sub." + std::to_string(j) + ".", c);
  }

  out.push_back({"head.alpha", {C}, InitKind::ones});
  out.push_back({"head.conv.weight", {1, C, c.head_kernel}, InitKind::kaiming_uniform});
  out.push_back({"head.conv.bias", {1}, InitKind::zeros});
  return out;
}

inline std::size_t param_count(const ModelConfig& c) {
  std::size_t n = 0;
  for (const TensorSpec& s : tensor_specs(c)) n += s.numel();
  return n;
}

struct WeightStore {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::uint64_t hash = 0;  // config_hash(config) at creation/load time
  std::vector<TensorSpec> specs;
  std::unordered_map<std::string, Tensor> tensors;

  const Tensor& get(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) raise(ErrorKind::integrity, "missing tensor '" + name + "'");
    return it->second;
  }
};

namespace detail {

inline int fan_in(const TensorSpec& s) {
  if (s.shape.size() == 2) return s.shape[1];
  if (s.shape.size() == 3) return s.shape[1] * s.shape[2];
  return s.shape.empty() ? 1 : s.shape.back();
}

}  // namespace detail

// Fresh weights from one seeded stream, drawn in spec order. Uniform fan-in
// scaling for conv/linear weights, N(0, 0.01) for the kernel-predictor
// output stage, ones for snake slopes, zeros elsewhere.
inline WeightStore init_weights(const ModelConfig& config, std::uint64_t seed) {
  WeightStore store;
  store.config = config;
  store.seed = seed;
  store.hash = config_hash(config);
  store.specs = tensor_specs(config);
  NoiseStream stream(seed, 1);
  for (const TensorSpec& s : store.specs) {
    Tensor t;
    t.shape = s.shape;
    t.data.resize(s.numel());
    switch (s.init) {
      case InitKind::zeros:
        break;
      case InitKind::ones:
        std::fill(t.data.begin(), t.data.end(), 1.0f);
        break;
      case InitKind::kaiming_uniform: {
        const double bound = std::sqrt(1.0 / detail::fan_in(s));
        for (float& v : t.data)
          v = static_cast<float>((2.0 * stream.uniform() - 1.0) * bound);
        break;
      }
      case InitKind::normal_001:
        for (float& v : t.data) v = static_cast<float>(0.01 * stream.gaussian());
        break;
    }
    store.tensors.emplace(s.name, std::move(t));
  }
  return store;
}

inline void validate_weights(const WeightStore& store) {
  if (store.specs.size() != store.tensors.size())
    raise(ErrorKind::integrity, "weight store tensor count does not match spec walk");
  for (const TensorSpec& s : store.specs) {
    const Tensor& t = store.get(s.name);
    if (t.shape != s.shape)
      raise(ErrorKind::integrity, "tensor '" + s.name + "' has the wrong shape");
    for (float v : t.data)
      if (!std::isfinite(v))
        raise(ErrorKind::integrity, "tensor '" + s.name + "' contains a non-finite value");
  }
}

}  // namespace fastfit
