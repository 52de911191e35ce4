// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fastfit/audio.hpp"
#include "fastfit/error.hpp"
#include "fastfit/mel.hpp"
#include "fastfit/model.hpp"
#include "fastfit/ops.hpp"
#include "fastfit/stft.hpp"

namespace fastfit {

// Everything the generator is conditioned on for one refinement step.
struct ConditioningBundle {
  MelSpectrogram c;
  std::vector<float> z;
  std::vector<float> w;      // mapping_network(z)
  int t = 1;
  std::vector<float> t_emb;  // step_embedding(t)
};

inline ConditioningBundle make_conditioning(const MelSpectrogram& c, const std::vector<float>& z,
                                            int t, const ModelConfig& config,
                                            const WeightStore& weights) {
  if (c.frames == 0) raise(ErrorKind::empty_input, "conditioning mel has no frames");
  if (c.n_mels != config.n_mels) raise(ErrorKind::shape, "mel channel count does not match config");
  if (z.size() != static_cast<std::size_t>(config.z_dim))
    raise(ErrorKind::shape, "z size does not match config.z_dim");
  if (t < 1 || t > config.t_max)
    raise(ErrorKind::range, "step index " + std::to_string(t) + " outside [1, " +
                                std::to_string(config.t_max) + "]");
  ConditioningBundle b;
  b.c = c;
  b.z = z;
  b.t = t;
  b.w = mapping_network(z, weights.get("mapping.fc1.weight"), weights.get("mapping.fc1.bias"),
                        weights.get("mapping.fc2.weight"), weights.get("mapping.fc2.bias"));
  b.t_emb = step_embedding(t, config.t_emb_base, weights.get("step.fc1.weight"),
                           weights.get("step.fc1.bias"), weights.get("step.fc2.weight"),
                           weights.get("step.fc2.bias"));
  return b;
}

namespace detail {

// mel (frames x n_mels) transposed into a channels x steps map
inline FeatureMap mel_feature(const MelSpectrogram& c) {
  FeatureMap f(c.n_mels, static_cast<long>(c.frames));
  for (std::size_t m = 0; m < c.frames; ++m)
    for (int b = 0; b < c.n_mels; ++b) f.at(b, static_cast<long>(m)) = c.at(m, b);
  return f;
}

inline FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
  if (a.steps != b.steps) raise(ErrorKind::shape, "channel concat needs equal step counts");
  FeatureMap out(a.channels + b.channels, a.steps);
  std::copy(a.values.begin(), a.values.end(), out.values.begin());
  std::copy(b.values.begin(), b.values.end(), out.values.begin() + a.values.size());
  return out;
}

inline void add_broadcast(FeatureMap& x, const std::vector<float>& per_channel) {
  if (per_channel.size() != static_cast<std::size_t>(x.channels))
    raise(ErrorKind::shape, "broadcast vector does not match channels");
  for (int c = 0; c < x.channels; ++c) {
    float* r = x.row(c);
    const float v = per_channel[static_cast<std::size_t>(c)];
    for (long t = 0; t < x.steps; ++t) r[t] += v;
  }
}

}  // namespace detail

// Predict per-frame LVC kernels and biases for one block from the mel
// conditioning: two snake-activated convolutions into a wide 1d conv whose
// channels hold, per dilated sub-layer, the kernel entries followed by the
// output biases.
inline LvcKernels kernel_predictor(const FeatureMap& c_map, const ModelConfig& config,
                                   const WeightStore& weights, const std::string& prefix) {
  if (c_map.channels != config.n_mels)
    raise(ErrorKind::shape, "kernel predictor input must have n_mels channels");
  const int pad = (config.kp_conv_kernel - 1) / 2;
  FeatureMap h = conv1d(c_map, weights.get(prefix + "conv1.weight"),
                        &weights.get(prefix + "conv1.bias"), 1, 1, pad);
  h = snake(h, weights.get(prefix + "alpha1"));
  h = conv1d(h, weights.get(prefix + "conv2.weight"), &weights.get(prefix + "conv2.bias"), 1, 1,
             pad);
  h = snake(h, weights.get(prefix + "alpha2"));
  h = conv1d(h, weights.get(prefix + "out.weight"), &weights.get(prefix + "out.bias"), 1, 1, pad);

  const int C = config.base_channels;
  const int k = config.lvc_kernel;
  const int layers = config.layers();
  const int per_layer = C * C * k + C;
  LvcKernels out;
  out.frames = h.steps;
  out.layers = layers;
  out.out_ch = C;
  out.in_ch = C;
  out.kernel = k;
  out.kernels.resize(static_cast<std::size_t>(h.steps) * layers * C * C * k);
  out.biases.resize(static_cast<std::size_t>(h.steps) * layers * C);
  for (long f = 0; f < h.steps; ++f) {
    for (int l = 0; l < layers; ++l) {
      const int ch0 = l * per_layer;
      float* kf = out.kernels.data() + f * out.kernel_stride_frame() +
                  static_cast<std::size_t>(l) * C * C * k;
      for (int i = 0; i < C * C * k; ++i) kf[i] = h.at(ch0 + i, f);
      float* bf = out.biases.data() + (f * layers + l) * static_cast<std::size_t>(C);
      for (int o = 0; o < C; ++o) bf[o] = h.at(ch0 + C * C * k + o, f);
    }
  }
  return out;
}

namespace detail {

// snake -> LVC -> +t_emb projection -> residual -> AdaLN, shared by encoder
// and decoder blocks.
inline FeatureMap run_sublayers(FeatureMap x, const LvcKernels& kernels, int lvc_hop,
                                const ConditioningBundle& bundle, const ModelConfig& config,
                                const WeightStore& weights, const std::string& prefix) {
  for (int j = 0; j < config.layers(); ++j) {
    const std::string p = prefix + "sub." + std::to_string(j) + ".";
    FeatureMap h = snake(x, weights.get(p + "alpha"));
    h = location_variable_conv(h, kernels, j, lvc_hop,
                               config.dilations[static_cast<std::size_t>(j)]);
    const std::vector<float> tproj =
        linear(bundle.t_emb, weights.get(p + "tproj.weight"), weights.get(p + "tproj.bias"));
    add_broadcast(h, tproj);
    for (std::size_t i = 0; i < x.values.size(); ++i) x.values[i] += h.values[i];
    x = adaln(x, bundle.w, weights.get(p + "adaln.gamma.weight"),
              weights.get(p + "adaln.gamma.bias"), weights.get(p + "adaln.beta.weight"),
              weights.get(p + "adaln.beta.bias"));
  }
  return x;
}

}  // namespace detail

// Multi-resolution STFT encoder: analyze y at each bank entry, drop the
// trailing centered frame so entry n has exactly len(y)/hop_n steps, then
// project to the decoder width with a 1x1 convolution.
inline std::vector<FeatureMap> encode_stft_bank(const AudioBuffer& y, const ModelConfig& config,
                                                const WeightStore& weights) {
  if (y.samples.empty()) raise(ErrorKind::empty_input, "encoder input is empty");
  if (y.samples.size() % static_cast<std::size_t>(config.hop_total()) != 0)
    raise(ErrorKind::shape, "encoder input length must be a multiple of " +
                                std::to_string(config.hop_total()) + "; pad the signal first");
  const int entries = config.encoder_kind == EncoderKind::single_stft_no_skip ? 1 : config.n_blocks;
  std::vector<FeatureMap> maps;
  maps.reserve(static_cast<std::size_t>(entries));
  for (int n = 0; n < entries; ++n) {
    const StftParams p = config.bank_params(n);
    const ComplexSpectrogram spec = stft(y, p);
    const long steps = static_cast<long>(y.samples.size()) / p.hop;
    const int bins = p.n_fft / 2 + 1;
    const bool cart = config.stft_representation == StftRepresentation::cartesian;
    FeatureMap raw(cart ? 2 * bins : bins, steps);
    for (long m = 0; m < steps; ++m) {
      for (int k = 0; k < bins; ++k) {
        const std::complex<double>& v = spec.at(static_cast<std::size_t>(m), static_cast<std::size_t>(k));
        if (cart) {
          raw.at(k, m) = static_cast<float>(v.real());
          raw.at(bins + k, m) = static_cast<float>(v.imag());
        } else {
          raw.at(k, m) = static_cast<float>(std::abs(v));
        }
      }
    }
    const std::string prefix = "bank." + std::to_string(n) + ".";
    maps.push_back(conv1d(raw, weights.get(prefix + "proj.weight"),
                          &weights.get(prefix + "proj.bias")));
  }
  return maps;
}

// Strided-convolution encoder mirroring the decoder stack. Returns the block
// outputs deepest first so indices line up with encode_stft_bank.
inline std::vector<FeatureMap> encode_neural(const AudioBuffer& y,
                                             const ConditioningBundle& bundle,
                                             const ModelConfig& config,
                                             const WeightStore& weights) {
  if (y.samples.empty()) raise(ErrorKind::empty_input, "encoder input is empty");
  if (y.samples.size() % static_cast<std::size_t>(config.hop_total()) != 0)
    raise(ErrorKind::shape, "encoder input length must be a multiple of " +
                                std::to_string(config.hop_total()) + "; pad the signal first");
  const long frames = static_cast<long>(bundle.c.frames);
  if (frames * config.hop_total() != static_cast<long>(y.samples.size()))
    raise(ErrorKind::shape, "conditioning frames do not match encoder input length");
  const FeatureMap c_map = detail::mel_feature(bundle.c);

  FeatureMap x(1, static_cast<long>(y.samples.size()));
  std::copy(y.samples.begin(), y.samples.end(), x.values.begin());

  std::vector<FeatureMap> outs;
  outs.reserve(static_cast<std::size_t>(config.n_blocks));
  for (int n = 0; n < config.n_blocks; ++n) {
    const int stride = config.upsample_ratios[static_cast<std::size_t>(config.n_blocks - 1 - n)];
    const std::string prefix = "enc." + std::to_string(n) + ".";
    x = conv1d(x, weights.get(prefix + "down.weight"), &weights.get(prefix + "down.bias"), stride,
               1, stride / 2);
    const LvcKernels kernels = kernel_predictor(c_map, config, weights, prefix + "kp.");
    if (x.steps % frames != 0)
      raise(ErrorKind::shape, "encoder feature steps are not frame aligned");
    x = detail::run_sublayers(x, kernels, static_cast<int>(x.steps / frames), bundle, config,
                              weights, prefix);
    outs.push_back(x);
  }
  std::vector<FeatureMap> maps(outs.rbegin(), outs.rend());
  return maps;
}

// One decoder block: optional skip fusion at the input, transposed-conv
// upsampling, then the dilated LVC sub-layers.
inline FeatureMap decoder_block(const FeatureMap& x, const FeatureMap* skip,
                                const ConditioningBundle& bundle, const ModelConfig& config,
                                const WeightStore& weights, int block_index) {
  if (block_index < 0 || block_index >= config.n_blocks)
    raise(ErrorKind::range, "decoder block index out of range");
  const std::string prefix = "dec." + std::to_string(block_index) + ".";
  FeatureMap h = x;
  if (skip != nullptr) {
    if (!config.block_has_skip(block_index))
      raise(ErrorKind::shape, "block " + std::to_string(block_index) + " takes no skip input");
    if (skip->steps != x.steps)
      raise(ErrorKind::shape, "skip steps must equal block input steps");
    h = conv1d(detail::concat_channels(x, *skip), weights.get(prefix + "fuse.weight"),
               &weights.get(prefix + "fuse.bias"));
  } else if (config.block_has_skip(block_index)) {
    raise(ErrorKind::shape, "block " + std::to_string(block_index) + " expects a skip input");
  }
  const int ratio = config.upsample_ratios[static_cast<std::size_t>(block_index)];
  h = transposed_conv1d(h, weights.get(prefix + "up.weight"), &weights.get(prefix + "up.bias"),
                        ratio);
  const long frames = static_cast<long>(bundle.c.frames);
  if (frames == 0 || h.steps % frames != 0)
    raise(ErrorKind::shape, "decoder feature steps are not frame aligned");
  const FeatureMap c_map = detail::mel_feature(bundle.c);
  const LvcKernels kernels = kernel_predictor(c_map, config, weights, prefix + "kp.");
  return detail::run_sublayers(h, kernels, static_cast<int>(h.steps / frames), bundle, config,
                               weights, prefix);
}

// Full noise-estimation pass: encode y, run the decoder stack with skip
// joins at block inputs, project to one channel through snake/conv/tanh.
inline AudioBuffer generator_forward(const AudioBuffer& y, const ConditioningBundle& bundle,
                                     const ModelConfig& config, const WeightStore& weights) {
  if (weights.hash != config_hash(config))
    raise(ErrorKind::integrity, "weights were created for a different model config");
  if (y.samples.empty()) raise(ErrorKind::empty_input, "generator input is empty");
  check_finite(y.samples, "generator input");
  if (y.samples.size() % static_cast<std::size_t>(config.hop_total()) != 0)
    raise(ErrorKind::shape, "generator input length must be a multiple of the total hop");
  if (bundle.c.frames * static_cast<std::size_t>(config.hop_total()) != y.samples.size())
    raise(ErrorKind::shape, "conditioning frames do not match input length");

  const std::vector<FeatureMap> maps =
      config.encoder_kind == EncoderKind::neural ? encode_neural(y, bundle, config, weights)
                                                 : encode_stft_bank(y, config, weights);

  FeatureMap x = maps[0];
  for (int n = 0; n < config.n_blocks; ++n) {
    const FeatureMap* skip = config.block_has_skip(n) ? &maps[static_cast<std::size_t>(n)] : nullptr;
    x = decoder_block(x, skip, bundle, config, weights, n);
  }

  x = snake(x, weights.get("head.alpha"));
  x = conv1d(x, weights.get("head.conv.weight"), &weights.get("head.conv.bias"), 1, 1,
             (config.head_kernel - 1) / 2);
  if (x.channels != 1 || x.steps != static_cast<long>(y.samples.size()))
    raise(ErrorKind::shape, "head output shape mismatch");
  AudioBuffer out;
  out.sample_rate = y.sample_rate;
  out.samples.resize(y.samples.size());
  for (long t = 0; t < x.steps; ++t)
    out.samples[static_cast<std::size_t>(t)] = static_cast<float>(std::tanh(static_cast<double>(x.at(0, t))));
  return out;
}

}  // namespace fastfit
