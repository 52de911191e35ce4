// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fastfit/audio.hpp"
#include "fastfit/error.hpp"
#include "fastfit/generator.hpp"
#include "fastfit/griffin_lim.hpp"
#include "fastfit/mel.hpp"
#include "fastfit/model.hpp"
#include "fastfit/prior.hpp"
#include "fastfit/rng.hpp"

namespace fastfit {

constexpr double kPowerEps = 1e-8;
constexpr int kGriffinLimIters = 32;

enum class PriorMode { spectrogram, envelope, griffin_lim, identity };

inline const char* to_string(PriorMode m) {
  switch (m) {
    case PriorMode::spectrogram: return "spectrogram";
    case PriorMode::envelope: return "envelope";
    case PriorMode::griffin_lim: return "griffin-lim";
    case PriorMode::identity: return "identity";
  }
  return "unknown";
}

struct RefinementState {
  AudioBuffer y;
  int t = 0;
  double target_power = 0.0;
  double gain_exponent = 0.5;
};

struct VocodeOptions {
  PriorMode prior = PriorMode::spectrogram;
  double gain_exponent = 0.5;
  int griffin_lim_iters = kGriffinLimIters;
  int lifter_order = kDefaultLifterOrder;
};

struct VocodeStats {
  int forward_calls = 0;
  double prior_seconds = 0.0;
  double denoise_seconds = 0.0;
  std::vector<double> step_powers;  // post-step mean power per iteration
};

// Mean linear-domain power the output is steered to.
inline double target_power(const MelSpectrogram& c, const MelFilterbank& fb) {
  return mean_power(mel_to_linear_power(c, fb));
}

// One fixed-point iteration: subtract the estimated noise, then renormalize
// the estimate's analysis power toward the target.
inline void denoise_step(RefinementState& state, const ConditioningBundle& bundle,
                         const ModelConfig& config, const WeightStore& weights,
                         VocodeStats* stats = nullptr) {
  if (state.t < 1) raise(ErrorKind::range, "denoise_step called with t < 1");
  if (bundle.t != state.t)
    raise(ErrorKind::integrity, "conditioning bundle step does not match state");
  if (!(state.gain_exponent > 0.0))
    raise(ErrorKind::parameter, "gain exponent must be positive");
  if (!std::isfinite(state.target_power) || state.target_power < 0.0)
    raise(ErrorKind::numeric, "target power must be finite and nonnegative");

  const AudioBuffer noise = generator_forward(state.y, bundle, config, weights);
  if (stats) ++stats->forward_calls;
  for (float v : noise.samples)
    if (!std::isfinite(v))
      raise(ErrorKind::numeric,
            "non-finite generator output at step t=" + std::to_string(state.t));

  AudioBuffer clean = state.y;
  for (std::size_t i = 0; i < clean.samples.size(); ++i) clean.samples[i] -= noise.samples[i];

  const double p = mean_power(power_spectrogram(stft(clean, config.analysis_params())));
  const double gain = std::pow(state.target_power / (p + kPowerEps), state.gain_exponent);
  if (!std::isfinite(gain))
    raise(ErrorKind::numeric, "non-finite gain at step t=" + std::to_string(state.t));
  for (float& v : clean.samples) v = static_cast<float>(gain * v);

  state.y = std::move(clean);
  state.t -= 1;
  if (stats)
    stats->step_powers.push_back(
        mean_power(power_spectrogram(stft(state.y, config.analysis_params()))));
}

// Build the prior sample y_T for the requested mode.
inline AudioBuffer make_prior(const MelSpectrogram& c, const MelFilterbank& fb,
                              const StftParams& params, std::size_t length,
                              const VocodeOptions& options, std::uint64_t seed) {
  switch (options.prior) {
    case PriorMode::spectrogram:
      return sample_prior(build_filter_from_spectrogram(c, fb, params), params, length, seed,
                          c.sample_rate);
    case PriorMode::envelope:
      return sample_prior(build_filter_from_envelope(c, fb, params, options.lifter_order), params,
                          length, seed, c.sample_rate);
    case PriorMode::identity:
      return sample_prior(identity_filter(c.frames, params), params, length, seed, c.sample_rate);
    case PriorMode::griffin_lim: {
      RealSpectrogram mag = mel_to_linear_power(c, fb);
      for (double& v : mag.values) v = std::sqrt(v);
      return griffin_lim(mag, params, options.griffin_lim_iters, c.sample_rate);
    }
  }
  raise(ErrorKind::parameter, "unknown prior mode");
}

// Full synthesis: prior sample, then config.t_max denoise steps from t = T
// down to 1. Output length is frames * hop exactly.
inline AudioBuffer vocode(const MelSpectrogram& c, const ModelConfig& config,
                          const WeightStore& weights, std::uint64_t seed,
                          const VocodeOptions& options = {}, VocodeStats* stats = nullptr) {
  validate_config(config);
  if (c.frames == 0) raise(ErrorKind::empty_input, "mel input has no frames");
  if (c.n_mels != config.n_mels)
    raise(ErrorKind::config, "mel channel count " + std::to_string(c.n_mels) +
                                 " does not match model config " + std::to_string(config.n_mels));
  if (c.hop != config.analysis_hop)
    raise(ErrorKind::config, "mel hop does not match model analysis hop");
  if (!(options.gain_exponent > 0.0))
    raise(ErrorKind::parameter, "gain exponent must be positive");

  const MelFilterbank fb =
      mel_filterbank(c.sample_rate, config.analysis_n_fft, config.n_mels, c.fmin, c.fmax);

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  AudioBuffer y = make_prior(c, fb, config.analysis_params(),
                             c.frames * static_cast<std::size_t>(config.hop_total()), options, seed);
  const auto t1 = clock::now();

  RefinementState state;
  state.y = std::move(y);
  state.t = config.t_max;
  state.target_power = target_power(c, fb);
  state.gain_exponent = options.gain_exponent;

  NoiseStream z_stream(seed, 2);
  std::vector<float> z(static_cast<std::size_t>(config.z_dim));
  for (float& v : z) v = static_cast<float>(z_stream.gaussian());

  const auto t2 = clock::now();
  while (state.t >= 1) {
    const ConditioningBundle bundle = make_conditioning(c, z, state.t, config, weights);
    denoise_step(state, bundle, config, weights, stats);
  }
  const auto t3 = clock::now();

  if (stats) {
    stats->prior_seconds = std::chrono::duration<double>(t1 - t0).count();
    stats->denoise_seconds = std::chrono::duration<double>(t3 - t2).count();
  }
  return state.y;
}

}  // namespace fastfit
