// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fastfit/audio.hpp"
#include "fastfit/error.hpp"
#include "fastfit/mel.hpp"
#include "fastfit/min_phase.hpp"
#include "fastfit/rng.hpp"
#include "fastfit/stft.hpp"

namespace fastfit {

enum class PriorSource { spectrogram, spectral_envelope, identity };

constexpr int kDefaultLifterOrder = 24;

// Per-frame minimum-phase shaping filter applied to white noise in the STFT
// domain. Rows align 1:1 with the mel frames the filter was built from.
struct PriorFilter {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> values;  // frames x bins
  StftParams params;
  PriorSource source = PriorSource::identity;

  std::complex<double>& at(std::size_t m, std::size_t k) { return values[m * bins + k]; }
  const std::complex<double>& at(std::size_t m, std::size_t k) const { return values[m * bins + k]; }
};

inline PriorFilter identity_filter(std::size_t frames, const StftParams& params) {
  validate_params(params);
  if (frames == 0) raise(ErrorKind::empty_input, "identity filter needs at least one frame");
  PriorFilter f;
  f.frames = frames;
  f.bins = static_cast<std::size_t>(params.n_fft / 2 + 1);
  f.params = params;
  f.source = PriorSource::identity;
  f.values.assign(frames * f.bins, {1.0, 0.0});
  return f;
}

// Filter magnitude taken directly from the pseudoinverse amplitude estimate,
// floored at 1e-8, phase from the homomorphic minimum-phase construction.
inline PriorFilter build_filter_from_spectrogram(const MelSpectrogram& c, const MelFilterbank& fb,
                                                 const StftParams& params) {
  validate_params(params);
  const RealSpectrogram power = mel_to_linear_power(c, fb);
  if (power.bins != static_cast<std::size_t>(params.n_fft / 2 + 1))
    raise(ErrorKind::shape, "filterbank bins do not match analysis params");
  PriorFilter f;
  f.frames = power.frames;
  f.bins = power.bins;
  f.params = params;
  f.source = PriorSource::spectrogram;
  f.values.resize(power.values.size());
  std::vector<double> mag(power.bins);
  for (std::size_t m = 0; m < power.frames; ++m) {
    for (std::size_t k = 0; k < power.bins; ++k)
      mag[k] = std::max(std::sqrt(power.at(m, k)), kFilterMagFloor);
    const auto row = minimum_phase_filter(mag, params.n_fft);
    for (std::size_t k = 0; k < power.bins; ++k) f.at(m, k) = row[k];
  }
  return f;
}

// As above, but the per-frame log magnitude is low-pass liftered to
// `lifter_order` cepstral coefficients before the minimum-phase step.
inline PriorFilter build_filter_from_envelope(const MelSpectrogram& c, const MelFilterbank& fb,
                                              const StftParams& params,
                                              int lifter_order = kDefaultLifterOrder) {
  validate_params(params);
  const std::size_t bins = static_cast<std::size_t>(params.n_fft / 2 + 1);
  if (lifter_order < 0 || static_cast<std::size_t>(lifter_order) >= bins)
    raise(ErrorKind::parameter, "lifter order must lie in [0, bins)");
  const RealSpectrogram power = mel_to_linear_power(c, fb);
  if (power.bins != bins) raise(ErrorKind::shape, "filterbank bins do not match analysis params");
  PriorFilter f;
  f.frames = power.frames;
  f.bins = bins;
  f.params = params;
  f.source = PriorSource::spectral_envelope;
  f.values.resize(power.values.size());
  std::vector<double> log_mag(bins);
  std::vector<double> mag(bins);
  for (std::size_t m = 0; m < power.frames; ++m) {
    for (std::size_t k = 0; k < bins; ++k)
      log_mag[k] = std::log(std::max(std::sqrt(power.at(m, k)), kFilterMagFloor));
    const std::vector<double> env = cepstral_envelope(log_mag, params.n_fft, lifter_order);
    for (std::size_t k = 0; k < bins; ++k) mag[k] = std::max(std::exp(env[k]), kFilterMagFloor);
    const auto row = minimum_phase_filter(mag, params.n_fft);
    for (std::size_t k = 0; k < bins; ++k) f.at(m, k) = row[k];
  }
  return f;
}

// Shaped Gaussian prior: analyze seeded white noise, multiply each analysis
// frame by its filter row, resynthesize. A length-L signal has one more
// centered analysis frame than L/hop; that trailing frame reuses the last
// filter row.
inline AudioBuffer sample_prior(const PriorFilter& filter, const StftParams& params,
                                std::size_t length, std::uint64_t seed,
                                int sample_rate = 24000) {
  validate_params(params);
  if (filter.frames == 0) raise(ErrorKind::empty_input, "prior filter has no frames");
  if (filter.bins != static_cast<std::size_t>(params.n_fft / 2 + 1))
    raise(ErrorKind::shape, "filter bins do not match analysis params");
  if (length != filter.frames * static_cast<std::size_t>(params.hop))
    raise(ErrorKind::shape, "length " + std::to_string(length) + " does not equal frames*hop = " +
                                std::to_string(filter.frames * static_cast<std::size_t>(params.hop)));
  NoiseStream stream(seed, 0);
  AudioBuffer eps;
  eps.sample_rate = sample_rate;
  eps.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i)
    eps.samples[i] = static_cast<float>(stream.gaussian());
  ComplexSpectrogram spec = stft(eps, params);
  for (std::size_t m = 0; m < spec.frames; ++m) {
    const std::size_t row = std::min(m, filter.frames - 1);
    for (std::size_t k = 0; k < spec.bins; ++k) spec.at(m, k) *= filter.at(row, k);
  }
  AudioBuffer out = istft(spec, sample_rate);
  out.samples.resize(length);
  return out;
}

}  // namespace fastfit
