// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "fastfit/audio.hpp"
#include "fastfit/error.hpp"
#include "fastfit/stft.hpp"

namespace fastfit {

// Alternating projections between the signal-consistent set and the target
// magnitude, starting from zero phase. Iterating on the raw frame grid keeps
// the analysis/synthesis pair an exact least-squares inverse, so the
// magnitude distance is non-increasing. iters == 0 returns the plain
// zero-phase inverse transform.
inline AudioBuffer griffin_lim(const RealSpectrogram& magnitude, const StftParams& params,
                               int iters, int sample_rate = 24000) {
  validate_params(params);
  if (iters < 0) raise(ErrorKind::parameter, "iteration count must be nonnegative");
  if (magnitude.frames == 0) raise(ErrorKind::empty_input, "magnitude has no frames");
  if (magnitude.bins != static_cast<std::size_t>(params.n_fft / 2 + 1))
    raise(ErrorKind::shape, "magnitude bins do not match n_fft");
  for (double v : magnitude.values)
    if (!(v >= 0.0) || !std::isfinite(v))
      raise(ErrorKind::numeric, "magnitude must be finite and nonnegative");

  ComplexSpectrogram spec;
  spec.frames = magnitude.frames;
  spec.bins = magnitude.bins;
  spec.params = params;
  spec.params.center = false;  // frame-grid iteration, padding handled at the end
  spec.values.resize(magnitude.values.size());
  for (std::size_t i = 0; i < magnitude.values.size(); ++i)
    spec.values[i] = {magnitude.values[i], 0.0};

  for (int it = 0; it < iters; ++it) {
    const std::vector<double> x = detail::ola_synthesis(spec);
    const ComplexSpectrogram re = detail::frames_dft(x, spec.params);
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      const std::complex<double> v = re.values[i];
      const double a = std::abs(v);
      spec.values[i] = a > 0.0 ? v * (magnitude.values[i] / a)
                               : std::complex<double>{magnitude.values[i], 0.0};
    }
  }

  const std::vector<double> full = detail::ola_synthesis(spec);
  const std::size_t out_len = magnitude.frames * static_cast<std::size_t>(params.hop);
  const std::size_t start = params.center ? static_cast<std::size_t>(params.n_fft / 2) : 0;
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(out_len, 0.0f);
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::size_t j = start + i;
    out.samples[i] = j < full.size() ? static_cast<float>(full[j]) : 0.0f;
  }
  return out;
}

}  // namespace fastfit
