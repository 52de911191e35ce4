// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "fastfit/audio.hpp"
#include "fastfit/error.hpp"
#include "fastfit/fft.hpp"

namespace fastfit {

// Periodic Hann, the only analysis window used by the engine.
inline std::vector<double> hann_periodic(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n)
    w[static_cast<std::size_t>(n)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / static_cast<double>(length));
  return w;
}

struct StftParams {
  int n_fft = 1024;
  int hop = 256;
  int win_length = 1024;
  bool center = true;
  std::vector<double> window;  // per-sample analysis amplitudes, length win_length
};

inline StftParams make_stft_params(int n_fft, int hop, int win_length, bool center = true) {
  if (n_fft <= 0 || !is_power_of_two(static_cast<std::size_t>(n_fft)))
    raise(ErrorKind::parameter, "n_fft must be a positive power of two, got " + std::to_string(n_fft));
  if (win_length <= 0 || win_length > n_fft)
    raise(ErrorKind::parameter, "win_length must satisfy 0 < win_length <= n_fft");
  if (hop <= 0 || hop > win_length)
    raise(ErrorKind::parameter, "hop must satisfy 0 < hop <= win_length");
  StftParams p;
  p.n_fft = n_fft;
  p.hop = hop;
  p.win_length = win_length;
  p.center = center;
  p.window = hann_periodic(win_length);
  return p;
}

inline void validate_params(const StftParams& p) {
  if (p.n_fft <= 0 || !is_power_of_two(static_cast<std::size_t>(p.n_fft)))
    raise(ErrorKind::parameter, "n_fft must be a positive power of two");
  if (p.win_length <= 0 || p.win_length > p.n_fft)
    raise(ErrorKind::parameter, "win_length must satisfy 0 < win_length <= n_fft");
  if (p.hop <= 0 || p.hop > p.win_length)
    raise(ErrorKind::parameter, "hop must satisfy 0 < hop <= win_length");
  if (p.window.size() != static_cast<std::size_t>(p.win_length))
    raise(ErrorKind::parameter, "window length does not match win_length");
}

struct ComplexSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;  // n_fft/2 + 1
  std::vector<std::complex<double>> values;  // row-major, frames x bins
  StftParams params;

  std::complex<double>& at(std::size_t m, std::size_t k) { return values[m * bins + k]; }
  const std::complex<double>& at(std::size_t m, std::size_t k) const { return values[m * bins + k]; }
};

// frames x bins real grid; holds magnitudes or powers depending on context.
struct RealSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> values;

  double& at(std::size_t m, std::size_t k) { return values[m * bins + k]; }
  double at(std::size_t m, std::size_t k) const { return values[m * bins + k]; }
};

namespace detail {

// Mirror index into [0, len) without repeating the edge sample
// (reflect padding, period 2*len - 2).
inline std::size_t reflect_index(long i, long len) {
  if (len == 1) return 0;
  const long period = 2 * (len - 1);
  long m = i % period;
  if (m < 0) m += period;
  if (m >= len) m = period - m;
  return static_cast<std::size_t>(m);
}

// Analysis window zero-padded to n_fft with the taps centered.
inline std::vector<double> padded_window(const StftParams& p) {
  std::vector<double> w(static_cast<std::size_t>(p.n_fft), 0.0);
  const int off = (p.n_fft - p.win_length) / 2;
  for (int n = 0; n < p.win_length; ++n)
    w[static_cast<std::size_t>(off + n)] = p.window[static_cast<std::size_t>(n)];
  return w;
}

// DFT of each windowed frame of an already padded signal. Frame m covers
// padded[m*hop, m*hop + n_fft).
inline ComplexSpectrogram frames_dft(const std::vector<double>& padded, const StftParams& p) {
  const std::size_t n = static_cast<std::size_t>(p.n_fft);
  if (padded.size() < n)
    raise(ErrorKind::shape, "signal shorter than one analysis frame");
  const std::size_t frames = (padded.size() - n) / static_cast<std::size_t>(p.hop) + 1;
  ComplexSpectrogram spec;
  spec.frames = frames;
  spec.bins = n / 2 + 1;
  spec.params = p;
  spec.values.resize(frames * spec.bins);
  const std::vector<double> w = padded_window(p);
  const Fft fft(n);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t m = 0; m < frames; ++m) {
    const std::size_t start = m * static_cast<std::size_t>(p.hop);
    for (std::size_t i = 0; i < n; ++i) buf[i] = {w[i] * padded[start + i], 0.0};
    fft.forward(buf.data());
    for (std::size_t k = 0; k < spec.bins; ++k) spec.at(m, k) = buf[k];
  }
  return spec;
}

// Weighted overlap-add with squared-window normalization: the least-squares
// signal estimate for the given frame spectra. Positions never touched by a
// window stay zero; `norm_out` reports the accumulated squared window.
inline std::vector<double> ola_synthesis(const ComplexSpectrogram& spec,
                                         std::vector<double>* norm_out = nullptr) {
  const StftParams& p = spec.params;
  const std::size_t n = static_cast<std::size_t>(p.n_fft);
  const std::size_t padded_len =
      (spec.frames - 1) * static_cast<std::size_t>(p.hop) + n;
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> norm(padded_len, 0.0);
  const std::vector<double> w = padded_window(p);
  const Fft fft(n);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t m = 0; m < spec.frames; ++m) {
    buf[0] = {spec.at(m, 0).real(), 0.0};
    for (std::size_t k = 1; k + 1 < spec.bins; ++k) {
      buf[k] = spec.at(m, k);
      buf[n - k] = std::conj(spec.at(m, k));
    }
    buf[n / 2] = {spec.at(m, spec.bins - 1).real(), 0.0};
    fft.inverse(buf.data());
    const std::size_t start = m * static_cast<std::size_t>(p.hop);
    for (std::size_t i = 0; i < n; ++i) {
      acc[start + i] += w[i] * buf[i].real();
      norm[start + i] += w[i] * w[i];
    }
  }
  constexpr double kTiny = 1e-10;
  for (std::size_t i = 0; i < padded_len; ++i)
    acc[i] = norm[i] < kTiny ? 0.0 : acc[i] / norm[i];
  if (norm_out) *norm_out = std::move(norm);
  return acc;
}

}  // namespace detail

inline ComplexSpectrogram stft(const AudioBuffer& audio, const StftParams& params) {
  validate_params(params);
  if (audio.samples.empty()) raise(ErrorKind::empty_input, "stft input is empty");
  check_finite(audio.samples, "stft input");
  const long len = static_cast<long>(audio.samples.size());
  const long pad = params.center ? params.n_fft / 2 : 0;
  if (!params.center && len < params.n_fft)
    raise(ErrorKind::shape, "input shorter than n_fft with center disabled");
  std::vector<double> padded(static_cast<std::size_t>(len + 2 * pad));
  for (long i = 0; i < len + 2 * pad; ++i)
    padded[static_cast<std::size_t>(i)] =
        audio.samples[detail::reflect_index(i - pad, len)];
  return detail::frames_dft(padded, params);
}

// Inverse STFT. Output length is frames*hop; with center analysis the first
// n_fft/2 synthesized samples correspond to padding and are trimmed.
inline AudioBuffer istft(const ComplexSpectrogram& spec, int sample_rate = 24000) {
  validate_params(spec.params);
  if (spec.frames == 0) raise(ErrorKind::empty_input, "istft input has no frames");
  if (spec.bins != static_cast<std::size_t>(spec.params.n_fft / 2 + 1))
    raise(ErrorKind::shape, "spectrogram bins do not match n_fft");
  for (const auto& v : spec.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      raise(ErrorKind::numeric, "istft input contains a non-finite value");
  std::vector<double> norm;
  const std::vector<double> full = detail::ola_synthesis(spec, &norm);
  const std::size_t out_len = spec.frames * static_cast<std::size_t>(spec.params.hop);
  const std::size_t start = spec.params.center ? static_cast<std::size_t>(spec.params.n_fft / 2) : 0;
  constexpr double kTiny = 1e-10;
  const std::size_t interior_lo = static_cast<std::size_t>(spec.params.n_fft / 2);
  const std::size_t interior_hi =
      full.size() - std::min(full.size(), static_cast<std::size_t>(spec.params.n_fft / 2));
  for (std::size_t i = std::max(start, interior_lo);
       i < std::min(start + out_len, interior_hi); ++i) {
    if (norm[i] < kTiny)
      raise(ErrorKind::cola_violation,
            "window/hop combination leaves interior samples uncovered (sum of squared windows < 1e-10)");
  }
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(out_len, 0.0f);
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::size_t j = start + i;
    out.samples[i] = j < full.size() ? static_cast<float>(full[j]) : 0.0f;
  }
  return out;
}

inline RealSpectrogram magnitude_spectrogram(const ComplexSpectrogram& spec) {
  RealSpectrogram m;
  m.frames = spec.frames;
  m.bins = spec.bins;
  m.values.resize(spec.values.size());
  for (std::size_t i = 0; i < spec.values.size(); ++i) m.values[i] = std::abs(spec.values[i]);
  return m;
}

inline RealSpectrogram power_spectrogram(const ComplexSpectrogram& spec) {
  RealSpectrogram m;
  m.frames = spec.frames;
  m.bins = spec.bins;
  m.values.resize(spec.values.size());
  for (std::size_t i = 0; i < spec.values.size(); ++i) m.values[i] = std::norm(spec.values[i]);
  return m;
}

inline double mean_power(const RealSpectrogram& power) {
  if (power.values.empty()) raise(ErrorKind::empty_input, "mean_power of an empty spectrogram");
  double acc = 0.0;
  for (double v : power.values) acc += v;
  return acc / static_cast<double>(power.values.size());
}

}  // namespace fastfit
