// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Shared helpers for the test suites: random buffers, norms, and slow
// reference transforms written independently of the library internals.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "fastfit/audio.hpp"
#include "fastfit/rng.hpp"
#include "fastfit/stft.hpp"

namespace testutil {

constexpr double kPi = 3.14159265358979323846;

inline fastfit::AudioBuffer random_audio(fastfit::NoiseStream& rng, std::size_t n,
                                         double scale = 0.3) {
  fastfit::AudioBuffer a;
  a.sample_rate = 24000;
  a.samples.resize(n);
  for (float& v : a.samples) v = static_cast<float>(scale * rng.gaussian());
  return a;
}

inline fastfit::AudioBuffer sine(double freq, std::size_t n, double amp = 0.5,
                                 int sample_rate = 24000) {
  fastfit::AudioBuffer a;
  a.sample_rate = sample_rate;
  a.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    a.samples[i] =
        static_cast<float>(amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / sample_rate));
  return a;
}

template <typename A, typename B>
inline double rel_l2(const std::vector<A>& a, const std::vector<B>& b, std::size_t n) {
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    err += d * d;
    ref += static_cast<double>(a[i]) * a[i];
  }
  return ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err);
}

inline double max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]));
  return worst;
}

// Slow reference STFT: explicit reflect padding, centered Hann window, and a
// direct O(n^2) DFT per frame. Written from the transform definition, not
// from the library code.
struct SlowSpec {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> values;
  std::complex<double> at(std::size_t m, std::size_t k) const { return values[m * bins + k]; }
};

inline std::vector<double> slow_padded(const std::vector<float>& x, int n_fft, bool center) {
  std::vector<double> s(x.begin(), x.end());
  if (!center) return s;
  const long L = static_cast<long>(x.size());
  const int p = n_fft / 2;
  std::vector<double> out;
  out.reserve(x.size() + 2 * static_cast<std::size_t>(p));
  for (long i = -p; i < L + p; ++i) {
    long j = i;
    while (j < 0 || j >= L) {
      if (j < 0) j = -j;
      if (j >= L) j = 2 * (L - 1) - j;
    }
    out.push_back(s[static_cast<std::size_t>(j)]);
  }
  return out;
}

inline SlowSpec slow_stft(const std::vector<float>& x, int n_fft, int hop, int win, bool center) {
  const std::vector<double> padded = slow_padded(x, n_fft, center);
  SlowSpec spec;
  spec.bins = static_cast<std::size_t>(n_fft / 2 + 1);
  if (padded.size() < static_cast<std::size_t>(n_fft)) return spec;
  spec.frames = (padded.size() - static_cast<std::size_t>(n_fft)) / static_cast<std::size_t>(hop) + 1;
  spec.values.assign(spec.frames * spec.bins, {0.0, 0.0});

  std::vector<double> w(static_cast<std::size_t>(n_fft), 0.0);
  const int off = (n_fft - win) / 2;
  for (int n = 0; n < win; ++n)
    w[static_cast<std::size_t>(off + n)] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / win);

  for (std::size_t m = 0; m < spec.frames; ++m) {
    for (std::size_t k = 0; k < spec.bins; ++k) {
      std::complex<double> acc{0.0, 0.0};
      for (int n = 0; n < n_fft; ++n) {
        const double a = -2.0 * kPi * static_cast<double>(k) * n / n_fft;
        const double v = w[static_cast<std::size_t>(n)] *
                         padded[m * static_cast<std::size_t>(hop) + static_cast<std::size_t>(n)];
        acc += std::complex<double>{v * std::cos(a), v * std::sin(a)};
      }
      spec.values[m * spec.bins + k] = acc;
    }
  }
  return spec;
}

}  // namespace testutil
