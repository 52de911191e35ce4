// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fastfit/error.hpp"
#include "fastfit/stft.hpp"

namespace fastfit {

constexpr double kLogMelFloor = 1e-5;

// HTK-style mel scale.
inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

struct MelFilterbank {
  int sample_rate = 24000;
  int n_fft = 1024;
  int n_mels = 100;
  double fmin = 0.0;
  double fmax = 12000.0;
  int bins = 513;
  std::vector<double> weights;  // n_mels x bins, row-major
  std::vector<double> pinv;     // bins x n_mels, row-major

  double weight(int mel, int bin) const {
    return weights[static_cast<std::size_t>(mel) * bins + bin];
  }
  double pinv_at(int bin, int mel) const {
    return pinv[static_cast<std::size_t>(bin) * n_mels + mel];
  }
};

struct MelSpectrogram {
  std::size_t frames = 0;
  int n_mels = 100;
  std::vector<float> values;  // frames x n_mels, row-major
  double fmin = 0.0;
  double fmax = 12000.0;
  int sample_rate = 24000;
  int n_fft = 1024;
  int hop = 256;
  int win_length = 1024;

  float& at(std::size_t m, int b) { return values[m * static_cast<std::size_t>(n_mels) + b]; }
  float at(std::size_t m, int b) const { return values[m * static_cast<std::size_t>(n_mels) + b]; }
};

// Triangular mel filterbank (no area normalization) plus its Moore-Penrose
// pseudoinverse, computed once via SVD with singular values below
// 1e-8 * sigma_max treated as zero.
inline MelFilterbank mel_filterbank(int sample_rate, int n_fft, int n_mels, double fmin,
                                    double fmax) {
  if (sample_rate <= 0) raise(ErrorKind::parameter, "sample_rate must be positive");
  if (n_fft <= 0 || n_fft % 2 != 0) raise(ErrorKind::parameter, "n_fft must be positive and even");
  if (n_mels <= 0) raise(ErrorKind::parameter, "n_mels must be positive");
  const int bins = n_fft / 2 + 1;
  if (n_mels > bins)
    raise(ErrorKind::over_resolved, "n_mels " + std::to_string(n_mels) + " exceeds " +
                                        std::to_string(bins) + " FFT bins");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0))
    raise(ErrorKind::parameter, "needs 0 <= fmin < fmax <= sample_rate/2");

  MelFilterbank fb;
  fb.sample_rate = sample_rate;
  fb.n_fft = n_fft;
  fb.n_mels = n_mels;
  fb.fmin = fmin;
  fb.fmax = fmax;
  fb.bins = bins;
  fb.weights.assign(static_cast<std::size_t>(n_mels) * bins, 0.0);

  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[static_cast<std::size_t>(i)] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / static_cast<double>(n_mels + 1));

  for (int b = 0; b < n_mels; ++b) {
    const double lo = edges[static_cast<std::size_t>(b)];
    const double mid = edges[static_cast<std::size_t>(b) + 1];
    const double hi = edges[static_cast<std::size_t>(b) + 2];
    bool any = false;
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double up = (f - lo) / std::max(mid - lo, 1e-12);
      const double down = (hi - f) / std::max(hi - mid, 1e-12);
      const double w = std::max(0.0, std::min(up, down));
      if (w > 0.0) {
        fb.weights[static_cast<std::size_t>(b) * bins + k] = w;
        any = true;
      }
    }
    if (!any)
      raise(ErrorKind::parameter,
            "mel filter " + std::to_string(b) + " covers no FFT bin; reduce n_mels or raise n_fft");
  }

  Eigen::MatrixXd m(n_mels, bins);
  for (int b = 0; b < n_mels; ++b)
    for (int k = 0; k < bins; ++k) m(b, k) = fb.weights[static_cast<std::size_t>(b) * bins + k];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-8 * sv(0) : 0.0;
  Eigen::VectorXd inv_sv(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) inv_sv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
  Eigen::MatrixXd p = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
  fb.pinv.resize(static_cast<std::size_t>(bins) * n_mels);
  for (int k = 0; k < bins; ++k)
    for (int b = 0; b < n_mels; ++b) fb.pinv[static_cast<std::size_t>(k) * n_mels + b] = p(k, b);
  return fb;
}

// Natural-log mel spectrogram of magnitudes, floored at 1e-5 before the log.
inline MelSpectrogram log_mel(const AudioBuffer& audio, const StftParams& params,
                              const MelFilterbank& fb) {
  if (params.n_fft != fb.n_fft)
    raise(ErrorKind::shape, "filterbank n_fft does not match analysis params");
  const ComplexSpectrogram spec = stft(audio, params);
  MelSpectrogram mel;
  mel.frames = spec.frames;
  mel.n_mels = fb.n_mels;
  mel.fmin = fb.fmin;
  mel.fmax = fb.fmax;
  mel.sample_rate = audio.sample_rate;
  mel.n_fft = params.n_fft;
  mel.hop = params.hop;
  mel.win_length = params.win_length;
  mel.values.resize(spec.frames * static_cast<std::size_t>(fb.n_mels));
  for (std::size_t m = 0; m < spec.frames; ++m) {
    for (int b = 0; b < fb.n_mels; ++b) {
      double acc = 0.0;
      for (int k = 0; k < fb.bins; ++k) acc += fb.weight(b, k) * std::abs(spec.at(m, k));
      mel.at(m, b) = static_cast<float>(std::log(std::max(acc, kLogMelFloor)));
    }
  }
  return mel;
}

// Least-squares linear amplitude estimate from log-mel, negatives clamped to
// zero, then squared into a power spectrogram.
inline RealSpectrogram mel_to_linear_power(const MelSpectrogram& c, const MelFilterbank& fb) {
  if (c.n_mels != fb.n_mels) raise(ErrorKind::shape, "mel channel count does not match filterbank");
  if (c.frames == 0) raise(ErrorKind::empty_input, "mel spectrogram has no frames");
  for (float v : c.values)
    if (!std::isfinite(v)) raise(ErrorKind::numeric, "mel spectrogram contains a non-finite value");
  RealSpectrogram out;
  out.frames = c.frames;
  out.bins = static_cast<std::size_t>(fb.bins);
  out.values.resize(out.frames * out.bins);
  std::vector<double> lin(static_cast<std::size_t>(fb.n_mels));
  for (std::size_t m = 0; m < c.frames; ++m) {
    for (int b = 0; b < fb.n_mels; ++b) lin[static_cast<std::size_t>(b)] = std::exp(static_cast<double>(c.at(m, b)));
    for (int k = 0; k < fb.bins; ++k) {
      double amp = 0.0;
      for (int b = 0; b < fb.n_mels; ++b) amp += fb.pinv_at(k, b) * lin[static_cast<std::size_t>(b)];
      amp = std::max(amp, 0.0);
      out.at(m, static_cast<std::size_t>(k)) = amp * amp;
    }
  }
  return out;
}

}  // namespace fastfit
