// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Minimal end-to-end use of the library: make a test tone, take its log-mel,
// run the iterative vocoder with freshly drawn weights, and score the result.

#include <cmath>
#include <cstdio>

#include "fastfit/fastfit.hpp"

int main() {
  using namespace fastfit;

  AudioBuffer tone;
  tone.sample_rate = 24000;
  tone.samples.resize(24000 * 2);
  for (std::size_t n = 0; n < tone.samples.size(); ++n)
    tone.samples[n] = static_cast<float>(
        0.4 * std::sin(2.0 * 3.14159265358979 * 220.0 * static_cast<double>(n) / 24000.0));

  ModelConfig config;
  const MelFilterbank fb = mel_filterbank(24000, config.analysis_n_fft, config.n_mels, 0.0, 12000.0);
  MelSpectrogram mel = log_mel(tone, config.analysis_params(), fb);
  // The vocoder wants frames * hop == sample count; drop the trailing
  // centered frame of the analysis.
  mel.frames -= 1;
  mel.values.resize(mel.frames * static_cast<std::size_t>(mel.n_mels));

  const WeightStore weights = init_weights(config, 7);
  VocodeStats stats;
  const AudioBuffer out = vocode(mel, config, weights, 7, {}, &stats);

  AudioBuffer ref = tone;
  ref.samples.resize(out.samples.size());
  std::printf("frames        %zu\n", mel.frames);
  std::printf("samples       %zu\n", out.samples.size());
  std::printf("forward calls %d\n", stats.forward_calls);
  std::printf("mr-stft       %.4f (untrained weights, so this is large)\n", mr_stft(ref, out));
  return 0;
}
