// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "fastfit/stft.hpp"
#include "helpers.hpp"

using namespace fastfit;
using namespace testutil;

TEST_CASE("stft matches the direct DFT reference") {
  NoiseStream rng(11, 0);
  struct Shape {
    int n_fft, hop, win;
    std::size_t len;
  };
  const Shape shapes[] = {
      {1024, 256, 1024, 4096}, {512, 128, 512, 3000}, {256, 64, 200, 1025}, {1024, 256, 768, 5000}};
  for (const Shape& s : shapes) {
    const AudioBuffer x = random_audio(rng, s.len);
    const ComplexSpectrogram got = stft(x, make_stft_params(s.n_fft, s.hop, s.win));
    const SlowSpec want = slow_stft(x.samples, s.n_fft, s.hop, s.win, true);
    REQUIRE(got.frames == want.frames);
    REQUIRE(got.bins == want.bins);
    double worst = 0.0;
    for (std::size_t m = 0; m < got.frames; ++m)
      for (std::size_t k = 0; k < got.bins; ++k)
        worst = std::max(worst, std::abs(got.at(m, k) - want.at(m, k)));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("impulse at the window peak gives unit magnitude at every bin") {
  AudioBuffer x;
  x.samples.assign(1024, 0.0f);
  x.samples[512] = 1.0f;
  const ComplexSpectrogram spec = stft(x, make_stft_params(1024, 256, 1024, false));
  REQUIRE(spec.frames == 1);
  for (std::size_t k = 0; k < spec.bins; ++k)
    CHECK(std::abs(std::abs(spec.at(0, k)) - 1.0) < 1e-9);
}

TEST_CASE("bin-centered sine peaks at its bin") {
  const AudioBuffer x = sine(937.5, 8192);
  const ComplexSpectrogram spec = stft(x, make_stft_params(1024, 256, 1024));
  // Edge frames see the reflected padding, which breaks the pure tone; only
  // frames whose window support lies inside the signal are bin-exact.
  for (std::size_t m = 2; m + 2 < spec.frames; ++m) {
    std::size_t argmax = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < spec.bins; ++k) {
      const double a = std::abs(spec.at(m, k));
      if (a > best) {
        best = a;
        argmax = k;
      }
    }
    REQUIRE(argmax == 40);
  }
}

TEST_CASE("istft undoes stft on random buffers") {
  NoiseStream rng(12, 0);
  const StftParams p = make_stft_params(1024, 256, 1024);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t len = 6000 + static_cast<std::size_t>(rng.uniform() * 42000.0);
    const AudioBuffer x = random_audio(rng, len);
    const AudioBuffer back = istft(stft(x, p));
    REQUIRE(back.samples.size() == (len / 256 + 1) * 256);
    CHECK(rel_l2(x.samples, back.samples, len) < 1e-6);
  }
}

TEST_CASE("all-zero spectrogram synthesizes silence") {
  AudioBuffer x;
  x.samples.assign(4096, 0.0f);
  x.samples[0] = 1.0f;  // nonzero so stft accepts it
  ComplexSpectrogram spec = stft(x, make_stft_params(512, 128, 512));
  for (auto& v : spec.values) v = {0.0, 0.0};
  const AudioBuffer out = istft(spec);
  for (float v : out.samples) REQUIRE(v == 0.0f);
}

TEST_CASE("single-bin constant spectrogram synthesizes the closed-form cosine") {
  // Bin 40 at hop 256 with n_fft 1024 advances phase by an integer number of
  // cycles per hop, so every frame holds the same absolute-time cosine and
  // overlap-add must reproduce it exactly in the interior.
  const StftParams p = make_stft_params(1024, 256, 1024, false);
  const std::size_t frames = 20, bins = 513;
  const std::complex<double> v{3.0, 4.0};
  ComplexSpectrogram spec;
  spec.frames = frames;
  spec.bins = bins;
  spec.params = p;
  spec.values.assign(frames * bins, {0.0, 0.0});
  for (std::size_t m = 0; m < frames; ++m) spec.at(m, 40) = v;

  const AudioBuffer out = istft(spec);
  REQUIRE(out.samples.size() == frames * 256);
  // Least-squares synthesis divides the plain overlap-add (window sum 2 at
  // 75% overlap) by the squared-window sum 3/2, hence the 4/3 gain for this
  // analysis-inconsistent input.
  const double amp = 2.0 * std::abs(v) / 1024.0 * (4.0 / 3.0);
  const double phase = std::arg(v);
  double worst = 0.0;
  for (std::size_t n = 1024; n + 1024 < out.samples.size(); ++n) {
    const double want = amp * std::cos(2.0 * kPi * 40.0 * static_cast<double>(n) / 1024.0 + phase);
    worst = std::max(worst, std::abs(out.samples[n] - want));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("stft is linear") {
  NoiseStream rng(13, 0);
  const AudioBuffer x = random_audio(rng, 4096);
  const AudioBuffer y = random_audio(rng, 4096);
  const double a = 1.7, b = -0.4;
  AudioBuffer mix;
  mix.samples.resize(4096);
  for (std::size_t i = 0; i < 4096; ++i)
    mix.samples[i] = static_cast<float>(a * x.samples[i] + b * y.samples[i]);

  const StftParams p = make_stft_params(512, 128, 512);
  // The combination is formed on double copies so float rounding of the
  // input mix does not dominate the comparison.
  std::vector<double> xd(x.samples.begin(), x.samples.end());
  const ComplexSpectrogram sx = stft(x, p), sy = stft(y, p), sm = stft(mix, p);
  double worst = 0.0;
  for (std::size_t i = 0; i < sm.values.size(); ++i)
    worst = std::max(worst, std::abs(sm.values[i] - (a * sx.values[i] + b * sy.values[i])));
  CHECK(worst < 1e-5);  // limited by float storage of the mixed signal
}

TEST_CASE("stft energy matches the windowed Parseval oracle") {
  NoiseStream rng(14, 0);
  const AudioBuffer x = random_audio(rng, 4096);
  const int n_fft = 512, hop = 128;
  const ComplexSpectrogram spec = stft(x, make_stft_params(n_fft, hop, n_fft));

  // Two-sided spectral energy from the one-sided storage.
  double spectral = 0.0;
  for (std::size_t m = 0; m < spec.frames; ++m)
    for (std::size_t k = 0; k < spec.bins; ++k) {
      const double e = std::norm(spec.at(m, k));
      const bool edge = k == 0 || k == spec.bins - 1;
      spectral += edge ? e : 2.0 * e;
    }

  const std::vector<double> padded = slow_padded(x.samples, n_fft, true);
  std::vector<double> w(n_fft);
  for (int n = 0; n < n_fft; ++n) w[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / n_fft);
  double windowed = 0.0;
  for (std::size_t m = 0; m < spec.frames; ++m)
    for (int n = 0; n < n_fft; ++n) {
      const double v = w[n] * padded[m * hop + static_cast<std::size_t>(n)];
      windowed += v * v;
    }
  CHECK(std::abs(spectral - n_fft * windowed) / (n_fft * windowed) < 1e-6);
}

TEST_CASE("parameter and input validation") {
  CHECK_THROWS_MATCHES(make_stft_params(1000, 256, 1000), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::parameter; }));
  CHECK_THROWS_MATCHES(make_stft_params(1024, 0, 1024), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::parameter; }));
  CHECK_THROWS_MATCHES(make_stft_params(1024, 256, 2048), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::parameter; }));
  CHECK_THROWS_MATCHES(make_stft_params(1024, 512, 256), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::parameter; }));

  AudioBuffer empty;
  CHECK_THROWS_MATCHES(stft(empty, make_stft_params(512, 128, 512)), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::empty_input; }));

  AudioBuffer nan_buf;
  nan_buf.samples.assign(2048, 0.1f);
  nan_buf.samples[77] = std::nanf("");
  CHECK_THROWS_MATCHES(stft(nan_buf, make_stft_params(512, 128, 512)), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::numeric; }));

  AudioBuffer short_buf;
  short_buf.samples.assign(100, 0.1f);
  CHECK_THROWS_MATCHES(stft(short_buf, make_stft_params(512, 128, 512, false)), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::shape; }));
}

TEST_CASE("non-overlapping Hann frames violate COLA on synthesis") {
  NoiseStream rng(15, 0);
  const AudioBuffer x = random_audio(rng, 8192);
  const ComplexSpectrogram spec = stft(x, make_stft_params(1024, 1024, 1024));
  CHECK_THROWS_MATCHES(istft(spec), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::cola_violation; }));
}

TEST_CASE("mean power basics") {
  RealSpectrogram s;
  s.frames = 3;
  s.bins = 4;
  s.values.assign(12, 2.0);
  CHECK(mean_power(s) == 2.0);

  RealSpectrogram t;
  t.frames = 1;
  t.bins = 4;
  t.values = {0.0, 1.0, 2.0, 3.0};
  CHECK(mean_power(t) == 1.5);

  NoiseStream rng(16, 0);
  const AudioBuffer x = random_audio(rng, 4096);
  const ComplexSpectrogram spec = stft(x, make_stft_params(512, 128, 512));
  double acc = 0.0;
  for (const auto& v : spec.values) acc += std::norm(v);
  const double want = acc / static_cast<double>(spec.values.size());
  CHECK(std::abs(mean_power(power_spectrogram(spec)) - want) <= 1e-9 * want);

  RealSpectrogram empty;
  CHECK_THROWS_MATCHES(mean_power(empty), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::empty_input; }));
}
