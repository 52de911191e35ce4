// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "fastfit/mel.hpp"
#include "fastfit/min_phase.hpp"
#include "fastfit/prior.hpp"
#include "fastfit/rng.hpp"
#include "fastfit/stft.hpp"
#include "helpers.hpp"

using namespace fastfit;
using namespace testutil;

namespace {

const auto kind_is = [](ErrorKind want) {
  return Catch::Matchers::Predicate<Error>([want](const Error& e) { return e.kind() == want; },
                                           "error kind matches");
};

// Mel spectrogram whose amplitude estimate is exactly recoverable: the target
// linear amplitude a = M^T z lies in the filterbank row space.
struct RowSpaceMel {
  MelSpectrogram c;
  std::vector<double> amp;  // 513 bins
};

RowSpaceMel row_space_mel(const MelFilterbank& fb, std::size_t frames, std::uint64_t seed) {
  NoiseStream rng(seed, 0);
  std::vector<double> z(100);
  for (double& v : z) v = 0.5 + rng.uniform();
  RowSpaceMel out;
  out.amp.assign(513, 0.0);
  for (std::size_t k = 0; k < 513; ++k)
    for (std::size_t b = 0; b < 100; ++b) out.amp[k] += fb.weights[b * 513 + k] * z[b];
  out.c.frames = frames;
  out.c.n_mels = 100;
  out.c.values.resize(frames * 100);
  for (std::size_t m = 0; m < frames; ++m)
    for (int b = 0; b < 100; ++b) {
      double mel_amp = 0.0;
      for (std::size_t k = 0; k < 513; ++k) mel_amp += fb.weight(b, static_cast<int>(k)) * out.amp[k];
      out.c.at(m, b) = static_cast<float>(std::log(mel_amp));
    }
  return out;
}

double band_energy(const AudioBuffer& x, const StftParams& p, double f_lo, double f_hi) {
  const ComplexSpectrogram spec = stft(x, p);
  const double bin_w = 24000.0 / p.n_fft;
  double acc = 0.0;
  for (std::size_t m = 0; m < spec.frames; ++m)
    for (std::size_t k = 0; k < spec.bins; ++k) {
      const double f = k * bin_w;
      if (f >= f_lo && f < f_hi) acc += std::norm(spec.at(m, k));
    }
  return acc;
}

}  // namespace

TEST_CASE("spectrogram filter rows carry the pseudoinverse amplitude") {
  const MelFilterbank fb = mel_filterbank(24000, 1024, 100, 0.0, 12000.0);
  const StftParams p = make_stft_params(1024, 256, 1024);
  const RowSpaceMel rs = row_space_mel(fb, 4, 19);
  const PriorFilter f = build_filter_from_spectrogram(rs.c, fb, p);
  REQUIRE(f.frames == 4);
  REQUIRE(f.bins == 513);
  REQUIRE(f.source == PriorSource::spectrogram);
  double max_amp = 0.0;
  for (double v : rs.amp) max_amp = std::max(max_amp, v);
  for (std::size_t m = 0; m < f.frames; ++m) {
    // Interior bins recover the row-space amplitude; the filterbank does not
    // touch DC or Nyquist so those sit at the magnitude floor.
    for (std::size_t k = 1; k < 512; ++k)
      REQUIRE(std::abs(f.at(m, k)) == Catch::Approx(rs.amp[k]).margin(1e-5 * max_amp));
    REQUIRE(std::abs(f.at(m, 0)) <= 1e-6 * max_amp);
    REQUIRE(std::abs(f.at(m, 512)) <= 1e-6 * max_amp);
  }
}

TEST_CASE("full-order envelope filter matches the spectrogram filter") {
  const MelFilterbank fb = mel_filterbank(24000, 1024, 100, 0.0, 12000.0);
  const StftParams p = make_stft_params(1024, 256, 1024);
  const RowSpaceMel rs = row_space_mel(fb, 2, 5);
  const PriorFilter a = build_filter_from_spectrogram(rs.c, fb, p);
  const PriorFilter b = build_filter_from_envelope(rs.c, fb, p, 512);
  REQUIRE(b.source == PriorSource::spectral_envelope);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    REQUIRE(b.values[i].real() == Catch::Approx(a.values[i].real()).margin(1e-8));
    REQUIRE(b.values[i].imag() == Catch::Approx(a.values[i].imag()).margin(1e-8));
  }
}

TEST_CASE("default envelope filter is smoother than the raw one") {
  // A tone stack gives the spectrum harmonic ripple that liftering removes.
  AudioBuffer x = sine(300.0, 8192, 0.3);
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    const double t = static_cast<double>(i);
    x.samples[i] += static_cast<float>(0.2 * std::sin(2.0 * kPi * 600.0 * t / 24000.0) +
                                       0.15 * std::sin(2.0 * kPi * 900.0 * t / 24000.0) +
                                       0.1 * std::sin(2.0 * kPi * 1500.0 * t / 24000.0));
  }
  const MelFilterbank fb = mel_filterbank(24000, 1024, 100, 0.0, 12000.0);
  const StftParams p = make_stft_params(1024, 256, 1024);
  const MelSpectrogram c = log_mel(x, p, fb);
  const PriorFilter raw = build_filter_from_spectrogram(c, fb, p);
  const PriorFilter env = build_filter_from_envelope(c, fb, p);
  for (std::size_t m = 4; m + 4 < raw.frames; m += 7) {
    double tv_raw = 0.0, tv_env = 0.0;
    for (std::size_t k = 1; k < 513; ++k) {
      tv_raw += std::abs(std::log(std::abs(raw.at(m, k))) - std::log(std::abs(raw.at(m, k - 1))));
      tv_env += std::abs(std::log(std::abs(env.at(m, k))) - std::log(std::abs(env.at(m, k - 1))));
    }
    REQUIRE(tv_env < tv_raw);
  }
}

TEST_CASE("floor-level mel frames give a near-silent prior") {
  const MelFilterbank fb = mel_filterbank(24000, 1024, 100, 0.0, 12000.0);
  const StftParams p = make_stft_params(1024, 256, 1024);
  MelSpectrogram c;
  c.frames = 8;
  c.n_mels = 100;
  c.values.assign(800, static_cast<float>(std::log(1e-5)));
  const PriorFilter f = build_filter_from_spectrogram(c, fb, p);
  for (const auto& v : f.values) {
    REQUIRE(std::abs(v) >= kFilterMagFloor * 0.999);
    REQUIRE(std::abs(v) <= 2e-4);
  }
  const AudioBuffer noise = sample_prior(f, p, 8 * 256, 7);
  double rms = 0.0;
  for (float s : noise.samples) rms += static_cast<double>(s) * s;
  rms = std::sqrt(rms / noise.samples.size());
  REQUIRE(rms < 1e-3);
}

TEST_CASE("identity filter returns the seeded analysis noise") {
  const StftParams p = make_stft_params(1024, 256, 1024);
  const std::size_t frames = 20;
  const std::size_t length = frames * 256;
  const PriorFilter f = identity_filter(frames, p);
  const AudioBuffer out = sample_prior(f, p, length, 4242);
  REQUIRE(out.samples.size() == length);
  NoiseStream rng(4242, 0);
  for (std::size_t i = 0; i < length; ++i) {
    const float eps = static_cast<float>(rng.gaussian());
    REQUIRE(out.samples[i] == Catch::Approx(eps).margin(1e-6));
  }
}

TEST_CASE("zero filter silences the prior exactly") {
  const StftParams p = make_stft_params(256, 64, 256);
  PriorFilter f = identity_filter(10, p);
  for (auto& v : f.values) v = {0.0, 0.0};
  const AudioBuffer out = sample_prior(f, p, 640, 99);
  for (float s : out.samples) REQUIRE(s == 0.0f);
}

TEST_CASE("prior synthesis is linear in the filter") {
  const StftParams p = make_stft_params(256, 64, 256);
  NoiseStream rng(55, 0);
  PriorFilter f = identity_filter(16, p);
  for (auto& v : f.values) v = {rng.gaussian(), rng.gaussian()};
  PriorFilter f2 = f;
  for (auto& v : f2.values) v *= 2.0;
  const AudioBuffer a = sample_prior(f, p, 1024, 31);
  const AudioBuffer b = sample_prior(f2, p, 1024, 31);
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    REQUIRE(b.samples[i] == Catch::Approx(2.0 * a.samples[i]).margin(1e-6));
}

TEST_CASE("band-limited filter concentrates energy in band") {
  const StftParams p = make_stft_params(1024, 256, 1024);
  const double bin_w = 24000.0 / 1024.0;
  PriorFilter f = identity_filter(20, p);
  for (std::size_t m = 0; m < f.frames; ++m)
    for (std::size_t k = 0; k < f.bins; ++k)
      if (k * bin_w > 6000.0) f.at(m, k) = {0.0, 0.0};
  double in_band = 0.0, above = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const AudioBuffer out = sample_prior(f, p, 20 * 256, seed);
    in_band += band_energy(out, p, 0.0, 6000.0);
    above += band_energy(out, p, 6200.0, 12000.1);
  }
  REQUIRE(above < 0.01 * in_band);
}

TEST_CASE("prior power spectrum follows the filter in third-octave bands") {
  const int n_fft = 1024;
  const StftParams p = make_stft_params(n_fft, 256, n_fft);
  std::vector<double> a(513);
  for (std::size_t k = 0; k < a.size(); ++k)
    a[k] = 0.05 + 1.0 / (1.0 + std::pow((static_cast<double>(k) - 60.0) / 90.0, 2.0));
  const auto row = minimum_phase_filter(a, n_fft);
  const std::size_t frames = 40;
  PriorFilter f = identity_filter(frames, p);
  for (std::size_t m = 0; m < frames; ++m)
    for (std::size_t k = 0; k < 513; ++k) f.at(m, k) = row[k];

  // Mean re-analysis power per bin over seeds and interior frames.
  std::vector<double> mean_power(513, 0.0);
  std::size_t count = 0;
  for (std::uint64_t seed = 100; seed < 200; ++seed) {
    const AudioBuffer out = sample_prior(f, p, frames * 256, seed);
    const ComplexSpectrogram spec = stft(out, p);
    for (std::size_t m = 2; m + 2 < spec.frames; ++m) {
      for (std::size_t k = 0; k < 513; ++k) mean_power[k] += std::norm(spec.at(m, k));
      ++count;
    }
  }
  for (double& v : mean_power) v /= static_cast<double>(count);

  // White unit noise analyzed with this window has per-bin power sum(w^2).
  double w_energy = 0.0;
  for (int n = 0; n < n_fft; ++n) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * n / n_fft);
    w_energy += w * w;
  }

  const double bin_w = 24000.0 / n_fft;
  int bands_checked = 0;
  for (double fc = 250.0; fc < 8000.0; fc *= std::pow(2.0, 1.0 / 3.0)) {
    const std::size_t k_lo = static_cast<std::size_t>(std::ceil(fc / std::pow(2.0, 1.0 / 6.0) / bin_w));
    const std::size_t k_hi = static_cast<std::size_t>(std::floor(fc * std::pow(2.0, 1.0 / 6.0) / bin_w));
    if (k_hi < k_lo || k_hi > 512) continue;
    double got = 0.0, want = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      got += mean_power[k];
      want += a[k] * a[k] * w_energy;
    }
    REQUIRE(got / want == Catch::Approx(1.0).margin(0.1));
    ++bands_checked;
  }
  REQUIRE(bands_checked >= 15);
}

TEST_CASE("prior sampling is deterministic per seed") {
  const StftParams p = make_stft_params(256, 64, 256);
  const PriorFilter f = identity_filter(12, p);
  const AudioBuffer a = sample_prior(f, p, 768, 123);
  const AudioBuffer b = sample_prior(f, p, 768, 123);
  const AudioBuffer c = sample_prior(f, p, 768, 124);
  REQUIRE(a.samples == b.samples);
  REQUIRE(a.samples != c.samples);
}

TEST_CASE("prior construction and sampling validate their inputs") {
  const StftParams p = make_stft_params(1024, 256, 1024);
  REQUIRE_THROWS_MATCHES(identity_filter(0, p), Error, kind_is(ErrorKind::empty_input));
  const PriorFilter f = identity_filter(4, p);
  REQUIRE_THROWS_MATCHES(sample_prior(f, p, 4 * 256 + 1, 0), Error, kind_is(ErrorKind::shape));
  const StftParams small = make_stft_params(256, 64, 256);
  REQUIRE_THROWS_MATCHES(sample_prior(f, small, 256, 0), Error, kind_is(ErrorKind::shape));

  const MelFilterbank fb = mel_filterbank(24000, 1024, 100, 0.0, 12000.0);
  MelSpectrogram c;
  c.frames = 2;
  c.n_mels = 100;
  c.values.assign(200, 0.0f);
  REQUIRE_THROWS_MATCHES(build_filter_from_envelope(c, fb, p, 513), Error,
                         kind_is(ErrorKind::parameter));
  REQUIRE_THROWS_MATCHES(build_filter_from_spectrogram(c, fb, small), Error,
                         kind_is(ErrorKind::shape));
}
