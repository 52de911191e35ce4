// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "fastfit/error.hpp"
#include "fastfit/fft.hpp"

namespace fastfit {

constexpr double kFilterMagFloor = 1e-8;

namespace detail {

// Real cepstrum of a one-sided log magnitude: extend symmetrically to the
// full FFT grid, inverse transform. Output is real and even.
inline std::vector<double> real_cepstrum(const std::vector<double>& log_mag, int n_fft) {
  const std::size_t n = static_cast<std::size_t>(n_fft);
  const std::size_t bins = n / 2 + 1;
  if (log_mag.size() != bins) raise(ErrorKind::shape, "log magnitude size does not match n_fft");
  std::vector<std::complex<double>> buf(n);
  for (std::size_t k = 0; k < bins; ++k) buf[k] = {log_mag[k], 0.0};
  for (std::size_t k = 1; k + 1 < bins; ++k) buf[n - k] = {log_mag[k], 0.0};
  Fft fft(n);
  fft.inverse(buf.data());
  std::vector<double> ceps(n);
  for (std::size_t i = 0; i < n; ++i) ceps[i] = buf[i].real();
  return ceps;
}

}  // namespace detail

// Homomorphic minimum-phase construction: fold the real cepstrum onto causal
// quefrencies, transform back and exponentiate. The returned one-sided
// response keeps the input magnitude and acquires minimum phase.
inline std::vector<std::complex<double>> minimum_phase_filter(const std::vector<double>& magnitude,
                                                              int n_fft) {
  const std::size_t n = static_cast<std::size_t>(n_fft);
  if (!is_power_of_two(n)) raise(ErrorKind::parameter, "n_fft must be a power of two");
  const std::size_t bins = n / 2 + 1;
  if (magnitude.size() != bins) raise(ErrorKind::shape, "magnitude size does not match n_fft");
  std::vector<double> log_mag(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    if (!(magnitude[k] >= 0.0) || !std::isfinite(magnitude[k]))
      raise(ErrorKind::numeric, "filter magnitude must be finite and nonnegative");
    log_mag[k] = std::log(std::max(magnitude[k], kFilterMagFloor));
  }
  std::vector<double> ceps = detail::real_cepstrum(log_mag, n_fft);
  // double the strictly positive quefrencies, keep 0 and Nyquist, drop the rest
  std::vector<std::complex<double>> buf(n, {0.0, 0.0});
  buf[0] = {ceps[0], 0.0};
  for (std::size_t q = 1; q < n / 2; ++q) buf[q] = {2.0 * ceps[q], 0.0};
  buf[n / 2] = {ceps[n / 2], 0.0};
  Fft fft(n);
  fft.forward(buf.data());
  std::vector<std::complex<double>> response(bins);
  for (std::size_t k = 0; k < bins; ++k) response[k] = std::exp(buf[k]);
  return response;
}

// Cepstral spectral envelope: keep quefrencies 0..order (mirrored), zero the
// rest. Input and output are one-sided natural-log magnitudes.
inline std::vector<double> cepstral_envelope(const std::vector<double>& log_mag, int n_fft,
                                             int lifter_order) {
  const std::size_t n = static_cast<std::size_t>(n_fft);
  const std::size_t bins = n / 2 + 1;
  if (!is_power_of_two(n)) raise(ErrorKind::parameter, "n_fft must be a power of two");
  if (lifter_order < 0 || static_cast<std::size_t>(lifter_order) >= bins)
    raise(ErrorKind::parameter, "lifter order must lie in [0, bins)");
  std::vector<double> ceps = detail::real_cepstrum(log_mag, n_fft);
  std::vector<std::complex<double>> buf(n, {0.0, 0.0});
  buf[0] = {ceps[0], 0.0};
  for (int q = 1; q <= lifter_order; ++q) {
    buf[static_cast<std::size_t>(q)] = {ceps[static_cast<std::size_t>(q)], 0.0};
    buf[n - static_cast<std::size_t>(q)] = {ceps[n - static_cast<std::size_t>(q)], 0.0};
  }
  Fft fft(n);
  fft.forward(buf.data());
  std::vector<double> env(bins);
  for (std::size_t k = 0; k < bins; ++k) env[k] = buf[k].real();
  return env;
}

}  // namespace fastfit
