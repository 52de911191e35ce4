// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "fastfit/error.hpp"

namespace fastfit {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 transform with precomputed tables. Forward applies
// X[k] = sum_n x[n] e^{-2pi i k n / N}; inverse includes the 1/N factor.
// Sizes are restricted to powers of two, which covers every FFT length
// used by the engine (16 .. 2048).
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    if (!is_power_of_two(n_))
      raise(ErrorKind::parameter, "FFT size must be a power of two, got " + std::to_string(n_));
    rev_.resize(n_);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n_) ++log2n;
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < log2n; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
      rev_[i] = r;
    }
    twiddle_.resize(n_ / 2);
    for (std::size_t j = 0; j < n_ / 2; ++j) {
      double ang = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_);
      twiddle_[j] = {std::cos(ang), std::sin(ang)};
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::complex<double>* a) const { transform(a, false); }

  void inverse(std::complex<double>* a) const {
    transform(a, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) a[i] *= scale;
  }

 private:
  void transform(std::complex<double>* a, bool inv) const {
    for (std::size_t i = 0; i < n_; ++i)
      if (rev_[i] > i) std::swap(a[i], a[rev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t stride = n_ / len;
      for (std::size_t base = 0; base < n_; base += len) {
        for (std::size_t j = 0; j < len / 2; ++j) {
          std::complex<double> w = twiddle_[j * stride];
          if (inv) w = std::conj(w);
          const std::complex<double> u = a[base + j];
          const std::complex<double> v = a[base + j + len / 2] * w;
          a[base + j] = u + v;
          a[base + j + len / 2] = u - v;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::size_t> rev_;
  std::vector<std::complex<double>> twiddle_;
};

}  // namespace fastfit
