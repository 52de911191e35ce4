// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fastfit/error.hpp"

namespace fastfit {

struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
};

// channels x steps activation map, row-major per channel
struct FeatureMap {
  int channels = 0;
  long steps = 0;
  std::vector<float> values;

  FeatureMap() = default;
  FeatureMap(int c, long s) : channels(c), steps(s), values(static_cast<std::size_t>(c) * s, 0.0f) {}

  float& at(int c, long t) { return values[static_cast<std::size_t>(c) * steps + t]; }
  float at(int c, long t) const { return values[static_cast<std::size_t>(c) * steps + t]; }
  const float* row(int c) const { return values.data() + static_cast<std::size_t>(c) * steps; }
  float* row(int c) { return values.data() + static_cast<std::size_t>(c) * steps; }
};

namespace detail {

inline void expect_shape(const Tensor& t, std::initializer_list<int> shape, const char* name) {
  if (t.shape.size() != shape.size())
    raise(ErrorKind::shape, std::string(name) + ": wrong tensor rank");
  std::size_t i = 0;
  for (int d : shape) {
    if (t.shape[i] != d)
      raise(ErrorKind::shape, std::string(name) + ": dimension " + std::to_string(i) +
                                  " is " + std::to_string(t.shape[i]) + ", expected " +
                                  std::to_string(d));
    ++i;
  }
  if (t.data.size() != t.numel())
    raise(ErrorKind::shape, std::string(name) + ": data size does not match shape");
}

}  // namespace detail

// Cross-correlation with stride/dilation/zero padding. weight is
// (out_ch, in_ch, k). Reductions accumulate in double and the loop order is
// fixed, so results are identical from run to run.
inline FeatureMap conv1d(const FeatureMap& x, const Tensor& weight, const Tensor* bias,
                         int stride = 1, int dilation = 1, int padding = 0) {
  if (weight.shape.size() != 3) raise(ErrorKind::shape, "conv1d weight must be (out, in, k)");
  const int out_ch = weight.shape[0];
  const int in_ch = weight.shape[1];
  const int k = weight.shape[2];
  if (weight.data.size() != weight.numel()) raise(ErrorKind::shape, "conv1d weight data mismatch");
  if (x.channels != in_ch) raise(ErrorKind::shape, "conv1d input channels do not match weight");
  if (stride <= 0 || dilation <= 0 || padding < 0)
    raise(ErrorKind::parameter, "conv1d stride/dilation must be positive, padding nonnegative");
  if (bias) detail::expect_shape(*bias, {out_ch}, "conv1d bias");
  const long span = static_cast<long>(dilation) * (k - 1) + 1;
  const long out_steps = (x.steps + 2L * padding - span) / stride + 1;
  if (out_steps <= 0) raise(ErrorKind::shape, "conv1d output would be empty");

  FeatureMap y(out_ch, out_steps);
  std::vector<double> acc(static_cast<std::size_t>(out_steps));
  for (int o = 0; o < out_ch; ++o) {
    const double b = bias ? static_cast<double>(bias->data[static_cast<std::size_t>(o)]) : 0.0;
    std::fill(acc.begin(), acc.end(), b);
    for (int ic = 0; ic < in_ch; ++ic) {
      const float* xr = x.row(ic);
      const float* wr = weight.data.data() +
                        (static_cast<std::size_t>(o) * in_ch + ic) * static_cast<std::size_t>(k);
      for (int j = 0; j < k; ++j) {
        const double w = wr[j];
        if (w == 0.0) continue;
        const long base = static_cast<long>(j) * dilation - padding;
        if (base >= x.steps) continue;
        // valid t range: 0 <= t*stride + base < steps
        long t_lo = base < 0 ? (-base + stride - 1) / stride : 0;
        long t_hi = (x.steps - 1 - base) / stride;
        t_lo = std::max(t_lo, 0L);
        t_hi = std::min(t_hi, out_steps - 1);
        const float* xp = xr + t_lo * stride + base;
        if (stride == 1) {
          for (long t = t_lo; t <= t_hi; ++t, ++xp) acc[static_cast<std::size_t>(t)] += w * *xp;
        } else {
          for (long t = t_lo; t <= t_hi; ++t, xp += stride) acc[static_cast<std::size_t>(t)] += w * *xp;
        }
      }
    }
    float* yr = y.row(o);
    for (long t = 0; t < out_steps; ++t) yr[t] = static_cast<float>(acc[static_cast<std::size_t>(t)]);
  }
  return y;
}

// Transposed convolution used for upsampling. weight is (in_ch, out_ch, k);
// the full output of length (steps-1)*stride + k is cropped by (k-stride)/2
// on each side, giving exactly steps*stride samples. Requires k >= stride
// and k - stride even.
inline FeatureMap transposed_conv1d(const FeatureMap& x, const Tensor& weight, const Tensor* bias,
                                    int stride) {
  if (weight.shape.size() != 3) raise(ErrorKind::shape, "transposed_conv1d weight must be (in, out, k)");
  const int in_ch = weight.shape[0];
  const int out_ch = weight.shape[1];
  const int k = weight.shape[2];
  if (weight.data.size() != weight.numel())
    raise(ErrorKind::shape, "transposed_conv1d weight data mismatch");
  if (x.channels != in_ch) raise(ErrorKind::shape, "transposed_conv1d input channels mismatch");
  if (stride <= 0) raise(ErrorKind::parameter, "transposed_conv1d stride must be positive");
  if (k < stride || (k - stride) % 2 != 0)
    raise(ErrorKind::parameter,
          "transposed_conv1d kernel must be stride + an even margin (use k = 2*stride)");
  if (bias) detail::expect_shape(*bias, {out_ch}, "transposed_conv1d bias");
  const int crop = (k - stride) / 2;
  const long out_steps = x.steps * stride;
  FeatureMap y(out_ch, out_steps);

  // k = 2*stride (the production shape) admits a per-phase form: output
  // t = q*stride + r mixes exactly two taps, one against x[q] and one
  // against a neighbor, so each phase is a contiguous two-tap stencil.
  if (k == 2 * stride && stride % 2 == 0) {
    const int h = stride / 2;
    const long n = x.steps;
    std::vector<double> tmp(static_cast<std::size_t>(n));
    for (int o = 0; o < out_ch; ++o) {
      const double b = bias ? static_cast<double>(bias->data[static_cast<std::size_t>(o)]) : 0.0;
      for (int r = 0; r < stride; ++r) {
        std::fill(tmp.begin(), tmp.end(), b);
        const bool low = r < h;
        const int j0 = r + h;
        const int j1 = low ? r + h + stride : r + h - stride;
        for (int ic = 0; ic < in_ch; ++ic) {
          const float* xr = x.row(ic);
          const float* wr = weight.data.data() +
                            (static_cast<std::size_t>(ic) * out_ch + o) * static_cast<std::size_t>(k);
          const double w0 = wr[j0], w1 = wr[j1];
          if (low) {
            tmp[0] += w0 * xr[0];
            for (long q = 1; q < n; ++q)
              tmp[static_cast<std::size_t>(q)] += w0 * xr[q] + w1 * xr[q - 1];
          } else {
            for (long q = 0; q + 1 < n; ++q)
              tmp[static_cast<std::size_t>(q)] += w0 * xr[q] + w1 * xr[q + 1];
            tmp[static_cast<std::size_t>(n - 1)] += w0 * xr[n - 1];
          }
        }
        float* yr = y.row(o);
        for (long q = 0; q < n; ++q)
          yr[q * stride + r] = static_cast<float>(tmp[static_cast<std::size_t>(q)]);
      }
    }
    return y;
  }

  std::vector<double> acc(static_cast<std::size_t>(out_steps));
  for (int o = 0; o < out_ch; ++o) {
    const double b = bias ? static_cast<double>(bias->data[static_cast<std::size_t>(o)]) : 0.0;
    std::fill(acc.begin(), acc.end(), b);
    for (int ic = 0; ic < in_ch; ++ic) {
      const float* xr = x.row(ic);
      const float* wr = weight.data.data() +
                        (static_cast<std::size_t>(ic) * out_ch + o) * static_cast<std::size_t>(k);
      for (int j = 0; j < k; ++j) {
        const double w = wr[j];
        if (w == 0.0) continue;
        const long base = static_cast<long>(j) - crop;  // t = s*stride + base
        if (base >= out_steps) continue;
        long s_lo = base < 0 ? (-base + stride - 1) / stride : 0;
        long s_hi = (out_steps - 1 - base) / stride;
        s_lo = std::max(s_lo, 0L);
        s_hi = std::min(s_hi, x.steps - 1);
        double* ap = acc.data() + s_lo * stride + base;
        const float* xp = xr + s_lo;
        for (long s = s_lo; s <= s_hi; ++s, ap += stride, ++xp) *ap += w * *xp;
      }
    }
    float* yr = y.row(o);
    for (long t = 0; t < out_steps; ++t) yr[t] = static_cast<float>(acc[static_cast<std::size_t>(t)]);
  }
  return y;
}

// Per-frame kernels and biases for one stack of location-variable
// convolutions: kernels[f][layer][o][i][j], biases[f][layer][o].
struct LvcKernels {
  long frames = 0;
  int layers = 0;
  int out_ch = 0;
  int in_ch = 0;
  int kernel = 0;
  std::vector<float> kernels;
  std::vector<float> biases;

  std::size_t kernel_stride_frame() const {
    return static_cast<std::size_t>(layers) * out_ch * in_ch * kernel;
  }
  const float* kernel_at(long f, int layer) const {
    return kernels.data() + f * kernel_stride_frame() +
           static_cast<std::size_t>(layer) * out_ch * in_ch * kernel;
  }
  const float* bias_at(long f, int layer) const {
    return biases.data() + (f * layers + layer) * static_cast<std::size_t>(out_ch);
  }
};

// Convolution whose kernel switches every `hop` samples to the kernel of the
// covering conditioning frame. The window reads across segment boundaries;
// sequence ends are zero padded to keep the length. Padding is
// dilation*(k-1)/2, so k must be odd.
inline FeatureMap location_variable_conv(const FeatureMap& x, const LvcKernels& kernels, int layer,
                                         int hop, int dilation = 1) {
  if (layer < 0 || layer >= kernels.layers) raise(ErrorKind::range, "LVC layer index out of range");
  if (hop <= 0 || dilation <= 0) raise(ErrorKind::parameter, "LVC hop and dilation must be positive");
  if (kernels.kernel % 2 == 0) raise(ErrorKind::parameter, "LVC kernel width must be odd");
  if (x.channels != kernels.in_ch) raise(ErrorKind::shape, "LVC input channels mismatch");
  if (x.steps != kernels.frames * static_cast<long>(hop))
    raise(ErrorKind::shape, "LVC input steps " + std::to_string(x.steps) + " != frames*hop = " +
                                std::to_string(kernels.frames * static_cast<long>(hop)));
  const int k = kernels.kernel;
  const int pad = dilation * (k - 1) / 2;
  FeatureMap y(kernels.out_ch, x.steps);
  std::vector<double> acc(static_cast<std::size_t>(hop));
  for (long f = 0; f < kernels.frames; ++f) {
    const float* ker = kernels.kernel_at(f, layer);
    const float* bias = kernels.bias_at(f, layer);
    const long seg = f * hop;
    // Frames whose window stays inside the sequence take a fused path with
    // no bounds checks; the first and last frames fall back to the guarded
    // per-tap loop.
    const bool interior = seg >= pad && seg + hop + pad <= x.steps;
    for (int o = 0; o < kernels.out_ch; ++o) {
      std::fill(acc.begin(), acc.end(), static_cast<double>(bias[o]));
      for (int ic = 0; ic < kernels.in_ch; ++ic) {
        const float* xr = x.row(ic);
        const float* wr = ker + (static_cast<std::size_t>(o) * kernels.in_ch + ic) * k;
        if (interior && k == 3) {
          const double w0 = wr[0], w1 = wr[1], w2 = wr[2];
          const float* xp = xr + seg - pad;
          const long d = dilation;
          for (long u = 0; u < hop; ++u)
            acc[static_cast<std::size_t>(u)] +=
                w0 * xp[u] + w1 * xp[u + d] + w2 * xp[u + 2 * d];
          continue;
        }
        for (int j = 0; j < k; ++j) {
          const double w = wr[j];
          if (w == 0.0) continue;
          const long base = seg + static_cast<long>(j) * dilation - pad;
          if (base >= x.steps) continue;
          const long u_lo = std::max(0L, -base);
          const long u_hi = std::min(static_cast<long>(hop) - 1, x.steps - 1 - base);
          const float* xp = xr + base + u_lo;
          for (long u = u_lo; u <= u_hi; ++u, ++xp) acc[static_cast<std::size_t>(u)] += w * *xp;
        }
      }
      float* yr = y.row(o) + seg;
      for (int u = 0; u < hop; ++u) yr[u] = static_cast<float>(acc[static_cast<std::size_t>(u)]);
    }
  }
  return y;
}

// y = x + sin^2(alpha*x)/alpha, one positive alpha per channel.
inline FeatureMap snake(const FeatureMap& x, const Tensor& alpha) {
  detail::expect_shape(alpha, {x.channels}, "snake alpha");
  for (float a : alpha.data)
    if (!(a > 0.0f)) raise(ErrorKind::parameter, "snake alpha must be strictly positive");
  FeatureMap y(x.channels, x.steps);
  for (int c = 0; c < x.channels; ++c) {
    const double a = alpha.data[static_cast<std::size_t>(c)];
    const float* xr = x.row(c);
    float* yr = y.row(c);
    for (long t = 0; t < x.steps; ++t) {
      const double s = std::sin(a * xr[t]);
      yr[t] = static_cast<float>(xr[t] + s * s / a);
    }
  }
  return y;
}

inline double swish(double x) { return x / (1.0 + std::exp(-x)); }

// y = W v + b with double accumulation; W is (out, in).
inline std::vector<float> linear(const std::vector<float>& v, const Tensor& weight,
                                 const Tensor& bias) {
  if (weight.shape.size() != 2) raise(ErrorKind::shape, "linear weight must be (out, in)");
  const int out_dim = weight.shape[0];
  const int in_dim = weight.shape[1];
  if (v.size() != static_cast<std::size_t>(in_dim))
    raise(ErrorKind::shape, "linear input size does not match weight");
  detail::expect_shape(bias, {out_dim}, "linear bias");
  std::vector<float> y(static_cast<std::size_t>(out_dim));
  for (int o = 0; o < out_dim; ++o) {
    double acc = bias.data[static_cast<std::size_t>(o)];
    const float* wr = weight.data.data() + static_cast<std::size_t>(o) * in_dim;
    for (int i = 0; i < in_dim; ++i) acc += static_cast<double>(wr[i]) * v[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(o)] = static_cast<float>(acc);
  }
  return y;
}

// Adaptive layer norm: normalize across channels at each time step
// (eps = 1e-5), then scale by 1 + gamma(w) and shift by beta(w).
inline FeatureMap adaln(const FeatureMap& x, const std::vector<float>& w, const Tensor& gamma_w,
                        const Tensor& gamma_b, const Tensor& beta_w, const Tensor& beta_b) {
  const std::vector<float> gamma = linear(w, gamma_w, gamma_b);
  const std::vector<float> beta = linear(w, beta_w, beta_b);
  if (gamma.size() != static_cast<std::size_t>(x.channels) || beta.size() != gamma.size())
    raise(ErrorKind::shape, "adaln projection width does not match channels");
  constexpr double kEps = 1e-5;
  FeatureMap y(x.channels, x.steps);
  const double inv_c = 1.0 / static_cast<double>(x.channels);
  const std::size_t steps = static_cast<std::size_t>(x.steps);
  // Channel-major passes: the per-step statistics live in two scratch rows
  // so every sweep reads contiguous memory.
  std::vector<double> mean(steps, 0.0), scale(steps, 0.0);
  for (int c = 0; c < x.channels; ++c) {
    const float* xr = x.row(c);
    for (std::size_t t = 0; t < steps; ++t) mean[t] += xr[t];
  }
  for (std::size_t t = 0; t < steps; ++t) mean[t] *= inv_c;
  for (int c = 0; c < x.channels; ++c) {
    const float* xr = x.row(c);
    for (std::size_t t = 0; t < steps; ++t) {
      const double d = xr[t] - mean[t];
      scale[t] += d * d;
    }
  }
  for (std::size_t t = 0; t < steps; ++t)
    scale[t] = 1.0 / std::sqrt(scale[t] * inv_c + kEps);
  for (int c = 0; c < x.channels; ++c) {
    const float* xr = x.row(c);
    float* yr = y.row(c);
    const double g = 1.0 + gamma[static_cast<std::size_t>(c)];
    const double b = beta[static_cast<std::size_t>(c)];
    for (std::size_t t = 0; t < steps; ++t)
      yr[t] = static_cast<float>((xr[t] - mean[t]) * scale[t] * g + b);
  }
  return y;
}

// First half sines, second half cosines over a geometric frequency ladder
// reaching 10^4: angle_i = t * 10000^(i/(dim/2 - 1)).
inline std::vector<float> sinusoidal_embedding(int t, int dim) {
  if (dim < 2 || dim % 2 != 0) raise(ErrorKind::parameter, "embedding dim must be even and >= 2");
  if (t < 0) raise(ErrorKind::range, "step index must be nonnegative");
  const int half = dim / 2;
  std::vector<float> e(static_cast<std::size_t>(dim));
  for (int i = 0; i < half; ++i) {
    const double freq = half > 1 ? std::pow(10000.0, static_cast<double>(i) / (half - 1)) : 1.0;
    const double ang = static_cast<double>(t) * freq;
    e[static_cast<std::size_t>(i)] = static_cast<float>(std::sin(ang));
    e[static_cast<std::size_t>(half + i)] = static_cast<float>(std::cos(ang));
  }
  return e;
}

// Sinusoidal step code lifted through two swish-activated linear layers.
inline std::vector<float> step_embedding(int t, int base_dim, const Tensor& fc1_w,
                                         const Tensor& fc1_b, const Tensor& fc2_w,
                                         const Tensor& fc2_b) {
  if (t < 1) raise(ErrorKind::range, "step index must be >= 1, got " + std::to_string(t));
  std::vector<float> h = sinusoidal_embedding(t, base_dim);
  h = linear(h, fc1_w, fc1_b);
  for (float& v : h) v = static_cast<float>(swish(v));
  h = linear(h, fc2_w, fc2_b);
  for (float& v : h) v = static_cast<float>(swish(v));
  return h;
}

// z -> w through two swish-activated linear layers.
inline std::vector<float> mapping_network(const std::vector<float>& z, const Tensor& fc1_w,
                                          const Tensor& fc1_b, const Tensor& fc2_w,
                                          const Tensor& fc2_b) {
  std::vector<float> h = linear(z, fc1_w, fc1_b);
  for (float& v : h) v = static_cast<float>(swish(v));
  h = linear(h, fc2_w, fc2_b);
  for (float& v : h) v = static_cast<float>(swish(v));
  return h;
}

}  // namespace fastfit
