// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fastfit/audio.hpp"
#include "fastfit/error.hpp"
#include "fastfit/stft.hpp"

namespace fastfit {

constexpr double kMrStftMagFloor = 1e-7;
constexpr double kDefaultLambdaAux = 2.5;

struct MrStftResolution {
  int n_fft;
  int hop;
  int win_length;
};

inline std::vector<MrStftResolution> default_mr_stft_resolutions() {
  return {{1024, 120, 600}, {2048, 240, 1200}, {512, 50, 240}};
}

// Mean over resolutions of spectral convergence plus log-magnitude L1.
// The reference x supplies the convergence denominator; magnitudes are
// floored at 1e-7 before both terms.
inline double mr_stft(const AudioBuffer& x, const AudioBuffer& y,
                      const std::vector<MrStftResolution>& resolutions =
                          default_mr_stft_resolutions()) {
  if (x.samples.size() != y.samples.size())
    raise(ErrorKind::shape, "mr_stft inputs must have equal length");
  if (x.samples.empty()) raise(ErrorKind::empty_input, "mr_stft inputs are empty");
  if (resolutions.empty()) raise(ErrorKind::parameter, "mr_stft needs at least one resolution");

  double total = 0.0;
  for (const MrStftResolution& r : resolutions) {
    const StftParams p = make_stft_params(r.n_fft, r.hop, r.win_length, true);
    const ComplexSpectrogram sx = stft(x, p);
    const ComplexSpectrogram sy = stft(y, p);
    double num = 0.0, den = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < sx.values.size(); ++i) {
      const double mx = std::max(std::abs(sx.values[i]), kMrStftMagFloor);
      const double my = std::max(std::abs(sy.values[i]), kMrStftMagFloor);
      num += (mx - my) * (mx - my);
      den += mx * mx;
      l1 += std::abs(std::log(mx) - std::log(my));
    }
    total += std::sqrt(num) / std::sqrt(den) + l1 / static_cast<double>(sx.values.size());
  }
  return total / static_cast<double>(resolutions.size());
}

// Score map and per-layer feature maps from one sub-discriminator. Shapes are
// opaque here; reductions run over flattened values.
struct SubDiscriminatorOutput {
  std::vector<float> scores;
  std::vector<std::vector<float>> features;
};

using DiscriminatorOutputs = std::vector<SubDiscriminatorOutput>;

namespace detail {

inline double mean_sq_dist(const std::vector<float>& v, double target) {
  if (v.empty()) raise(ErrorKind::empty_input, "empty discriminator score map");
  double acc = 0.0;
  for (float x : v) {
    const double d = static_cast<double>(x) - target;
    acc += d * d;
  }
  return acc / static_cast<double>(v.size());
}

}  // namespace detail

// Least-squares discriminator objective for one refinement iterate:
// mean over the K sub-discriminators of E[(D(x)-1)^2] + E[D(y_t)^2],
// divided by the iterate count T (the caller sums contributions over steps).
inline double lsgan_disc_loss(const DiscriminatorOutputs& real, const DiscriminatorOutputs& fake,
                              int T = 1) {
  if (T < 1) raise(ErrorKind::parameter, "iterate count must be >= 1");
  if (real.empty()) raise(ErrorKind::empty_input, "no sub-discriminator outputs");
  if (real.size() != fake.size())
    raise(ErrorKind::shape, "real/fake sub-discriminator counts differ");
  double acc = 0.0;
  for (std::size_t k = 0; k < real.size(); ++k)
    acc += detail::mean_sq_dist(real[k].scores, 1.0) + detail::mean_sq_dist(fake[k].scores, 0.0);
  return acc / (static_cast<double>(T) * static_cast<double>(real.size()));
}

struct GenLossBreakdown {
  double aux = 0.0;        // lambda_aux * l_aux
  double adv = 0.0;        // mean_k E[(D_k(y_t) - 1)^2]
  double fm = 0.0;         // lambda_fm * L_fm
  double lambda_aux = 0.0;
  double lambda_fm = 0.0;
  double l_fm = 0.0;       // mean over sub-discriminators and layers of L1
  double total = 0.0;
};

// Generator objective for one iterate: auxiliary reconstruction term plus
// adversarial term plus feature matching, with lambda_fm balanced so the
// feature-matching contribution equals the auxiliary one whenever L_fm > 0.
inline GenLossBreakdown gen_loss(const DiscriminatorOutputs& fake,
                                 const DiscriminatorOutputs& real, double l_aux,
                                 double lambda_aux = kDefaultLambdaAux) {
  if (fake.empty()) raise(ErrorKind::empty_input, "no sub-discriminator outputs");
  if (fake.size() != real.size())
    raise(ErrorKind::shape, "real/fake sub-discriminator counts differ");
  if (!(l_aux >= 0.0) || !std::isfinite(l_aux))
    raise(ErrorKind::parameter, "auxiliary loss must be finite and nonnegative");
  if (!(lambda_aux >= 0.0)) raise(ErrorKind::parameter, "lambda_aux must be nonnegative");

  GenLossBreakdown out;
  double fm_acc = 0.0;
  std::size_t fm_terms = 0;
  for (std::size_t k = 0; k < fake.size(); ++k) {
    out.adv += detail::mean_sq_dist(fake[k].scores, 1.0);
    if (fake[k].features.size() != real[k].features.size())
      raise(ErrorKind::shape, "feature layer counts differ at sub-discriminator " +
                                  std::to_string(k));
    for (std::size_t l = 0; l < fake[k].features.size(); ++l) {
      const auto& a = fake[k].features[l];
      const auto& b = real[k].features[l];
      if (a.size() != b.size())
        raise(ErrorKind::shape, "feature map sizes differ at layer " + std::to_string(l));
      if (a.empty()) raise(ErrorKind::empty_input, "empty feature map");
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        d += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
      fm_acc += d / static_cast<double>(a.size());
      ++fm_terms;
    }
  }
  out.adv /= static_cast<double>(fake.size());
  out.lambda_aux = lambda_aux;
  out.aux = lambda_aux * l_aux;
  out.l_fm = fm_terms > 0 ? fm_acc / static_cast<double>(fm_terms) : 0.0;
  if (out.l_fm > 1e-12) {
    out.lambda_fm = out.aux / out.l_fm;
    out.fm = out.aux;  // lambda_fm * l_fm by construction
  } else if (out.l_fm > 0.0) {
    out.lambda_fm = out.aux / 1e-12;
    out.fm = out.lambda_fm * out.l_fm;
  }
  out.total = out.aux + out.adv + out.fm;
  return out;
}

}  // namespace fastfit
