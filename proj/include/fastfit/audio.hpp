// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fastfit/error.hpp"

namespace fastfit {

struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 24000;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

inline void check_finite(const std::vector<float>& v, const char* what) {
  for (float x : v)
    if (!std::isfinite(x)) raise(ErrorKind::numeric, std::string(what) + " contains a non-finite sample");
}

}  // namespace fastfit
