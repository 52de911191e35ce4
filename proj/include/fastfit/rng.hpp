// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fastfit {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator: the state advances by a fixed stride and each
// output is a pure mix of it, so a (seed, stream) pair names one exact
// sequence with no global state. One stream per utterance keeps --jobs
// scheduling irrelevant to the produced bytes.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed;
    const std::uint64_t a = detail::splitmix64(s);
    s = stream ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t b = detail::splitmix64(s);
    state_ = a ^ (b + 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  // uniform in (0, 1]; never zero so it can feed a log directly
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; the paired draw is cached
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fastfit
