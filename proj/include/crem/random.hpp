// Copyright 2026 The CREM Sampling Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Counter-based randomness. Every Gaussian in the library is a pure function
// of a 64-bit key, and keys are derived by hashing, so results never depend on
// evaluation order or thread count.
//
// Key derivation:
//   root_key(seed)       = splitmix64(seed)
//   child_key(k, bit)    = splitmix64(k + (bit + 1) * 0x9E3779B97F4A7C15)
//   uniform word of key  = fmix64(k ^ 0xD6E8FEB86659FD93)
//   uniform in (0,1)     = ((word >> 12) + 0.5) * 2^-52
//   standard normal      = normal_quantile(uniform)
//
// Sub-seeds for experiments:
//   derive_seed(seed, tag, g, r) =
//     splitmix64(splitmix64(splitmix64(seed ^ fnv1a64(tag)) + g) + r)

#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace crem {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// The SplitMix64 output function applied to x + golden.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// MurmurHash3 64-bit finalizer.
constexpr std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xFF51AFD7ED558CCDULL;
  k ^= k >> 33;
  k *= 0xC4CEB9FE1A85EC53ULL;
  k ^= k >> 33;
  return k;
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t root_key(std::uint64_t seed) { return splitmix64(seed); }

constexpr std::uint64_t child_key(std::uint64_t parent, unsigned bit) {
  return splitmix64(parent + (static_cast<std::uint64_t>(bit) + 1) * kGolden);
}

/// Maps a 64-bit word to the open interval (0,1) using its top 52 bits; both
/// the sum and the scaling are exact, so the result is never 0 or 1.
constexpr double unit_open(std::uint64_t word) {
  return (static_cast<double>(word >> 12) + 0.5) * 0x1.0p-52;
}

/// Natural logarithm built only from frexp and IEEE arithmetic, so that it
/// rounds identically on every conforming platform. Relative error ~1e-16.
double portable_log(double x);

namespace detail {
// Acklam's central-region coefficients.
inline constexpr double kQa[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
inline constexpr double kQb[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
inline constexpr double kQLow = 0.02425;
inline constexpr double kQHigh = 1.0 - kQLow;
double normal_quantile_tail(double p);
}  // namespace detail

/// Inverse standard normal CDF by Acklam's rational approximation
/// (relative error below 1.15e-9). p must lie in (0,1).
inline double normal_quantile(double p) {
  if (p >= detail::kQLow && p <= detail::kQHigh) {
    using detail::kQa;
    using detail::kQb;
    const double q = p - 0.5;
    const double r = q * q;
    return (((((kQa[0] * r + kQa[1]) * r + kQa[2]) * r + kQa[3]) * r + kQa[4]) * r + kQa[5]) * q /
           (((((kQb[0] * r + kQb[1]) * r + kQb[2]) * r + kQb[3]) * r + kQb[4]) * r + 1.0);
  }
  return detail::normal_quantile_tail(p);
}

/// Standard normal deviate attached to a key.
inline double standard_normal(std::uint64_t key) {
  return normal_quantile(unit_open(fmix64(key ^ 0xD6E8FEB86659FD93ULL)));
}

/// Largest |standard_normal(k)| over all keys.
double normal_bound();

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                    std::uint64_t grid_index,
                                    std::uint64_t realization) {
  std::uint64_t h = splitmix64(seed ^ fnv1a64(tag));
  h = splitmix64(h + grid_index);
  return splitmix64(h + realization);
}

/// Sequential stream for the samplers' own coin flips (distinct from the
/// disorder). Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += kGolden;
    return splitmix64(state_ - kGolden);
  }
  double uniform() { return unit_open((*this)()); }
  double normal() { return normal_quantile(uniform()); }

 private:
  std::uint64_t state_;
};

}  // namespace crem
