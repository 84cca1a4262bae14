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

#include "crem/random.hpp"

#include <array>
#include <cmath>

#include "crem/error.hpp"

namespace crem {
namespace {

constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kSqrtHalf = 0.70710678118654752440;

// 1 / (2k + 1), the series of atanh(s) / s in powers of s^2.
constexpr auto kAtanhSeries = [] {
  std::array<double, 15> c{};
  for (int k = 0; k < 15; ++k) c[static_cast<std::size_t>(k)] = 1.0 / (2 * k + 1);
  return c;
}();

// Acklam's tail coefficients.
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                         -2.400758277161838e+00, -2.549732539343734e+00,
                         4.374664141464968e+00, 2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01,
                         2.445134137142996e+00, 3.754408661907416e+00};

double tail(double q) {
  return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
         ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
}

}  // namespace

double portable_log(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("portable_log needs a positive finite argument");
  }
  int e = 0;
  double m = std::frexp(x, &e);
  if (m < kSqrtHalf) {
    m *= 2.0;
    --e;
  }
  // log m = 2 atanh(s) with |s| <= 0.1716.
  const double s = (m - 1.0) / (m + 1.0);
  const double s2 = s * s;
  double series = kAtanhSeries[14];
  for (int k = 13; k >= 0; --k) series = series * s2 + kAtanhSeries[k];
  const double de = static_cast<double>(e);
  return de * kLn2Hi + (2.0 * s * series + de * kLn2Lo);
}

namespace detail {

double normal_quantile_tail(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile needs p in (0,1)");
  }
  if (p < kQLow) return tail(std::sqrt(-2.0 * portable_log(p)));
  return -tail(std::sqrt(-2.0 * portable_log(1.0 - p)));
}

}  // namespace detail

double normal_bound() {
  static const double bound = [] {
    const double lo = std::abs(normal_quantile(unit_open(0)));
    const double hi = std::abs(normal_quantile(unit_open(~0ULL)));
    return std::nextafter(lo > hi ? lo : hi, 1e300);
  }();
  return bound;
}

}  // namespace crem
