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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace crem {

/// Monte Carlo summary over independent disorder realizations.
struct DisorderStats {
  double mean = 0.0;
  double std_error = 0.0;  // sample_sd / sqrt(n)
  double sample_sd = 0.0;
  std::size_t n_realizations = 0;
  std::vector<double> values;
};

/// Mean, unbiased sample standard deviation and standard error, accumulated
/// in index order.
DisorderStats summarize(std::span<const double> values, bool keep_values = false);

struct Interval {
  double lo;
  double hi;
};

/// Wilson score interval for a binomial proportion; z is the normal quantile
/// of the two-sided level (1.96 for 95%).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

struct LinearFit {
  double slope;
  double intercept;
};

/// Ordinary least squares y = intercept + slope x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace crem
