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

// Finite-depth free energy of the binary branching random walk with
// standard Gaussian increments.

#pragma once

#include <cstdint>
#include <vector>

#include "crem/covariance.hpp"

namespace crem {

inline constexpr int kMaxBrwDepth = 22;

struct BrwEstimate {
  int M = 1;
  double beta = 0.0;
  double f_hat = 0.0;  // E[log Z_M] / M
  double std_error = 0.0;
  bool exact = false;
};

/// E log(e^{beta xi_1} + e^{beta xi_2}) for independent standard normals,
/// by quadrature of beta/sqrt(pi) + E log1p(exp(-beta sqrt(2) |Z|)).
double brw_exact_depth_one(double beta);

/// One estimate. beta = 0 is exact (log 2); M = 1 uses the quadrature route
/// unless `monte_carlo` is set. Trial t uses seed derive_seed(seed, "brw", M, t).
BrwEstimate brw_free_energy(int M, double beta, int trials, std::uint64_t seed,
                            int workers = 1, bool monte_carlo = false);

struct BrwGrid {
  int M = 1;
  std::vector<double> betas;
  std::vector<BrwEstimate> estimates;
  /// log Z per trial and beta (trials x betas), empty for exact rows.
  std::vector<std::vector<double>> log_z;
};

/// Estimates on a beta grid from shared realizations.
BrwGrid brw_free_energy_grid(int M, const std::vector<double>& betas, int trials,
                             std::uint64_t seed, int workers = 1, bool monte_carlo = false);

/// f/beta - 2 log 2 / beta, and 0 at beta = 0.
double g_transform(double f_value, double beta);

struct GmRow {
  int M;
  double beta;
  double f_hat;
  double std_error;
  double f_limit;
  double g_hat;
  bool below_limit;  // f_hat <= f + 3 se
};

struct GmReport {
  std::vector<GmRow> rows;
  std::vector<int> M_list;
  /// sup over beta > 0 of |f_hat - f| / beta, per M.
  std::vector<double> sup_error;
  /// Whether g_hat is nondecreasing over the positive grid points (paired
  /// 3 se tolerance), per M.
  std::vector<bool> g_monotone;
  bool upper_bound_ok = true;
  bool monotone_ok = true;
  bool trend_ok = true;
  bool ok() const { return upper_bound_ok && monotone_ok && trend_ok; }
};

GmReport verify_gM_properties(const std::vector<double>& beta_grid,
                              const std::vector<int>& M_list, int trials,
                              std::uint64_t seed, int workers = 1);

struct SandwichRow {
  int k;
  int depth;
  double a_minus;
  double a_plus;
  double estimate;  // E[log Z^{(kM)}] / depth
  double std_error;
  double epsilon;
  double lower;
  double upper;
  bool inside;  // within the envelope up to 3 se
};

/// Calibrated uniform error at depth M: max over the beta grid of
/// |f_hat - f|/beta + 3 se/beta.
double calibrate_epsilon(int M, const std::vector<double>& beta_grid, int trials,
                         std::uint64_t seed, int workers = 1);

std::vector<SandwichRow> sandwich_check(const CovarianceSpec& spec, double beta, int N, int M,
                                        std::uint64_t seed, int trials, int workers = 1);

}  // namespace crem
