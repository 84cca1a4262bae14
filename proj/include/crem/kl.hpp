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

// KL divergence from the block sampler's output law to the Gibbs measure:
// directly, through the level decomposition, and averaged over disorder.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "crem/covariance.hpp"
#include "crem/field.hpp"
#include "crem/sampler.hpp"
#include "crem/stats.hpp"

namespace crem {

/// sum P (log P - log Q), terms added in descending magnitude. Values in
/// [-1e-12, 0) are clamped to 0.
double kl_divergence(const LeafDistribution& P, const LeafDistribution& Q);

struct KlReport {
  double kl_direct = 0.0;
  double kl_decomposed = 0.0;
  /// (k, sum over |u| = kM of the sampler's level marginal times log Z^u).
  std::vector<std::pair<int, double>> per_level_terms;
  double log_z_full = 0.0;
  /// Sum of the per-level terms.
  double sum_block_log_z = 0.0;
  /// Sum over levels of the plain average of log Z^u over |u| = kM.
  double sum_level_mean_log_z = 0.0;
  double normalized = 0.0;  // kl_direct / N
};

KlReport kl_decomposition(const DenseTree& tree, const SamplerConfig& cfg);

struct ExpectedKl {
  DisorderStats kl;           // decomposed KL per realization
  DisorderStats alternative;  // log Z_N - sum_k mean log Z^{(kM)}
  DisorderStats difference;   // paired difference of the two
  bool estimators_agree = true;
  std::vector<KlReport> reports;
};

/// Realization r uses seed derive_seed(seed, "kl", grid_index, r).
ExpectedKl expected_kl(const CovarianceSpec& spec, double beta, int M, int N,
                       int n_realizations, std::uint64_t seed,
                       std::uint64_t grid_index = 0, int workers = 1,
                       int dense_cap = kDefaultDenseCap);

/// 2^{p/2+1} p times the integral of exp(-y^2/2) y^{p-1} over (0, inf).
double gaussian_moment_constant(double p);
/// beta sqrt(2) C_1(p)^{1/p} / sqrt(M).
double concentration_bound(double beta, int M, double p);

struct ConcentrationRow {
  int M;
  double mean_kl_per_n;
  double deviation_l1;
  double deviation_l2;
  double bound_l1;
  double bound_l2;
  bool violation;
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> rows;
  /// deviation_l2[i+1] / deviation_l2[i] along the M list.
  std::vector<double> ratios;
  bool any_violation = false;
};

/// Realizations are shared across M (same seeds for every M).
ConcentrationReport concentration_check(const CovarianceSpec& spec, double beta,
                                        int N, const std::vector<int>& M_list,
                                        int n_realizations, std::uint64_t seed,
                                        int workers = 1);

struct SandwichBlock {
  int k;
  double a_minus;
  double a_plus;
  double lower;  // f(beta sqrt(a-)) - eps beta sqrt(a-)
  double upper;  // f(beta sqrt(a+)) + eps beta sqrt(a+)
};

struct ConvergenceRow {
  int N;
  int M;
  double mean_kl_per_n;
  double stderr_kl_per_n;
  double gap;
  std::vector<SandwichBlock> sandwich;
};

/// Per-block envelope on [kM/N, (k+1)M/N] with essential inf/sup slopes.
std::vector<SandwichBlock> sandwich_envelope(const CovarianceSpec& spec, double beta,
                                             int N, int M, double eps);

/// For each N with M = block_schedule(N, epsilon): mean KL/N against the gap
/// F - F~. Realization seeds use grid_index = position in N_list.
std::vector<ConvergenceRow> convergence_gap_check(const CovarianceSpec& spec, double beta,
                                                  const std::vector<int>& N_list,
                                                  double epsilon, int n_realizations,
                                                  std::uint64_t seed, int workers = 1,
                                                  double sandwich_eps = 0.0);

}  // namespace crem
