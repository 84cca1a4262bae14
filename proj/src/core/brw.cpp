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

#include "crem/brw.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>

#include "crem/error.hpp"
#include "crem/field.hpp"
#include "crem/parallel.hpp"
#include "crem/random.hpp"
#include "crem/stats.hpp"

namespace crem {
namespace {

constexpr double kLog2 = 0.6931471805599453;

void check_depth(int M) {
  if (M < 1) throw DomainError("BRW depth must be at least 1");
  if (M > kMaxBrwDepth) {
    throw CapacityError("BRW depth " + std::to_string(M) + " exceeds the cap of " +
                        std::to_string(kMaxBrwDepth));
  }
}

}  // namespace

double brw_exact_depth_one(double beta) {
  if (!(beta >= 0.0)) throw DomainError("BRW free energy needs beta >= 0");
  if (beta == 0.0) return kLog2;
  using boost::math::constants::one_div_root_pi;
  using boost::math::constants::one_div_root_two_pi;
  boost::math::quadrature::exp_sinh<double> integrator;
  const double s = beta * std::sqrt(2.0);
  const double tail = integrator.integrate(
      [s](double z) {
        return 2.0 * one_div_root_two_pi<double>() * std::exp(-0.5 * z * z) *
               std::log1p(std::exp(-s * z));
      },
      1e-14);
  return beta * one_div_root_pi<double>() + tail;
}

BrwGrid brw_free_energy_grid(int M, const std::vector<double>& betas, int trials,
                             std::uint64_t seed, int workers, bool monte_carlo) {
  check_depth(M);
  if (betas.empty()) throw DomainError("BRW grid needs at least one beta");
  if (trials < 2) throw DomainError("BRW estimate needs at least 2 trials");
  for (double b : betas) {
    if (!(b >= 0.0)) throw DomainError("BRW free energy needs beta >= 0");
  }
  BrwGrid grid;
  grid.M = M;
  grid.betas = betas;
  const auto identity = CovarianceSpec::identity();
  grid.log_z = parallel_map(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const CremRealization real(identity, M, derive_seed(seed, "brw", static_cast<std::uint64_t>(M), t));
    const auto leaves = subtree_leaf_values(real, VertexId::root(), M);
    std::vector<double> scaled(leaves.size());
    std::vector<double> out(betas.size());
    for (std::size_t j = 0; j < betas.size(); ++j) {
      for (std::size_t i = 0; i < leaves.size(); ++i) scaled[i] = betas[j] * leaves[i];
      out[j] = log_sum_exp(scaled);
    }
    return out;
  });
  for (std::size_t j = 0; j < betas.size(); ++j) {
    BrwEstimate est;
    est.M = M;
    est.beta = betas[j];
    if (betas[j] == 0.0) {
      est.f_hat = kLog2;
      est.exact = true;
    } else if (M == 1 && !monte_carlo) {
      est.f_hat = brw_exact_depth_one(betas[j]);
      est.exact = true;
    } else {
      std::vector<double> per_trial(grid.log_z.size());
      for (std::size_t t = 0; t < per_trial.size(); ++t) per_trial[t] = grid.log_z[t][j] / M;
      const auto s = summarize(per_trial);
      est.f_hat = s.mean;
      est.std_error = s.std_error;
    }
    grid.estimates.push_back(est);
  }
  return grid;
}

BrwEstimate brw_free_energy(int M, double beta, int trials, std::uint64_t seed, int workers,
                            bool monte_carlo) {
  check_depth(M);
  if (trials < 100) throw DomainError("BRW estimate needs at least 100 trials");
  if (beta == 0.0) return {M, 0.0, kLog2, 0.0, true};
  if (M == 1 && !monte_carlo) return {M, beta, brw_exact_depth_one(beta), 0.0, true};
  return brw_free_energy_grid(M, {beta}, trials, seed, workers, monte_carlo).estimates.front();
}

double g_transform(double f_value, double beta) {
  if (!(beta >= 0.0)) throw DomainError("g transform needs beta >= 0");
  if (beta == 0.0) return 0.0;
  return f_value / beta - 2.0 * kLog2 / beta;
}

GmReport verify_gM_properties(const std::vector<double>& beta_grid,
                              const std::vector<int>& M_list, int trials,
                              std::uint64_t seed, int workers) {
  if (beta_grid.empty() || M_list.empty()) throw DomainError("g_M check needs nonempty grids");
  GmReport report;
  report.M_list = M_list;
  for (int M : M_list) {
    const auto grid = brw_free_energy_grid(M, beta_grid, trials, seed, workers);
    double sup = 0.0;
    for (const auto& est : grid.estimates) {
      const double f = brw_free_energy_limit(est.beta);
      GmRow row{M, est.beta, est.f_hat, est.std_error, f, g_transform(est.f_hat, est.beta),
                est.f_hat <= f + 3.0 * est.std_error};
      report.upper_bound_ok = report.upper_bound_ok && row.below_limit;
      if (est.beta > 0.0) sup = std::max(sup, std::abs(est.f_hat - f) / est.beta);
      report.rows.push_back(row);
    }
    report.sup_error.push_back(sup);

    // Paired differences of g along the grid, per trial.
    bool monotone = true;
    for (std::size_t j = 0; j + 1 < beta_grid.size(); ++j) {
      const double b0 = beta_grid[j];
      const double b1 = beta_grid[j + 1];
      // g(0) := 0 is a convention; g tends to -inf as beta -> 0+.
      if (b0 == 0.0) continue;
      if (grid.estimates[j].exact && grid.estimates[j + 1].exact) {
        monotone = monotone && g_transform(grid.estimates[j + 1].f_hat, b1) >=
                                   g_transform(grid.estimates[j].f_hat, b0);
        continue;
      }
      std::vector<double> diff(grid.log_z.size());
      for (std::size_t t = 0; t < diff.size(); ++t) {
        const double g0 = g_transform(grid.log_z[t][j] / M, b0);
        const double g1 = g_transform(grid.log_z[t][j + 1] / M, b1);
        diff[t] = g1 - g0;
      }
      const auto s = summarize(diff);
      monotone = monotone && s.mean >= -3.0 * s.std_error;
    }
    report.g_monotone.push_back(monotone);
    report.monotone_ok = report.monotone_ok && monotone;
  }
  for (std::size_t i = 1; i < report.sup_error.size(); ++i) {
    report.trend_ok = report.trend_ok && report.sup_error[i] < report.sup_error[i - 1];
  }
  return report;
}

double calibrate_epsilon(int M, const std::vector<double>& beta_grid, int trials,
                         std::uint64_t seed, int workers) {
  const auto grid = brw_free_energy_grid(M, beta_grid, trials, seed, workers);
  double eps = 0.0;
  for (const auto& est : grid.estimates) {
    if (est.beta <= 0.0) continue;
    const double f = brw_free_energy_limit(est.beta);
    eps = std::max(eps, std::abs(est.f_hat - f) / est.beta + 3.0 * est.std_error / est.beta);
  }
  return eps;
}

std::vector<SandwichRow> sandwich_check(const CovarianceSpec& spec, double beta, int N, int M,
                                        std::uint64_t seed, int trials, int workers) {
  check_depth(M);
  if (M > N) throw DomainError("sandwich check needs M <= N");
  if (trials < 2) throw DomainError("sandwich check needs at least 2 trials");
  std::vector<double> calibration_grid;
  for (int i = 1; i <= 12; ++i) calibration_grid.push_back(0.25 * i);

  std::vector<SandwichRow> rows;
  for (int k = 0; k * M < N; ++k) {
    const int top = k * M;
    const int depth = std::min(M, N - top);
    const double lo = static_cast<double>(top) / N;
    const double hi = static_cast<double>(top + depth) / N;
    const double am = spec.ess_inf(lo, hi);
    const double ap = spec.ess_sup(lo, hi);
    const double eps = calibrate_epsilon(depth, calibration_grid, trials, seed, workers);

    VertexId root;
    for (int i = 0; i < top; ++i) root = root.child(0);
    const auto values = parallel_map(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
      const CremRealization real(spec, N, derive_seed(seed, "sandwich", static_cast<std::uint64_t>(k), t));
      auto leaves = subtree_leaf_values(real, root, depth);
      for (double& x : leaves) x *= beta;
      return log_sum_exp(leaves) / depth;
    });
    const auto s = summarize(values);
    SandwichRow row{k, depth, am, ap, s.mean, s.std_error, eps,
                    brw_free_energy_limit(beta * std::sqrt(am)) - eps * beta * std::sqrt(am),
                    brw_free_energy_limit(beta * std::sqrt(ap)) + eps * beta * std::sqrt(ap),
                    false};
    row.inside = row.estimate >= row.lower - 3.0 * row.std_error &&
                 row.estimate <= row.upper + 3.0 * row.std_error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace crem
