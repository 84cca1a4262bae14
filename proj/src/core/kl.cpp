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

#include "crem/kl.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>

#include "crem/error.hpp"
#include "crem/parallel.hpp"
#include "crem/random.hpp"

namespace crem {

double kl_divergence(const LeafDistribution& P, const LeafDistribution& Q) {
  if (P.N != Q.N || P.size() != Q.size()) {
    throw DomainError("KL divergence needs distributions on the same leaves");
  }
  std::vector<double> terms;
  terms.reserve(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double lp = P.log_weights[i];
    if (lp == -std::numeric_limits<double>::infinity()) continue;
    const double lq = Q.log_weights[i];
    if (lq == -std::numeric_limits<double>::infinity()) {
      throw DomainError("KL divergence: Q vanishes where P does not");
    }
    terms.push_back(std::exp(lp) * (lp - lq));
  }
  std::sort(terms.begin(), terms.end(),
            [](double a, double b) { return std::abs(a) > std::abs(b); });
  double sum = 0.0;
  for (double t : terms) sum += t;
  if (sum < 0.0 && sum >= -1e-12) sum = 0.0;
  return sum;
}

KlReport kl_decomposition(const DenseTree& tree, const SamplerConfig& cfg) {
  cfg.validate();
  const int N = tree.depth();
  if (cfg.N != N) throw DomainError("sampler depth differs from tree");
  KlReport report;
  report.kl_direct = kl_divergence(output_law_exact(tree, cfg), exact_gibbs(tree, cfg.beta));
  report.log_z_full = log_partition(tree, 0, 0, N, cfg.beta);

  std::vector<double> reach{0.0};
  int d = 0;
  for (int k = 0; d < N; ++k) {
    const int m = std::min(cfg.M, N - d);
    const auto log_z = level_log_partitions(tree, d, m, cfg.beta);
    double term = 0.0;
    double plain = 0.0;
    for (std::size_t u = 0; u < reach.size(); ++u) {
      term += std::exp(reach[u]) * log_z[u];
      plain += log_z[u];
    }
    report.per_level_terms.emplace_back(k, term);
    report.sum_block_log_z += term;
    report.sum_level_mean_log_z += plain / static_cast<double>(reach.size());

    std::vector<double> next(reach.size() << m);
    const auto below = tree.level(d + m);
    for (std::size_t u = 0; u < reach.size(); ++u) {
      const double root = tree.value(d, u);
      const double base = reach[u] - log_z[u];
      for (std::size_t w = 0; w < (std::size_t{1} << m); ++w) {
        next[(u << m) + w] = base + cfg.beta * (below[(u << m) + w] - root);
      }
    }
    reach = std::move(next);
    d += m;
  }
  report.kl_decomposed = report.log_z_full - report.sum_block_log_z;
  report.normalized = report.kl_direct / N;
  return report;
}

ExpectedKl expected_kl(const CovarianceSpec& spec, double beta, int M, int N,
                       int n_realizations, std::uint64_t seed,
                       std::uint64_t grid_index, int workers, int dense_cap) {
  if (n_realizations < 2) throw DomainError("expected KL needs at least 2 realizations");
  const SamplerConfig cfg{beta, M, N};
  cfg.validate();
  if (N > std::min(dense_cap, kHardDenseCap)) {
    throw CapacityError("expected KL at N=" + std::to_string(N) + " exceeds the dense cap");
  }
  auto reports = parallel_map(static_cast<std::size_t>(n_realizations), workers,
                              [&](std::size_t r) {
                                const CremRealization real(spec, N, derive_seed(seed, "kl", grid_index, r));
                                return kl_decomposition(DenseTree::materialize(real, dense_cap), cfg);
                              });
  std::vector<double> kl, alt, diff;
  for (const auto& rep : reports) {
    kl.push_back(rep.kl_decomposed);
    alt.push_back(rep.log_z_full - rep.sum_level_mean_log_z);
    diff.push_back(kl.back() - alt.back());
  }
  ExpectedKl out;
  out.kl = summarize(kl, true);
  out.alternative = summarize(alt, true);
  out.difference = summarize(diff);
  out.estimators_agree = std::abs(out.difference.mean) <= 3.0 * out.difference.std_error + 1e-12;
  out.reports = std::move(reports);
  return out;
}

double gaussian_moment_constant(double p) {
  if (!(p >= 1.0)) throw DomainError("moment constant needs p >= 1");
  boost::math::quadrature::exp_sinh<double> integrator;
  const double integral = integrator.integrate(
      [p](double y) {
        const double e = std::exp(-0.5 * y * y);
        return e == 0.0 ? 0.0 : e * std::pow(y, p - 1.0);
      },
      1e-14);
  return std::pow(2.0, p / 2.0 + 1.0) * p * integral;
}

double concentration_bound(double beta, int M, double p) {
  if (M < 1) throw DomainError("concentration bound needs M >= 1");
  if (beta == 0.0) return 0.0;
  const double cp = std::sqrt(2.0) * std::pow(gaussian_moment_constant(p), 1.0 / p);
  return beta * cp / std::sqrt(static_cast<double>(M));
}

ConcentrationReport concentration_check(const CovarianceSpec& spec, double beta, int N,
                                        const std::vector<int>& M_list, int n_realizations,
                                        std::uint64_t seed, int workers) {
  if (M_list.empty()) throw DomainError("concentration check needs a nonempty M list");
  ConcentrationReport report;
  for (int M : M_list) {
    const auto ekl = expected_kl(spec, beta, M, N, n_realizations, seed, 0, workers);
    double l1 = 0.0, l2 = 0.0;
    const double mean = ekl.kl.mean / N;
    for (double v : ekl.kl.values) {
      const double dev = std::abs(v / N - mean);
      l1 += dev;
      l2 += dev * dev;
    }
    const double n = static_cast<double>(ekl.kl.values.size());
    ConcentrationRow row{M, mean, l1 / n, std::sqrt(l2 / n),
                         concentration_bound(beta, M, 1.0), concentration_bound(beta, M, 2.0),
                         false};
    row.violation = row.deviation_l1 > row.bound_l1 || row.deviation_l2 > row.bound_l2;
    report.any_violation = report.any_violation || row.violation;
    report.rows.push_back(row);
  }
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const double prev = report.rows[i - 1].deviation_l2;
    report.ratios.push_back(prev > 0.0 ? report.rows[i].deviation_l2 / prev : 0.0);
  }
  return report;
}

std::vector<SandwichBlock> sandwich_envelope(const CovarianceSpec& spec, double beta,
                                             int N, int M, double eps) {
  std::vector<SandwichBlock> out;
  for (int k = 0; k * M < N; ++k) {
    const double lo = static_cast<double>(k * M) / N;
    const double hi = static_cast<double>(std::min(N, (k + 1) * M)) / N;
    const double am = spec.ess_inf(lo, hi);
    const double ap = spec.ess_sup(lo, hi);
    out.push_back({k, am, ap,
                   brw_free_energy_limit(beta * std::sqrt(am)) - eps * beta * std::sqrt(am),
                   brw_free_energy_limit(beta * std::sqrt(ap)) + eps * beta * std::sqrt(ap)});
  }
  return out;
}

std::vector<ConvergenceRow> convergence_gap_check(const CovarianceSpec& spec, double beta,
                                                  const std::vector<int>& N_list,
                                                  double epsilon, int n_realizations,
                                                  std::uint64_t seed, int workers,
                                                  double sandwich_eps) {
  if (N_list.empty()) throw DomainError("convergence check needs a nonempty N list");
  const double gap = free_energy_gap(spec, beta).value;
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    const int N = N_list[i];
    const int M = block_schedule(N, epsilon);
    const auto ekl = expected_kl(spec, beta, M, N, n_realizations, seed, i, workers);
    rows.push_back({N, M, ekl.kl.mean / N, ekl.kl.std_error / N, gap,
                    sandwich_envelope(spec, beta, N, M, sandwich_eps)});
  }
  return rows;
}

}  // namespace crem
