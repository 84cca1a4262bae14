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

#include "crem/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "crem/error.hpp"

namespace crem {

void SamplerConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
  if (N < 1) throw DomainError("N must be at least 1");
  if (M < 1 || M > N) throw DomainError("block depth M must lie in [1, N]");
}

SampleTrace sample_path(const CremRealization& real, const SamplerConfig& cfg,
                        RandomStream& rng, bool record_queries) {
  cfg.validate();
  if (cfg.N != real.depth()) throw DomainError("sampler depth differs from realization");
  SampleTrace trace;
  if (record_queries) trace.query_log.emplace();

  // Heap-indexed scratch for one block: node j has children 2j and 2j+1.
  const std::size_t cap = std::size_t{2} << cfg.M;
  std::vector<std::uint64_t> keys(cap);
  std::vector<double> rel(cap);
  std::vector<double> logw(std::size_t{1} << cfg.M);

  VertexId v;
  std::uint64_t key = real.root_key();
  double x = 0.0;
  while (v.depth() < cfg.N) {
    const int m = std::min(cfg.M, cfg.N - v.depth());
    const std::size_t first_leaf = std::size_t{1} << m;
    keys[1] = key;
    rel[1] = 0.0;
    for (std::size_t j = 2; j < (first_leaf << 1); ++j) {
      const int local = std::bit_width(j) - 1;
      keys[j] = child_key(keys[j >> 1], static_cast<unsigned>(j & 1U));
      rel[j] = rel[j >> 1] + real.increment(keys[j], v.depth() + local);
      ++trace.vertex_queries;
      if (trace.query_log) {
        VertexId q = v;
        for (int s = local - 1; s >= 0; --s) q = q.child(static_cast<unsigned>((j >> s) & 1U));
        trace.query_log->push_back(std::move(q));
      }
    }
    trace.leaf_evaluations += first_leaf;

    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < first_leaf; ++i) {
      logw[i] = cfg.beta * rel[first_leaf + i];
      peak = std::max(peak, logw[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < first_leaf; ++i) total += std::exp(logw[i] - peak);
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = first_leaf - 1;
    for (std::size_t i = 0; i < first_leaf; ++i) {
      acc += std::exp(logw[i] - peak);
      if (target < acc) {
        pick = i;
        break;
      }
    }

    for (int s = m - 1; s >= 0; --s) v = v.child(static_cast<unsigned>((pick >> s) & 1U));
    key = keys[first_leaf + pick];
    x += rel[first_leaf + pick];
    trace.block_choices.push_back(v);
  }
  trace.leaf = std::move(v);
  trace.leaf_value = x;
  return trace;
}

LeafDistribution output_law_exact(const DenseTree& tree, const SamplerConfig& cfg) {
  cfg.validate();
  if (cfg.N != tree.depth()) throw DomainError("sampler depth differs from tree");
  const int N = cfg.N;
  LeafDistribution dist;
  dist.N = N;
  const auto leaves = tree.leaves();
  dist.log_weights.resize(leaves.size());
  for (std::size_t u = 0; u < leaves.size(); ++u) dist.log_weights[u] = cfg.beta * leaves[u];
  for (int k = 0; k * cfg.M < N; ++k) {
    const int d = k * cfg.M;
    const int m = std::min(cfg.M, N - d);
    const auto log_z = level_log_partitions(tree, d, m, cfg.beta);
    for (std::size_t u = 0; u < leaves.size(); ++u) {
      dist.log_weights[u] -= log_z[u >> (N - d)];
    }
  }
  return dist;
}

LeafDistribution output_law_recursive(const DenseTree& tree, const SamplerConfig& cfg) {
  cfg.validate();
  if (cfg.N != tree.depth()) throw DomainError("sampler depth differs from tree");
  const int N = cfg.N;
  // Log-probability of reaching each vertex at the current block boundary.
  std::vector<double> reach{0.0};
  int d = 0;
  while (d < N) {
    const int m = std::min(cfg.M, N - d);
    std::vector<double> next(reach.size() << m);
    std::vector<double> local(std::size_t{1} << m);
    const auto below = tree.level(d + m);
    for (std::size_t u = 0; u < reach.size(); ++u) {
      const double root = tree.value(d, u);
      for (std::size_t w = 0; w < local.size(); ++w) {
        local[w] = cfg.beta * (below[(u << m) + w] - root);
      }
      const double log_z = log_sum_exp(local);
      for (std::size_t w = 0; w < local.size(); ++w) {
        next[(u << m) + w] = reach[u] + local[w] - log_z;
      }
    }
    reach = std::move(next);
    d += m;
  }
  return {N, std::move(reach)};
}

int block_schedule(int N, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("block schedule needs epsilon > 0");
  if (N < 1) throw DomainError("block schedule needs N >= 1");
  const double raw = std::floor(epsilon * std::log2(static_cast<double>(N)));
  const int m = static_cast<int>(std::min(raw, static_cast<double>(N)));
  return std::max(1, m);
}

std::uint64_t query_budget(int N, int M) {
  if (M < 1 || M > N || M > 62) throw DomainError("query budget needs 1 <= M <= N");
  const std::uint64_t blocks = static_cast<std::uint64_t>((N + M - 1) / M);
  return blocks << M;
}

}  // namespace crem
